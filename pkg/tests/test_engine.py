"""约束 SLD 求解、答案集、覆盖与支持度"""

import random
from fractions import Fraction
from itertools import product

import pytest

from src.clauses import Atom, Clause, Constant, Constraint, KnowledgeBase, Observation, OQuery, Variable
from src.config import ReasoningConfig, Settings
from src.engine import (
    DatalogEngine, answer_set, covers_entailment, covers_interpretations, format_percent,
    reference_instances, support,
)
from src.errors import DepthLimitError, ReferenceConceptError
from src.parsers import parse_clause, parse_program, parse_query
from src.schema import And, Atomic, ConceptAssertion, Not, Ontology, Or, Subsume
from src.tableau import TableauReasoner

MIDDLE_EAST = ["ARM", "BRN", "IR", "IRQ", "IL", "JOR", "KWT", "RL", "OM", "Q", "SA", "SYR", "TR", "UAE", "YE"]


def _ground(predicate: str, *names: str) -> Clause:
    return Clause(None, (Atom(predicate, tuple(Constant(n) for n in names)),))


def _kb(program: str, individuals=("a", "b", "c", "d")) -> KnowledgeBase:
    sigma = Ontology(concepts=("A", "B"), individuals=tuple(individuals))
    return KnowledgeBase(sigma, tuple(parse_program(program).clauses))


def test_answer_set_of_reference_query(mini_kb, q1, q3):
    assert answer_set(mini_kb, q1).individuals == ("ARM", "IR")
    assert answer_set(mini_kb, q3).individuals == ("ARM", "IR")
    assert "SA" not in answer_set(mini_kb, q1)


def test_support(mini_kb, q1):
    assert support(q1, mini_kb) == Fraction(2, 3)
    assert support(OQuery.trivial("MiddleEastCountry"), mini_kb) == 1
    assert format_percent(support(q1, mini_kb)) == "66.6 %"


def test_format_percent_truncates():
    assert format_percent(Fraction(4, 15)) == "26.6 %"
    assert format_percent(Fraction(1, 3)) == "33.3 %"
    assert format_percent(Fraction(1)) == "100.0 %"
    assert format_percent(Fraction(0)) == "0.0 %"


def test_reference_instances_exclude_non_middle_east(cia_kb):
    instances = reference_instances(cia_kb, "MiddleEastCountry")
    assert sorted(instances) == sorted(MIDDLE_EAST)
    assert "PK" not in instances


def test_cia_support(cia_kb, cia_sparse_kb, q1):
    assert support(q1, cia_kb) == Fraction(5, 15)
    assert answer_set(cia_sparse_kb, q1).individuals == ("ARM", "IR", "SA", "UAE")
    assert support(q1, cia_sparse_kb) == Fraction(4, 15)
    assert format_percent(support(q1, cia_sparse_kb)) == "26.6 %"


def test_empty_reference_concept():
    kb = KnowledgeBase(Ontology(concepts=("C",), individuals=("a",)))
    with pytest.raises(ReferenceConceptError):
        support(OQuery.trivial("C"), kb)


def test_ground_query_with_entailed_constraints(mini_kb):
    engine = DatalogEngine(mini_kb)
    assert engine.answer_ground_query(_ground("speaks", "IR", "Persian"))
    assert not engine.answer_ground_query(_ground("speaks", "SA", "Arabic"))
    assert not engine.answer_ground_query(parse_query("speaks('IR','Persian') & 'Persian':ArabicLanguage"))


def test_derivations_carry_ground_constraints(mini_kb):
    derivations = DatalogEngine(mini_kb).resolve_all(_ground("speaks", "IR", "Persian"))
    assert len(derivations) == 1
    pairs = set(derivations[0].constraints)
    assert ("Persian", Atomic("Language")) in pairs
    assert ("IR", Atomic("Country")) in pairs
    assert "speaks('IR','Persian') :- language('IR','Persian',58) & 'IR':Country, 'Persian':Language." in derivations[0].trace


def test_non_ground_query_filters_by_entailment(mini_kb):
    answers = DatalogEngine(mini_kb).answer_query(parse_query("speaks('IR', L) & L:IndoEuropeanLanguage"))
    assert [a.answer[Variable("L")] for a in answers] == [Constant("Persian")]


def test_complex_constraint_concepts(mini_kb):
    engine = DatalogEngine(mini_kb)
    either = engine.answer_query(parse_query("speaks('IR', L) & L:(ArabicLanguage or IndoIranianLanguage)"))
    assert sorted(a.answer[Variable("L")].name for a in either) == ["Arabic", "Persian"]
    hosts = engine.answer_query(parse_query("speaks(C, 'Arabic') & C:some(Hosts, MiddleEasternEthnicGroup)"))
    assert sorted(a.answer[Variable("C")].name for a in hosts) == ["ARM", "IR"]
    # Arabic 没有被断言为非印欧语
    assert engine.answer_query(parse_query("speaks('IR', L) & L:(Language and not IndoEuropeanLanguage)")) == []

    q = OQuery(parse_clause("q(X) :- speaks(X,Y) & X:MiddleEastCountry, Y:(ArabicLanguage or IndoIranianLanguage)."))
    assert answer_set(mini_kb, q).individuals == ("ARM", "IR")


def test_merge_setting_does_not_change_answers(mini_kb, q1, q2):
    separate = Settings(reasoning=ReasoningConfig(merge_constraints=False))
    for q in (q1, q2):
        assert answer_set(mini_kb, q, separate).individuals == answer_set(mini_kb, q).individuals


def test_recursion_terminates_on_cycles():
    kb = _kb("e(a,b). e(b,a). path(X,Y) :- e(X,Y). path(X,Y) :- e(X,Z), path(Z,Y).")
    engine = DatalogEngine(kb)
    assert engine.answer_ground_query(_ground("path", "a", "a"))
    assert not engine.answer_ground_query(_ground("path", "a", "c"))


def test_depth_limit():
    kb = _kb("e(a,b). e(b,c). e(c,d). base(d). p(X) :- base(X). p(X) :- e(X,Y), p(Y).")
    shallow = Settings(reasoning=ReasoningConfig(max_depth=2))
    with pytest.raises(DepthLimitError):
        DatalogEngine(kb, shallow).answer_ground_query(_ground("p", "a"))
    assert DatalogEngine(kb).answer_ground_query(_ground("p", "a"))


def test_truncation_is_reset_per_query():
    kb = _kb("e(a,b). e(b,c). e(c,d). base(d). p(X) :- base(X). p(X) :- e(X,Y), p(Y).")
    engine = DatalogEngine(kb, Settings(reasoning=ReasoningConfig(max_depth=2)))
    with pytest.raises(DepthLimitError):
        engine.answer_ground_query(_ground("p", "a"))
    assert engine.truncated
    assert engine.answer_ground_query(_ground("p", "d"))
    assert not engine.truncated
    assert not engine.resolve_all(_ground("base", "a")).truncated


def test_object_identity_rejects_repeated_bindings():
    kb = _kb("r(a,a). r(a,b).")
    rule = Clause(Atom("q", (Variable("X"),)),
                  (Atom("r", (Variable("X"), Variable("Y"))),), (), True)
    engine = DatalogEngine(kb.with_clauses([rule]))
    derivations = engine.resolve_all(_ground("q", "a"))
    assert len(derivations) == 1
    assert "r(a,b)." in derivations[0].trace


def test_coverage_from_interpretations(mini_kb, q1, q2):
    observation = Observation(
        Atom("q", (Constant("SA"),)),
        (Atom("language", (Constant("SA"), Constant("Arabic"), Constant("100", numeric=True))),),
    )
    assert covers_interpretations(q1, mini_kb, observation)
    assert not covers_interpretations(q2, mini_kb, observation)
    assert covers_entailment(q1, mini_kb, observation.as_clause())
    assert not covers_entailment(q2, mini_kb, observation.as_clause())


def test_coverage_from_entailment(mini_kb, q1, q2):
    assert covers_entailment(q1, mini_kb, parse_clause("q('IR') :- speaks('IR','Persian')"))
    assert covers_entailment(q2, mini_kb, parse_clause("q('IR') :- speaks('IR','Persian')"))
    assert not covers_entailment(q2, mini_kb, parse_clause("q('SA') :- speaks('SA','Arabic')"))
    assert not covers_entailment(q1, mini_kb, parse_clause("r('IR') :- speaks('IR','Persian')"))
    assert covers_entailment(OQuery.trivial("MiddleEastCountry"), mini_kb, parse_clause("q('SA')"))


def test_coverage_with_constraint_in_observation(mini_kb, q2):
    o = parse_clause("q('SA') :- speaks('SA','Arabic') & 'Arabic':IndoEuropeanLanguage")
    assert covers_entailment(q2, mini_kb, o)


# ==================== 与逐模型最小不动点的对照 ====================

NAMES = ("a", "b", "c")
CONCEPTS = (Atomic("A"), Atomic("B"))
X, Y = Variable("X"), Variable("Y")


def _prop(rng: random.Random):
    atom = rng.choice(CONCEPTS)
    literal = Not(atom) if rng.random() < 0.3 else atom
    if rng.random() < 0.5:
        return literal
    other = rng.choice(CONCEPTS)
    return rng.choice([And, Or])(literal, Not(other) if rng.random() < 0.3 else other)


def _holds(c, types) -> bool:
    if isinstance(c, Atomic):
        return c.name in types
    if isinstance(c, Not):
        return not _holds(c.operand, types)
    if isinstance(c, And):
        return _holds(c.left, types) and _holds(c.right, types)
    return _holds(c.left, types) or _holds(c.right, types)


def p(v):
    return Atom("p", (v,))


def f(v):
    return Atom("f", (v,))


def g(u, v):
    return Atom("g", (u, v))


def _random_rules(rng: random.Random):
    def con(v):
        return Constraint(v, rng.choice(CONCEPTS))

    templates = [
        lambda: Clause(p(X), (f(X),), (con(X),)),
        lambda: Clause(p(X), (g(X, Y),), (con(Y),)),
        lambda: Clause(p(X), (g(X, Y), p(Y)), (con(X),)),
        lambda: Clause(p(X), (g(Y, X), f(Y)), (con(X), con(Y))),
        lambda: Clause(p(X), (f(X),)),
    ]
    return [rng.choice(templates)() for _ in range(rng.randint(1, 3))]


def _ground_atom(a: Atom, binding):
    return (a.predicate, tuple(binding[t] for t in a.args))


def _least_model(facts, rules, assignment):
    model = set(facts)
    changed = True
    while changed:
        changed = False
        for rule in rules:
            variables = rule.variables()
            for values in product(NAMES, repeat=len(variables)):
                binding = dict(zip(variables, values))
                if all(_ground_atom(a, binding) in model for a in rule.body) and \
                   all(c.concept.name in assignment[binding[c.term]] for c in rule.constraints):
                    head = _ground_atom(rule.head, binding)
                    if head not in model:
                        model.add(head)
                        changed = True
    return model


def _entailed_by_all_models(sigma: Ontology, facts, rules, goal):
    """None 表示 Σ 不一致"""
    types = [frozenset(), frozenset({"A"}), frozenset({"B"}), frozenset({"A", "B"})]
    models = 0
    for choice in product(types, repeat=len(NAMES)):
        assignment = dict(zip(NAMES, choice))
        if not all(_holds(a.concept, assignment[a.individual]) for a in sigma.assertions):
            continue
        if not all(not _holds(sub, assignment[n]) or _holds(sup, assignment[n])
                   for sub, sup in sigma.gcis() for n in NAMES):
            continue
        models += 1
        if goal not in _least_model(facts, rules, assignment):
            return False
    return True if models else None


@pytest.mark.slow
def test_ground_answers_agree_with_model_enumeration():
    rng = random.Random(7)
    outcomes = {True: 0, False: 0}
    checked = 0
    while checked < 300:
        assertions = tuple(ConceptAssertion(rng.choice(NAMES), _prop(rng)) for _ in range(rng.randint(1, 3)))
        axioms = (Subsume(_prop(rng), _prop(rng)),) if rng.random() < 0.3 else ()
        sigma = Ontology(concepts=("A", "B"), individuals=NAMES, axioms=axioms, assertions=assertions)
        facts = [("f", (n,)) for n in NAMES if rng.random() < 0.4]
        facts += [("g", (m, n)) for m in NAMES for n in NAMES if rng.random() < 0.2]
        rules = _random_rules(rng)
        goal = ("p", (rng.choice(NAMES),))

        expected = _entailed_by_all_models(sigma, facts, rules, goal)
        if expected is None:
            continue
        clauses = tuple(Clause(Atom(p, tuple(Constant(n) for n in args))) for p, args in facts) + tuple(rules)
        kb = KnowledgeBase(sigma, clauses)
        actual = DatalogEngine(kb, reasoner=TableauReasoner(sigma)).answer_ground_query(
            _ground(goal[0], *goal[1]))
        assert actual == expected, (sigma.to_text(), [str(c) for c in clauses], goal)
        outcomes[expected] += 1
        checked += 1
    assert outcomes[True] and outcomes[False]
