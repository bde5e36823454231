"""逐层频繁模式发现"""

from fractions import Fraction

import pytest

from src.discovery import (
    LanguageSpec, LevelwiseMiner, PatternEntry, PatternLanguage, Thresholds, discover, refine,
)
from src.engine import support
from src.errors import ReferenceConceptError
from src.schema import Atomic, Ontology
from src.tableau import TableauReasoner
from tests.conftest import oquery

Q1_CANONICAL = "q(A) :- speaks(A,B) & A:MiddleEastCountry, B:Language."


def _mini(mini_kb, mini_bias, quiet, minsup=None):
    thresholds = Thresholds(minsup=minsup) if minsup else mini_bias.thresholds
    return discover(mini_kb, mini_bias.language, thresholds, quiet)


def test_trivial_query_is_always_frequent(mini_kb, mini_bias, quiet):
    result = _mini(mini_kb, mini_bias, quiet, [Fraction(1), Fraction(1)])
    assert [e.canonical for e in result.frequent] == ["q(A) :- & A:MiddleEastCountry."]
    assert result.trivial.support == 1


def test_mini_frequent_patterns(mini_kb, mini_bias, quiet):
    result = _mini(mini_kb, mini_bias, quiet)
    frequent = {(e.level, e.canonical): e for e in result.frequent}
    q1 = frequent[(1, Q1_CANONICAL)]
    assert q1.support == Fraction(2, 3)
    assert q1.answers == ("ARM", "IR")
    assert q1.depth == 3
    assert (2, "q(A) :- speaks(A,B) & A:MiddleEastCountry, B:IndoEuropeanLanguage.") in frequent
    assert (2, "q(A) :- believes(A,B) & A:MiddleEastCountry, B:MonotheisticReligion.") in frequent
    assert len(result.frequent) == 6


def test_mini_stage_counters(mini_kb, mini_bias, quiet):
    result = _mini(mini_kb, mini_bias, quiet)
    one, two = result.counters[1], result.counters[2]
    assert (one.evaluated, one.pruned, one.frequent) == (5, 0, 3)
    assert (two.evaluated, two.pruned, two.frequent) == (3, 3, 3)
    assert result.candidates == 8
    assert result.pruned == 3


def test_supports_meet_level_thresholds(mini_kb, mini_bias, quiet):
    result = _mini(mini_kb, mini_bias, quiet)
    for e in result.entries:
        assert e.frequent == (e.support >= mini_bias.thresholds.at(e.level))
        assert e.support == support(e.query, mini_kb)


def test_support_is_monotone_along_refinement(mini_kb, mini_bias, quiet):
    result = _mini(mini_kb, mini_bias, quiet)
    by_id = {e.id: e for e in result.entries}
    for e in result.entries:
        for parent in e.parents:
            assert by_id[parent].support >= e.support


def test_refinement_operators(mini_kb, mini_bias):
    spec = mini_bias.language
    language = PatternLanguage(mini_kb, spec, TableauReasoner(mini_kb.sigma))
    trivial = PatternEntry(oquery("q(X) :- & X:MiddleEastCountry"), level=1, depth=1)
    children = {(level, q.canonical()) for q, level in refine(trivial, language)}
    assert (1, Q1_CANONICAL) in children
    assert all(level == 1 for level, _ in children)
    assert len(children) == 4

    q1 = PatternEntry(oquery(Q1_CANONICAL), level=1, depth=3)
    specialized = {(level, q.canonical()) for q, level in refine(q1, language)}
    assert specialized == {
        (2, "q(A) :- speaks(A,B) & A:MiddleEastCountry, B:AfroAsiaticLanguage."),
        (2, "q(A) :- speaks(A,B) & A:MiddleEastCountry, B:IndoEuropeanLanguage."),
    }


def test_concept_hierarchy_between_levels(mini_kb, mini_bias):
    language = PatternLanguage(mini_kb, mini_bias.language, TableauReasoner(mini_kb.sigma))
    assert language.subconcepts[1]["Language"] == ["IndoEuropeanLanguage", "AfroAsiaticLanguage"]
    assert language.superconcepts[2]["MonotheisticReligion"] == ["Religion"]
    assert not language.orphans()


def test_language_spec_and_thresholds():
    spec = LanguageSpec(reference="C", predicates={"p": 2}, levels=[["D"], ["E", "F"]])
    assert spec.max_granularity == 2
    assert spec.level_of("F") == 2
    assert spec.level_of("C") is None
    with pytest.raises(ValueError):
        Thresholds(minsup=[Fraction(3, 2)])
    with pytest.raises(ValueError):
        Thresholds(minsup=[Fraction(0)])


def test_reference_without_instances(mini_kb, quiet):
    spec = LanguageSpec(reference="Country", predicates={"speaks": 2}, levels=[["Language"]])
    sigma = Ontology(concepts=mini_kb.sigma.concepts, individuals=("x",))
    with pytest.raises(ReferenceConceptError):
        LevelwiseMiner(mini_kb.with_sigma(sigma), spec, Thresholds(minsup=[Fraction(1, 2)]), quiet)


@pytest.mark.slow
def test_cia_discovery(cia_kb, cia_bias, quiet):
    result = discover(cia_kb, cia_bias.language, cia_bias.thresholds, quiet)
    frequent = {(e.level, e.canonical): e for e in result.frequent}
    assert frequent[(1, Q1_CANONICAL)].support == Fraction(5, 15)
    druze = frequent[(3, "q(A) :- believes(A,'Druze') & A:MiddleEastCountry.")]
    assert druze.answers == ("IL", "SYR")
    assert druze.depth == 3
    assert result.pruned > 0


def test_level_counts_are_logged(mini_kb, mini_bias, quiet, capsys):
    _mini(mini_kb, mini_bias, quiet)
    err = capsys.readouterr().err
    assert "层 1: 候选 5，剪枝 0，频繁 3" in err
    assert "层 2: 候选 3，剪枝 3，频繁 3" in err


def _slot_language(mini_kb, modes):
    spec = LanguageSpec(reference="MiddleEastCountry", predicates={"speaks": 2, "dialect": 2},
                        levels=[["Language", "Religion"]], max_depth=5, modes=modes)
    return PatternLanguage(mini_kb, spec, TableauReasoner(mini_kb.sigma))


def test_argument_slots_guide_refinement(mini_kb):
    language = _slot_language(mini_kb, {"speaks": ["Country", "Language"],
                                        "dialect": ["Language", "Language"]})
    trivial = PatternEntry(oquery("q(X) :- & X:MiddleEastCountry"), level=1, depth=1)
    assert {q.canonical() for q, _ in refine(trivial, language)} == {Q1_CANONICAL}

    q1 = PatternEntry(oquery(Q1_CANONICAL), level=1, depth=3)
    children = {q.canonical() for q, _ in refine(q1, language)}
    chained = oquery("q(X) :- speaks(X,Y), dialect(Y,Z) & X:MiddleEastCountry, Y:Language, Z:Language")
    assert chained.canonical() in children
    assert not any("Religion" in text for text in children)


def test_predicates_without_slots_hang_off_the_distinguished_variable(mini_kb):
    language = _slot_language(mini_kb, {})
    q1 = PatternEntry(oquery(Q1_CANONICAL), level=1, depth=3)
    children = [q for q, _ in refine(q1, language)]
    assert children
    for q in children:
        assert all(atom.args[0] == q.distinguished for atom in q.clause.body)


def test_slots_must_match_arity():
    with pytest.raises(ValueError):
        LanguageSpec(reference="C", predicates={"p": 2}, levels=[["D"]], modes={"p": ["D"]})
    with pytest.raises(ValueError):
        LanguageSpec(reference="C", predicates={"p": 2}, levels=[["D"]], modes={"r": ["D", "D"]})


def test_discovery_matches_exhaustive_enumeration(mini_kb, mini_bias, quiet):
    spec, thresholds = mini_bias.language, mini_bias.thresholds
    assert spec.max_depth == 3
    reasoner = TableauReasoner(mini_kb.sigma)
    trivial = f"q(A) :- & A:{spec.reference}."
    expected = {(1, trivial)}
    frequent = {level: {trivial} for level in range(1, spec.max_granularity + 1)}

    def pattern(predicate, concept):
        return oquery(f"q(A) :- {predicate}(A,B) & A:{spec.reference}, B:{concept}")

    # 深度 3 以内只有 Q_t 与单个带约束原子的模式
    for level in range(1, spec.max_granularity + 1):
        for predicate in spec.predicates:
            for concept in spec.gamma(level):
                q = pattern(predicate, concept)
                if support(q, mini_kb) < thresholds.at(level):
                    continue
                if level > 1:
                    uppers = [c for c in spec.gamma(level - 1)
                              if reasoner.subsumes(Atomic(concept), Atomic(c))]
                    if any(pattern(predicate, c).canonical() not in frequent[level - 1] for c in uppers):
                        continue
                frequent[level].add(q.canonical())
                expected.add((level, q.canonical()))

    result = _mini(mini_kb, mini_bias, quiet)
    assert {(e.level, e.canonical) for e in result.frequent} == expected
    assert len(expected) == 6
