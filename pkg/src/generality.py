"""
ℬ-包含序
OI 偏置下约束子句之间的一般性比较，以及内涵的 m.g.d. / m.s.d. 合并
"""

from dataclasses import dataclass
from enum import Enum
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Set, Tuple, Union

from .clauses import (
    Atom, Clause, Constant, KnowledgeBase, OQuery, Substitution, Term, Variable,
    apply_substitution, canonical_text, ground_constraints, rename_clause, standardize,
)
from .config import Settings, settings as default_settings
from .engine import DatalogEngine, Derivations
from .errors import SearchLimitError

ClauseLike = Union[Clause, OQuery]
Intension = Tuple[Clause, ...]

_THETA = "theta__"


class ComparisonOutcome(str, Enum):
    MORE_GENERAL = "MoreGeneral"
    LESS_GENERAL = "LessGeneral"
    EQUIVALENT = "Equivalent"
    INCOMPARABLE = "Incomparable"


@dataclass(frozen=True)
class SkolemMap:
    """Skolem 代换 σ：变量 → 新常量（不在 ℬ 与子句中出现）"""
    substitution: Substitution

    @property
    def fresh(self) -> Tuple[str, ...]:
        return tuple(t.name for _, t in self.substitution.items())

    def inverse(self) -> Dict[Constant, Variable]:
        return {t: v for v, t in self.substitution.items()}


@dataclass(frozen=True)
class SubsumptionWitness:
    """H1 ⪰_B H2 的见证：θ（H1 变量 → H2 的项）与 H2 的 Skolem 代换 σ"""
    theta: Substitution
    skolem: SkolemMap

    def __str__(self) -> str:
        return f"θ = {self.theta}, σ = {self.skolem.substitution}"


def _clause(h: ClauseLike) -> Clause:
    return h.clause if isinstance(h, OQuery) else h


def _fresh_names(count: int, used: Set[str]) -> List[str]:
    names: List[str] = []
    i = 0
    while len(names) < count:
        name = chr(ord("a") + i % 26) + ("" if i < 26 else str(i // 26))
        if name not in used:
            names.append(name)
        i += 1
    return names


def skolemize(h: ClauseLike, kb: KnowledgeBase, avoid: Iterable[str] = ()) -> Tuple[Clause, SkolemMap]:
    """hσ 与 σ；新常量按变量首次出现顺序取 a, b, c, ...，跳过已用名字"""
    h = _clause(h)
    used = set(kb.sigma.individuals) | {c.name for c in kb.constants()} | {c.name for c in h.constants()}
    used |= set(avoid)
    variables = h.variables()
    names = _fresh_names(len(variables), used)
    sigma = Substitution({v: Constant(n) for v, n in zip(variables, names)})
    return apply_substitution(h, sigma), SkolemMap(sigma)


def _rename_apart(h1: Clause, h2: Clause) -> Tuple[Clause, Dict[Variable, Variable]]:
    taken = {v.name for v in h2.variables()}
    if not taken & {v.name for v in h1.variables()}:
        return h1, {v: v for v in h1.variables()}
    suffix = "_1"
    while any(v.name + suffix in taken for v in h1.variables()):
        suffix += "1"
    renamed = rename_clause(h1, suffix)
    return renamed, {Variable(v.name + suffix): v for v in h1.variables()}


def find_subsumption(h1: ClauseLike, h2: ClauseLike, kb: KnowledgeBase,
                     settings: Optional[Settings] = None) -> Optional[SubsumptionWitness]:
    """
    H1 ⪰_B H2 的判定：存在 OI 代换 θ 使 head(H1)θ = head(H2)，
    且 ℬ ∪ body(H2)σ ⊢ body(H1)θσ。

    H1 作为 OI 规则加入扩展后的知识库，求出 θ 的所有候选；
    同一 θ 的多条推导一起做析取蕴涵检查。
    """
    settings = settings or default_settings
    c1, c2 = _clause(h1), _clause(h2)
    if c1.head is None or c2.head is None:
        raise ValueError("ℬ-包含只对有头子句定义")
    if c1.head.predicate != c2.head.predicate or c1.head.arity != c2.head.arity:
        return None

    c1, original_names = _rename_apart(c1, c2)
    ground, skolem = skolemize(c2, kb, avoid=[c.name for c in c1.constants()])
    sigma = kb.sigma.with_individuals(skolem.fresh).with_assertions(ground_constraints(ground.constraints))
    extended = KnowledgeBase(sigma, kb.clauses + tuple(Clause(a) for a in ground.body))

    forced: Dict[Variable, Term] = {}
    for t1, t2 in zip(c1.head.args, ground.head.args):
        if isinstance(t1, Variable):
            if forced.setdefault(t1, t2) != t2:
                return None
        elif t1 != t2:
            return None

    variables = c1.variables()
    rule = Clause(Atom(_THETA, tuple(variables)), c1.body, c1.constraints, True)
    query = Clause(None, (Atom(_THETA, tuple(forced.get(v, v) for v in variables)),))
    engine = DatalogEngine(extended.with_clauses([rule]), settings)

    groups: Dict[Substitution, List] = {}
    for d in engine.resolve_all(query):
        groups.setdefault(d.answer, []).append(d)
    if len(groups) > settings.reasoning.theta_cap:
        raise SearchLimitError("θ 候选数超限", settings.reasoning.theta_cap)

    inverse = skolem.inverse()
    for answer, derivations in groups.items():
        group = Derivations(derivations)
        group.truncated = engine.truncated
        if not engine.entailed(group, query):
            continue
        theta: Dict[Variable, Term] = {}
        for v in variables:
            value = forced[v] if v in forced else answer[v]
            image = inverse.get(value, value)
            if image != original_names[v]:
                theta[original_names[v]] = image
        return SubsumptionWitness(Substitution(theta), skolem)
    return None


def b_subsumes(h1: ClauseLike, h2: ClauseLike, kb: KnowledgeBase,
               settings: Optional[Settings] = None) -> bool:
    return find_subsumption(h1, h2, kb, settings) is not None


def compare(h1: ClauseLike, h2: ClauseLike, kb: KnowledgeBase,
            settings: Optional[Settings] = None) -> ComparisonOutcome:
    forward = b_subsumes(h1, h2, kb, settings)
    backward = b_subsumes(h2, h1, kb, settings)
    return _outcome(forward, backward)


def _outcome(forward: bool, backward: bool) -> ComparisonOutcome:
    if forward and backward:
        return ComparisonOutcome.EQUIVALENT
    if forward:
        return ComparisonOutcome.MORE_GENERAL
    if backward:
        return ComparisonOutcome.LESS_GENERAL
    return ComparisonOutcome.INCOMPARABLE


# ==================== 内涵（子句集）====================

def intension_subsumes(i1: Sequence[ClauseLike], i2: Sequence[ClauseLike], kb: KnowledgeBase,
                       settings: Optional[Settings] = None) -> bool:
    """I2 的每个子句都被 I1 中某个子句 ℬ-包含"""
    return all(any(b_subsumes(c1, c2, kb, settings) for c1 in i1) for c2 in i2)


def compare_intensions(i1: Sequence[ClauseLike], i2: Sequence[ClauseLike], kb: KnowledgeBase,
                       settings: Optional[Settings] = None) -> ComparisonOutcome:
    return _outcome(intension_subsumes(i1, i2, kb, settings),
                    intension_subsumes(i2, i1, kb, settings))


def conjunction(h1: ClauseLike, h2: ClauseLike) -> Clause:
    """
    两个 O-query 的合取

    第二个子句的变量加后缀分离，区分变量合一；去掉完全重复的原子与约束，
    再把第二个子句中与第一个子句某叶变量形状、约束都相同的叶变量并入后者。
    两个合取项各自保持对象同一性分组，合取结果不要求跨组单射。
    """
    c1, c2 = _clause(h1), _clause(h2)
    c1, c2 = c1.with_oi_groups(_oi_groups(c1)), c2.with_oi_groups(_oi_groups(c2))
    x1 = c1.head.args[0]
    taken = {v.name for v in c1.variables()}
    suffix = "1"
    while any(v.name + suffix in taken for v in c2.variables()):
        suffix += "1"
    renamed = rename_clause(c2, suffix)
    second = apply_substitution(renamed, Substitution({renamed.head.args[0]: x1}))

    mapping: Dict[Variable, Variable] = {}
    first_leaves = _leaf_shapes(c1, x1)
    matched: Set[Variable] = set()
    for v, shape in _leaf_shapes(second, x1).items():
        for u, other in first_leaves.items():
            if u not in matched and other == shape:
                mapping[v] = u
                matched.add(u)
                break
    if mapping:
        second = apply_substitution(second, Substitution(mapping))

    body = list(dict.fromkeys(c1.body + second.body))
    constraints = list(dict.fromkeys(c1.constraints + second.constraints))
    groups = tuple(dict.fromkeys(c1.oi_groups + second.oi_groups))
    merged = Clause(c1.head, tuple(body), tuple(constraints), True, groups)
    return standardize(merged, x1)


def _oi_groups(c: Clause) -> Tuple[FrozenSet[Term], ...]:
    return c.oi_groups or (frozenset(c.terms()),)


def _leaf_shapes(c: Clause, distinguished: Variable) -> Dict[Variable, tuple]:
    """只在一个体原子中出现的非区分变量 → (原子形状, 约束概念集合)"""
    counts: Dict[Variable, int] = {}
    for atom in c.body:
        for v in set(atom.variables()):
            counts[v] = counts.get(v, 0) + 1
    shapes: Dict[Variable, tuple] = {}
    for atom in c.body:
        for v in dict.fromkeys(atom.variables()):
            if v == distinguished or counts[v] != 1 or atom.args.count(v) != 1:
                continue
            pattern = tuple("*" if t == v else t for t in atom.args)
            concepts = frozenset(str(k.concept) for k in c.constraints if k.term == v)
            shapes[v] = (atom.predicate, pattern, concepts)
    return shapes


def _union(acc: Intension, new: Intension) -> Intension:
    seen = {canonical_text(c) for c in acc}
    extra = tuple(c for c in new if canonical_text(c) not in seen)
    return acc + extra


def _conjoin_all(clauses: Sequence[Clause]) -> Clause:
    result = clauses[0]
    for c in clauses[1:]:
        result = conjunction(result, c)
    return result


def mgd(intensions: Sequence[Sequence[ClauseLike]], kb: KnowledgeBase,
        settings: Optional[Settings] = None) -> Intension:
    """最一般描述：按插入顺序左折叠；不可比时取并"""
    acc: Intension = tuple(_clause(c) for c in intensions[0])
    for item in intensions[1:]:
        new = tuple(_clause(c) for c in item)
        outcome = compare_intensions(acc, new, kb, settings)
        if outcome is ComparisonOutcome.LESS_GENERAL:
            acc = new
        elif outcome is ComparisonOutcome.INCOMPARABLE:
            acc = _union(acc, new)
    return acc


def msd(intensions: Sequence[Sequence[ClauseLike]], kb: KnowledgeBase,
        settings: Optional[Settings] = None) -> Intension:
    """最特殊描述：按插入顺序左折叠；不可比时取合取"""
    acc: Intension = tuple(_clause(c) for c in intensions[0])
    for item in intensions[1:]:
        new = tuple(_clause(c) for c in item)
        outcome = compare_intensions(acc, new, kb, settings)
        if outcome is ComparisonOutcome.MORE_GENERAL:
            acc = new
        elif outcome is ComparisonOutcome.INCOMPARABLE:
            acc = (_conjoin_all(list(acc) + list(new)),)
    return acc
