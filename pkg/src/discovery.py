"""
逐层频繁 O-query 发现
在多粒度语言 𝓛 = {𝓛^l} 上广度优先地生成并评估候选模式
"""

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Dict, List, Optional, Sequence, Set, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from rich.console import Console
from tqdm import tqdm

from .clauses import (
    Atom, Clause, Constant, Constraint, KnowledgeBase, OQuery, Variable, is_linked_connected, standardize,
)
from .config import Settings, settings as default_settings
from .engine import answer_set, reference_instances
from .errors import ReferenceConceptError
from .schema import Atomic
from .tableau import TableauReasoner

console = Console(stderr=True)


# ==================== 语言偏置 ====================

class LanguageSpec(BaseModel):
    """Datalog 字母表 𝒜、各粒度层的概念字母表 Γ^l、参考概念与深度上限"""
    model_config = ConfigDict(frozen=True)

    reference: str
    predicates: Dict[str, int]
    levels: List[List[str]] = Field(min_length=1)
    max_depth: int = Field(default=5, ge=1)
    # 谓词各参数的概念槽，None 表示不限；未声明的谓词只经由区分变量链接
    modes: Dict[str, List[Optional[str]]] = Field(default_factory=dict)

    @model_validator(mode="after")
    def _modes_match_arity(self) -> "LanguageSpec":
        for name, slots in self.modes.items():
            if self.predicates.get(name) != len(slots):
                raise ValueError(f"谓词 {name} 的参数槽个数与元数不符: {len(slots)}")
        return self

    @property
    def max_granularity(self) -> int:
        return len(self.levels)

    def gamma(self, level: int) -> List[str]:
        return self.levels[level - 1]

    def slots(self, predicate: str) -> Optional[List[Optional[str]]]:
        return self.modes.get(predicate)

    def level_of(self, concept: str) -> Optional[int]:
        """概念所在的最低粒度层"""
        for i, names in enumerate(self.levels, start=1):
            if concept in names:
                return i
        return None


class Thresholds(BaseModel):
    """各层最小支持度 minsup^l，取值 (0, 1] 的精确有理数"""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    minsup: List[Fraction] = Field(min_length=1)

    @field_validator("minsup")
    @classmethod
    def _in_unit_interval(cls, values: List[Fraction]) -> List[Fraction]:
        for v in values:
            if not (0 < v <= 1):
                raise ValueError(f"最小支持度必须在 (0, 1] 内: {v}")
        return values

    def at(self, level: int) -> Fraction:
        return self.minsup[level - 1]


# ==================== 模式 ====================

@dataclass
class PatternEntry:
    """一个候选模式及其评估结果"""
    query: OQuery
    level: int
    depth: int
    support: Fraction = Fraction(0)
    parents: Tuple[int, ...] = ()
    frequent: bool = False
    id: int = 0
    answers: Tuple[str, ...] = ()

    @property
    def canonical(self) -> str:
        return self.query.canonical()


@dataclass
class StageCounters:
    evaluated: int = 0
    pruned: int = 0
    frequent: int = 0


@dataclass
class DiscoveryResult:
    """全部候选（按评估顺序）与各层计数"""
    trivial: PatternEntry
    entries: List[PatternEntry] = field(default_factory=list)
    counters: Dict[int, StageCounters] = field(default_factory=dict)

    @property
    def frequent(self) -> List[PatternEntry]:
        return [e for e in self.entries if e.frequent]

    @property
    def candidates(self) -> int:
        return sum(c.evaluated for c in self.counters.values())

    @property
    def pruned(self) -> int:
        return sum(c.pruned for c in self.counters.values())

    def stage(self, level: int, depth: int) -> List[PatternEntry]:
        """𝓕^l_k"""
        return [e for e in self.frequent if e.level == level and e.depth == depth]


def trivial_query(spec: LanguageSpec, predicate: str = "q") -> OQuery:
    """Q_t = q(X) ← & X:C_ref"""
    return OQuery.trivial(spec.reference, predicate)


class PatternLanguage:
    """把语言偏置绑定到知识库：层间的子概念映射与常量池"""

    def __init__(self, kb: KnowledgeBase, spec: LanguageSpec, reasoner: TableauReasoner):
        self.kb = kb
        self.spec = spec
        self.reasoner = reasoner
        self.reference = spec.reference

        # subconcepts[l][C]：Γ^(l+1) 中被 C ∈ Γ^l 包含的概念
        self.subconcepts: Dict[int, Dict[str, List[str]]] = {}
        # superconcepts[l][C]：Γ^(l-1) 中包含 C ∈ Γ^l 的概念
        self.superconcepts: Dict[int, Dict[str, List[str]]] = {}
        for l in range(1, spec.max_granularity):
            upper, lower = spec.gamma(l), spec.gamma(l + 1)
            self.subconcepts[l] = {c: [] for c in upper}
            self.superconcepts[l + 1] = {d: [] for d in lower}
            for c in upper:
                for d in lower:
                    if reasoner.subsumes(Atomic(d), Atomic(c)):
                        self.subconcepts[l][c].append(d)
                        self.superconcepts[l + 1][d].append(c)

        # R2 常量池：𝒜 中谓词的外延事实里出现的常量（首参数除外）
        self.constants: Dict[str, List[Constant]] = {p: [] for p in spec.predicates}
        for fact in kb.extensional:
            pool = self.constants.get(fact.predicate)
            if pool is None or fact.arity != spec.predicates[fact.predicate]:
                continue
            for t in fact.args[1:]:
                if isinstance(t, Constant) and not t.numeric and t not in pool:
                    pool.append(t)

        self._fits: Dict[Tuple[str, str], bool] = {}

    def orphans(self) -> List[str]:
        """Γ^(l+1) 中没有 Γ^l 祖先的概念"""
        return [d for level in self.superconcepts.values() for d, ups in level.items() if not ups]

    def fits(self, concept: Optional[str], slot: Optional[str]) -> bool:
        """Σ ⊨ concept ⊑ slot；slot 为 None 时总成立"""
        if slot is None:
            return True
        if concept is None:
            return False
        key = (concept, slot)
        if key not in self._fits:
            self._fits[key] = concept == slot or self.reasoner.subsumes(Atomic(concept), Atomic(slot))
        return self._fits[key]

    def anchors(self, q: OQuery, predicate: str) -> List[Variable]:
        """新原子的首参数可以链接到的已有变量"""
        slots = self.spec.slots(predicate)
        if slots is None:
            return [q.distinguished]
        names = _constraint_names(q)
        return [v for v in q.clause.variables()
                if (slots[0] is None and v not in names)
                or any(self.fits(n, slots[0]) for n in names.get(v, []))]

    def fillers(self, predicate: str, position: int, level: int) -> List[str]:
        """第 position 个参数（从 0 计）上新变量可取的 Γ^level 概念"""
        slots = self.spec.slots(predicate)
        slot = slots[position] if slots else None
        return [c for c in self.spec.gamma(level) if self.fits(c, slot)]

    def admits(self, q: OQuery) -> bool:
        """带槽原子的每个变量参数都有落在槽内的约束"""
        names = _constraint_names(q)
        for atom in q.body:
            slots = self.spec.slots(atom.predicate)
            if slots is None:
                continue
            for t, slot in zip(atom.args, slots):
                if isinstance(t, Variable) and slot is not None \
                        and not any(self.fits(n, slot) for n in names.get(t, [])):
                    return False
        return True


def _constraint_names(q: OQuery) -> Dict[Variable, List[str]]:
    names: Dict[Variable, List[str]] = {}
    for c in q.clause.constraints:
        if isinstance(c.term, Variable) and isinstance(c.concept, Atomic):
            names.setdefault(c.term, []).append(c.concept.name)
    return names


def _pattern(head: Atom, body: Sequence[Atom], constraints: Sequence[Constraint]) -> OQuery:
    x = head.args[0]
    return OQuery(standardize(Clause(head, tuple(body), tuple(constraints), True), x))


def refine(p: PatternEntry, language: PatternLanguage) -> List[Tuple[OQuery, int]]:
    """
    模式 p 的下行精化，返回 (O-query, 层) 对

    - R1：追加 p(V, New...)，V 是落在首参数槽内的已有变量（未声明槽时只有 A），
      新变量受落在对应槽内的 Γ^l 概念约束
    - R2：仅在最细层 maxG 追加含常量的原子 p(V, c)
    - R3：把全部 Γ^l 约束下降为 Γ^(l+1) 子概念
    """
    spec = language.spec
    clause = p.query.clause
    l = p.level
    results: Dict[str, Tuple[OQuery, int]] = {}

    def emit(q: OQuery, level: int):
        results.setdefault(f"{level}|{q.canonical()}", (q, level))

    fresh_index = len(clause.variables())
    for predicate, arity in spec.predicates.items():
        news = [Variable(f"V{fresh_index + i}") for i in range(arity - 1)]
        anchors = language.anchors(p.query, predicate)
        if p.depth + 1 + len(news) <= spec.max_depth:
            options = [language.fillers(predicate, i + 1, l) for i in range(len(news))]
            for anchor in anchors:
                atom = Atom(predicate, (anchor, *news))
                for concepts in product(*options):
                    extra = [Constraint(v, Atomic(c)) for v, c in zip(news, concepts)]
                    emit(_pattern(clause.head, clause.body + (atom,), clause.constraints + tuple(extra)), l)

        if l == spec.max_granularity and arity == 2 and p.depth + 2 <= spec.max_depth:
            for anchor in anchors:
                for c in language.constants.get(predicate, []):
                    atom = Atom(predicate, (anchor, c))
                    if atom not in clause.body:
                        emit(_pattern(clause.head, clause.body + (atom,), clause.constraints), l)

    if l < spec.max_granularity:
        extra = p.query.extra_constraints()
        options = [language.subconcepts[l].get(c.concept.name, []) for c in extra]
        if extra and all(options):
            for choice in product(*options):
                mapping = dict(zip(extra, choice))
                constraints = tuple(Constraint(c.term, Atomic(mapping[c])) if c in mapping else c
                                    for c in clause.constraints)
                emit(_pattern(clause.head, clause.body, constraints), l + 1)

    return list(results.values())


def _drop_atom(q: OQuery, index: int) -> Optional[OQuery]:
    """去掉第 index 个原子；结果不再链接时返回 None"""
    clause = q.clause
    body = clause.body[:index] + clause.body[index + 1:]
    remaining = {v for a in body for v in a.variables()} | {q.distinguished}
    constraints = tuple(c for c in clause.constraints if c.term in remaining)
    if not is_linked_connected(Clause(clause.head, body, constraints)):
        return None
    return _pattern(clause.head, body, constraints)


def _generalizations(q: OQuery, level: int, language: PatternLanguage) -> List[OQuery]:
    """映射到 Γ^(l-1) 祖先概念并去掉常量原子后的所有模式"""
    clause = q.clause
    body = tuple(a for a in clause.body if not any(isinstance(t, Constant) for t in a.args))
    extra = q.extra_constraints()
    options = [language.superconcepts[level].get(c.concept.name, []) for c in extra]
    results = []
    for choice in product(*options):
        mapping = dict(zip(extra, choice))
        constraints = tuple(Constraint(c.term, Atomic(mapping[c])) if c in mapping else c
                            for c in clause.constraints)
        results.append(_pattern(clause.head, body, constraints))
    return results


class LevelwiseMiner:
    """逐层频繁模式挖掘器"""

    def __init__(self, kb: KnowledgeBase, spec: LanguageSpec, thresholds: Thresholds,
                 settings: Optional[Settings] = None, reasoner: Optional[TableauReasoner] = None):
        self.kb = kb
        self.spec = spec
        self.thresholds = thresholds
        self.settings = settings or default_settings
        self.reasoner = reasoner or TableauReasoner(kb.sigma, self.settings)
        self.language = PatternLanguage(kb, spec, self.reasoner)
        self.instances = reference_instances(kb, spec.reference, self.reasoner)
        if not self.instances:
            raise ReferenceConceptError(f"参考概念 {spec.reference} 没有实例")
        for name in self.language.orphans():
            console.print(f"[yellow]⚠️ 概念 {name} 在上一粒度层没有祖先[/yellow]")

    def evaluate(self, entry: PatternEntry) -> PatternEntry:
        answers = answer_set(self.kb, entry.query, self.settings, self.reasoner, self.instances)
        entry.answers = answers.individuals
        entry.support = Fraction(len(answers), len(self.instances))
        entry.frequent = entry.support >= self.thresholds.at(entry.level)
        return entry

    def run(self) -> DiscoveryResult:
        spec = self.spec
        next_id = 1
        trivial = PatternEntry(trivial_query(spec), level=1, depth=1, id=next_id)
        self.evaluate(trivial)
        trivial.frequent = True
        result = DiscoveryResult(trivial=trivial, entries=[trivial])
        result.counters = {l: StageCounters() for l in range(1, spec.max_granularity + 1)}
        result.counters[1].evaluated = 1
        result.counters[1].frequent = 1

        frequent: Dict[int, Set[str]] = {l: {trivial.canonical} for l in range(1, spec.max_granularity + 1)}
        pending: Dict[Tuple[int, int], Dict[str, PatternEntry]] = {}

        def schedule(parent: PatternEntry):
            for q, level in refine(parent, self.language):
                bucket = pending.setdefault((level, q.depth), {})
                key = q.canonical()
                if key in frequent[level] or key == trivial.canonical:
                    continue
                if key in bucket:
                    bucket[key].parents += (parent.id,)
                else:
                    bucket[key] = PatternEntry(q, level=level, depth=q.depth, parents=(parent.id,))

        for level in range(1, spec.max_granularity + 1):
            seed = PatternEntry(trivial.query, level=level, depth=1, support=trivial.support,
                                frequent=True, id=trivial.id, answers=trivial.answers)
            schedule(seed)
            for depth in range(2, spec.max_depth + 1):
                bucket = pending.pop((level, depth), {})
                if not bucket:
                    continue
                stage = [bucket[k] for k in sorted(bucket)]
                counters = result.counters[level]
                survivors = []
                for entry in stage:
                    if self._ancestors_frequent(entry, frequent):
                        survivors.append(entry)
                    else:
                        counters.pruned += 1
                for entry in tqdm(survivors, desc=f"层 {level} 深度 {depth}",
                                  disable=not self.settings.output.show_progress, leave=False):
                    next_id += 1
                    entry.id = next_id
                    self.evaluate(entry)
                    counters.evaluated += 1
                    result.entries.append(entry)
                # 阶段结束后才并入频繁集
                for entry in survivors:
                    if entry.frequent:
                        counters.frequent += 1
                        frequent[level].add(entry.canonical)
                        schedule(entry)
            done = result.counters[level]
            console.print(f"[cyan]层 {level}: 候选 {done.evaluated}，剪枝 {done.pruned}，频繁 {done.frequent}[/cyan]")

        console.print(f"[green]✓ 发现完成: {len(result.frequent)} 个频繁模式 / "
                      f"{result.candidates} 个候选（剪枝 {result.pruned}）[/green]")
        return result

    def _ancestors_frequent(self, entry: PatternEntry, frequent: Dict[int, Set[str]]) -> bool:
        q, level = entry.query, entry.level
        for i in range(len(q.body)):
            parent = _drop_atom(q, i)
            if parent is not None and parent.canonical() not in frequent[level]:
                return False
        if level > 1:
            for g in _generalizations(q, level, self.language):
                if self.language.admits(g) and g.canonical() not in frequent[level - 1]:
                    return False
        return True


def discover(kb: KnowledgeBase, spec: LanguageSpec, thresholds: Thresholds,
             settings: Optional[Settings] = None,
             reasoner: Optional[TableauReasoner] = None) -> DiscoveryResult:
    """𝓕：按 (l, k) 逐阶段评估候选，只精化频繁模式"""
    return LevelwiseMiner(kb, spec, thresholds, settings, reasoner).run()
