"""
ALC 表推演模块
一致性检查、断言蕴涵、约束析取蕴涵与概念包含判定

规则顺序: →⊓ / →∀ / →⊑ 饱和，然后 →⊔（单元传播后按左优先分支），最后 →∃。
新生个体采用子集阻塞（只由新生祖先阻塞），具名个体满足唯一名称假设。
"""

from dataclasses import dataclass
from typing import Callable, Dict, FrozenSet, Iterable, Iterator, List, Optional, Sequence, Tuple

from .config import Settings, settings as default_settings
from .errors import SelectionLimitError, TableauLimitError
from .schema import (
    All, And, Atomic, Bottom, Concept, ConceptAssertion, Not, Ontology, Or, RoleAssertion, Some,
    conjoin, negate, nnf,
)

TraceSink = Callable[[str], None]

_CLASH, _PROGRESS, _BRANCH, _DONE = range(4)


# ==================== 约束集合 ====================

class ConstraintSet:
    """基约束集合 {a : C}；对外按常量合并为一个 ⊓ 概念"""

    __slots__ = ("_pairs",)

    def __init__(self, pairs: Iterable[Tuple[str, Concept]] = ()):
        self._pairs: FrozenSet[Tuple[str, Concept]] = frozenset(pairs)

    @classmethod
    def of(cls, assertions: Iterable[ConceptAssertion]) -> "ConstraintSet":
        return cls((a.individual, a.concept) for a in assertions)

    def union(self, other: "ConstraintSet") -> "ConstraintSet":
        if not other._pairs:
            return self
        if not self._pairs:
            return other
        return ConstraintSet(self._pairs | other._pairs)

    __or__ = union

    def separate(self) -> List[ConceptAssertion]:
        """每条约束单独作为断言"""
        return sorted((ConceptAssertion(n, c) for n, c in self._pairs), key=str)

    def merged(self) -> List[ConceptAssertion]:
        """每个常量一条断言，概念按文本排序后合取"""
        grouped: Dict[str, List[Concept]] = {}
        for name, concept in self._pairs:
            grouped.setdefault(name, []).append(concept)
        return [ConceptAssertion(name, conjoin(sorted(grouped[name], key=str)))
                for name in sorted(grouped)]

    def assertions(self, merged: bool = True) -> List[ConceptAssertion]:
        return self.merged() if merged else self.separate()

    def __iter__(self) -> Iterator[Tuple[str, Concept]]:
        return iter(sorted(self._pairs, key=lambda p: (p[0], str(p[1]))))

    def __len__(self) -> int:
        return len(self._pairs)

    def __bool__(self) -> bool:
        return bool(self._pairs)

    def __eq__(self, other) -> bool:
        return isinstance(other, ConstraintSet) and self._pairs == other._pairs

    def __hash__(self) -> int:
        return hash(self._pairs)

    def __str__(self) -> str:
        return "{" + ", ".join(str(a) for a in self.merged()) + "}"

    __repr__ = __str__


EMPTY_CONSTRAINTS = ConstraintSet()


# ==================== 分支与模型 ====================

@dataclass(frozen=True)
class ModelSketch:
    """开放分支给出的模型草图（被阻塞节点折叠到阻塞者）"""
    domain: Tuple[str, ...]
    concepts: Dict[str, FrozenSet[str]]
    roles: Dict[str, FrozenSet[Tuple[str, str]]]

    def to_text(self) -> str:
        lines = ["domain: {" + ", ".join(self.domain) + "}"]
        for name in sorted(self.concepts):
            lines.append(f"{name}: {{" + ", ".join(sorted(self.concepts[name])) + "}")
        for name in sorted(self.roles):
            pairs = sorted(self.roles[name])
            lines.append(f"{name}: {{" + ", ".join(f"({a},{b})" for a, b in pairs) + "}")
        return "\n".join(lines)


class TableauBranch:
    """一条表推演分支：标签、角色边、新生个体的父节点与待处理析取"""

    __slots__ = ("labels", "edges", "parent", "pending", "queue", "closed")

    def __init__(self):
        self.labels: Dict[str, Dict[Concept, None]] = {}
        self.edges: Dict[str, List[Tuple[str, str]]] = {}
        self.parent: Dict[str, str] = {}
        self.pending: Dict[str, List[Concept]] = {}
        self.queue: List[Tuple[str, Concept]] = []
        self.closed = False

    def copy(self) -> "TableauBranch":
        other = TableauBranch()
        other.labels = {k: dict(v) for k, v in self.labels.items()}
        other.edges = {k: list(v) for k, v in self.edges.items()}
        other.parent = dict(self.parent)
        other.pending = {k: list(v) for k, v in self.pending.items()}
        other.queue = list(self.queue)
        other.closed = self.closed
        return other

    def add_node(self, name: str, parent: Optional[str] = None):
        self.labels[name] = {}
        self.edges[name] = []
        if parent is not None:
            self.parent[name] = parent

    def successors(self, s: str, role: str) -> List[str]:
        return [t for r, t in self.edges.get(s, ()) if r == role]

    def blocker(self, s: str) -> Optional[str]:
        """子集阻塞：某个新生祖先的标签包含 s 的标签"""
        if s not in self.parent:
            return None
        label = self.labels[s].keys()
        y = self.parent[s]
        while y in self.parent:
            if label <= self.labels[y].keys():
                return y
            y = self.parent[y]
        return None

    def model(self) -> ModelSketch:
        blocked = {s: self.blocker(s) for s in self.labels}
        domain = tuple(s for s in self.labels if blocked[s] is None)
        concepts: Dict[str, set] = {}
        roles: Dict[str, set] = {}
        for s in domain:
            for c in self.labels[s]:
                if isinstance(c, Atomic):
                    concepts.setdefault(c.name, set()).add(s)
            for role, t in self.edges[s]:
                target = blocked[t] or t
                roles.setdefault(role, set()).add((s, target))
        return ModelSketch(domain,
                           {k: frozenset(v) for k, v in concepts.items()},
                           {k: frozenset(v) for k, v in roles.items()})


@dataclass(frozen=True)
class SatResult:
    """一致性检查结果；一致时带见证模型"""
    consistent: bool
    witness: Optional[ModelSketch] = None

    @property
    def status(self) -> str:
        return "consistent" if self.consistent else "inconsistent"


def _merge_models(models: Sequence[ModelSketch]) -> ModelSketch:
    domain: List[str] = []
    concepts: Dict[str, set] = {}
    roles: Dict[str, set] = {}
    for m in models:
        domain.extend(m.domain)
        for k, v in m.concepts.items():
            concepts.setdefault(k, set()).update(v)
        for k, v in m.roles.items():
            roles.setdefault(k, set()).update(v)
    return ModelSketch(tuple(domain),
                       {k: frozenset(v) for k, v in concepts.items()},
                       {k: frozenset(v) for k, v in roles.items()})


# ==================== 推理器 ====================

class TableauReasoner:
    """
    绑定一个本体 Σ 的表推演推理器

    按角色断言图的连通分量分别检查；同一推理器实例内对分量结果做备忘，
    实例的生命周期即一次运行。
    """

    def __init__(self, sigma: Ontology, settings: Optional[Settings] = None,
                 trace: Optional[TraceSink] = None):
        self.sigma = sigma
        self.settings = settings or default_settings
        self.cap = self.settings.reasoning.tableau_cap
        self.trace = trace
        self._gcis: List[Concept] = list(dict.fromkeys(nnf(Or(Not(c), d)) for c, d in sigma.gcis()))
        self._memo: Dict[tuple, Optional[TableauBranch]] = {}
        self._disjuncts_cache: Dict[Concept, Tuple[Concept, ...]] = {}
        self._complement_cache: Dict[Concept, Concept] = {}
        self._steps = 0
        self.checks = 0

    # ---------- 对外接口 ----------

    def check(self, extra: Iterable[ConceptAssertion] = ()) -> SatResult:
        """Σ ∪ extra 的一致性"""
        self._steps = 0
        self.checks += 1
        extra = sorted(set(extra), key=str)
        branches: List[TableauBranch] = []
        for individuals, cas, ras in self._components(extra):
            key = (frozenset(individuals), frozenset(cas), frozenset(ras))
            if key in self._memo:
                branch = self._memo[key]
            else:
                branch = self._run(individuals, cas, ras)
                self._memo[key] = branch
            if branch is None:
                return SatResult(False)
            branches.append(branch)
        return SatResult(True, _merge_models([b.model() for b in branches]))

    def is_consistent(self, extra: Iterable[ConceptAssertion] = ()) -> bool:
        return self.check(extra).consistent

    def entails(self, assertion: ConceptAssertion) -> bool:
        """Σ ⊨ a:C（反驳 a:¬C）"""
        refutation = ConceptAssertion(assertion.individual, negate(assertion.concept))
        return not self.is_consistent([refutation])

    def subsumes(self, sub: Concept, sup: Concept) -> bool:
        """Σ ⊨ sub ⊑ sup（在新个体上反驳 sub ⊓ ¬sup）"""
        fresh = "_fresh"
        while self.sigma.has_individual(fresh):
            fresh += "_"
        return not self.is_consistent([ConceptAssertion(fresh, nnf(sub)),
                                       ConceptAssertion(fresh, negate(sup))])

    def entails_disjunction(self, alternatives: Sequence[ConstraintSet], merged: bool = True,
                            cap: Optional[int] = None) -> bool:
        """
        Σ 的每个模型是否满足至少一个备选约束合取

        对每个选择函数（从每个备选中取一条约束并取否定）都必须不一致。
        部分选择已不一致时剪枝，相同的选择集合只检查一次。
        """
        cap = cap or self.settings.reasoning.selection_cap
        alts = [cs.assertions(merged) for cs in alternatives]
        if not alts:
            return False
        if any(not alt for alt in alts):
            return True
        for alt in alts:
            if all(self.entails(a) for a in alt):
                return True

        frontier: Dict[FrozenSet[ConceptAssertion], None] = {frozenset(): None}
        selections = 0
        for alt in alts:
            following: Dict[FrozenSet[ConceptAssertion], None] = {}
            for picked in frontier:
                for a in alt:
                    chosen = picked | {ConceptAssertion(a.individual, negate(a.concept))}
                    if chosen in following:
                        continue
                    selections += 1
                    if selections > cap:
                        raise SelectionLimitError("约束析取的选择数超限", cap)
                    if self.is_consistent(chosen):
                        following[chosen] = None
            if not following:
                return True
            frontier = following
        return False

    # ---------- 分量划分 ----------

    def _components(self, extra: Sequence[ConceptAssertion]):
        individuals = list(self.sigma.individuals)
        known = set(individuals)
        for a in extra:
            if a.individual not in known:
                known.add(a.individual)
                individuals.append(a.individual)
        if not individuals:
            individuals = ["_anon"]

        root = {name: name for name in individuals}

        def find(x: str) -> str:
            while root[x] != x:
                root[x] = root[root[x]]
                x = root[x]
            return x

        role_assertions = [a for a in self.sigma.assertions if isinstance(a, RoleAssertion)]
        for ra in role_assertions:
            a, b = find(ra.subject), find(ra.object)
            if a != b:
                root[b] = a

        groups: Dict[str, List[str]] = {}
        for name in individuals:
            groups.setdefault(find(name), []).append(name)
        cas: Dict[str, List[ConceptAssertion]] = {}
        for a in list(self.sigma.assertions) + list(extra):
            if isinstance(a, ConceptAssertion):
                cas.setdefault(find(a.individual), []).append(a)
        ras: Dict[str, List[RoleAssertion]] = {}
        for ra in role_assertions:
            ras.setdefault(find(ra.subject), []).append(ra)
        for key, members in groups.items():
            yield members, cas.get(key, []), ras.get(key, [])

    # ---------- 推演 ----------

    def _run(self, individuals: List[str], cas: List[ConceptAssertion],
             ras: List[RoleAssertion]) -> Optional[TableauBranch]:
        branch = TableauBranch()
        for name in individuals:
            branch.add_node(name)
        for ra in ras:
            branch.edges[ra.subject].append((ra.role, ra.object))
        for name in individuals:
            for g in self._gcis:
                if not self._add(branch, name, g, None):
                    return None
        for a in cas:
            if not self._add(branch, a.individual, nnf(a.concept), None):
                return None
        return self._search(branch, individuals[0])

    def _search(self, branch: TableauBranch, root: str) -> Optional[TableauBranch]:
        stack: List[Tuple[TableauBranch, Optional[str], Optional[Concept]]] = [(branch, None, None)]
        while stack:
            b, s, d = stack.pop()
            if s is not None and not self._add(b, s, d, "or"):
                continue
            result = self._expand(b, stack, root)
            if result is not None:
                return result
        return None

    def _expand(self, b: TableauBranch, stack: list, root: str) -> Optional[TableauBranch]:
        while True:
            if b.closed or not self._saturate(b):
                return None
            status, choice = self._scan_disjunctions(b)
            if status == _CLASH:
                return None
            if status == _PROGRESS:
                continue
            if status == _BRANCH:
                s, alive = choice
                for d in reversed(alive[1:]):
                    stack.append((b.copy(), s, d))
                if not self._add(b, s, alive[0], "or"):
                    return None
                continue
            status = self._apply_exists(b, root)
            if status == _CLASH:
                return None
            if status == _DONE:
                return b

    def _tick(self):
        self._steps += 1
        if self._steps > self.cap:
            raise TableauLimitError("表推演节点数超限", self.cap)

    def _emit(self, rule: Optional[str], s: str, c: Concept):
        if self.trace is not None and rule is not None:
            self.trace(f"RULE {rule} {s} : {c}")

    def _add(self, b: TableauBranch, s: str, c: Concept, rule: Optional[str]) -> bool:
        label = b.labels[s]
        if c in label:
            return True
        self._tick()
        label[c] = None
        self._emit(rule, s, c)
        if (isinstance(c, Bottom)
                or (isinstance(c, Atomic) and Not(c) in label)
                or (isinstance(c, Not) and c.operand in label)):
            b.closed = True
            self._emit("clash", s, c)
            return False
        b.queue.append((s, c))
        return True

    def _saturate(self, b: TableauBranch) -> bool:
        while b.queue:
            s, c = b.queue.pop()
            if isinstance(c, And):
                if not (self._add(b, s, c.left, "and") and self._add(b, s, c.right, "and")):
                    return False
            elif isinstance(c, All):
                for t in b.successors(s, c.role):
                    if not self._add(b, t, c.filler, "forall"):
                        return False
            elif isinstance(c, Or):
                b.pending.setdefault(s, []).append(c)
        return True

    def _disjuncts(self, c: Concept) -> Tuple[Concept, ...]:
        cached = self._disjuncts_cache.get(c)
        if cached is None:
            if isinstance(c, Or):
                cached = tuple(dict.fromkeys(self._disjuncts(c.left) + self._disjuncts(c.right)))
            else:
                cached = (c,)
            self._disjuncts_cache[c] = cached
        return cached

    def _complement(self, c: Concept) -> Concept:
        cached = self._complement_cache.get(c)
        if cached is None:
            cached = negate(c)
            self._complement_cache[c] = cached
        return cached

    def _scan_disjunctions(self, b: TableauBranch):
        """丢弃已满足的析取；无可选项即冲突，唯一可选项直接加入，否则返回第一个分支点"""
        choice = None
        for s, items in b.pending.items():
            label = b.labels[s]
            keep: List[Concept] = []
            for i, c in enumerate(items):
                ds = self._disjuncts(c)
                if any(d in label for d in ds):
                    continue
                alive = [d for d in ds if not isinstance(d, Bottom) and self._complement(d) not in label]
                if not alive:
                    b.closed = True
                    self._emit("clash", s, c)
                    return _CLASH, None
                if len(alive) == 1:
                    b.pending[s] = keep + items[i + 1:]
                    return (_PROGRESS if self._add(b, s, alive[0], "or") else _CLASH), None
                keep.append(c)
                if choice is None:
                    choice = (s, alive)
            b.pending[s] = keep
        return (_BRANCH, choice) if choice is not None else (_DONE, None)

    def _apply_exists(self, b: TableauBranch, root: str) -> int:
        for s in list(b.labels):
            if b.blocker(s) is not None:
                continue
            for c in list(b.labels[s]):
                if not isinstance(c, Some):
                    continue
                if any(c.filler in b.labels[t] for t in b.successors(s, c.role)):
                    continue
                x = f"_{root}.{len(b.parent) + 1}"
                b.add_node(x, parent=s)
                b.edges[s].append((c.role, x))
                self._emit("exists", s, c)
                if not self._add(b, x, c.filler, "exists"):
                    return _CLASH
                for g in self._gcis:
                    if not self._add(b, x, g, "gci"):
                        return _CLASH
                for d in list(b.labels[s]):
                    if isinstance(d, All) and d.role == c.role:
                        if not self._add(b, x, d.filler, "forall"):
                            return _CLASH
                return _PROGRESS
        return _DONE


# ==================== 函数式接口 ====================

def check_consistency(sigma: Ontology, extra: Iterable[ConceptAssertion] = (),
                      settings: Optional[Settings] = None,
                      trace: Optional[TraceSink] = None) -> SatResult:
    """Σ ∪ extra 在唯一名称假设下是否有模型"""
    return TableauReasoner(sigma, settings, trace).check(extra)


def entails_assertion(sigma: Ontology, assertion: ConceptAssertion,
                      settings: Optional[Settings] = None) -> bool:
    return TableauReasoner(sigma, settings).entails(assertion)


def entails_constraint_disjunction(sigma: Ontology, alternatives: Sequence[ConstraintSet],
                                   settings: Optional[Settings] = None, merged: bool = True) -> bool:
    return TableauReasoner(sigma, settings).entails_disjunction(alternatives, merged)


def entails_subsumption(sigma: Ontology, sub: Concept, sup: Concept,
                        settings: Optional[Settings] = None) -> bool:
    return TableauReasoner(sigma, settings).subsumes(sub, sup)
