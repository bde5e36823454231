"""
约束 Datalog 子句定义
项、原子、约束、子句、代换、知识库 ℬ = ⟨Σ, Π⟩、观察与 O-query
"""

from dataclasses import dataclass, field
from itertools import permutations, product
from typing import Dict, FrozenSet, Iterable, Iterator, List, Mapping, Optional, Sequence, Tuple, Union

from .schema import Atomic, Concept, ConceptAssertion, Ontology, quote_name


# ==================== 项 ====================

@dataclass(frozen=True, order=True)
class Variable:
    """变量：以大写字母或下划线开头"""
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, order=True)
class Constant:
    """常量：个体名或数值（数值常量不受字母表安全条件约束）"""
    name: str
    numeric: bool = False

    def __str__(self) -> str:
        return self.name if self.numeric else quote_name(self.name)


Term = Union[Variable, Constant]


# ==================== 原子与约束 ====================

@dataclass(frozen=True)
class Atom:
    """Datalog 原子 p(t1, ..., tn)"""
    predicate: str
    args: Tuple[Term, ...] = ()

    @property
    def arity(self) -> int:
        return len(self.args)

    def is_ground(self) -> bool:
        return not any(isinstance(t, Variable) for t in self.args)

    def variables(self) -> List[Variable]:
        return [t for t in self.args if isinstance(t, Variable)]

    def __str__(self) -> str:
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True)
class Constraint:
    """约束 t : C"""
    term: Term
    concept: Concept

    def __str__(self) -> str:
        concept = str(self.concept)
        if not isinstance(self.concept, Atomic):
            concept = f"({concept})"
        return f"{self.term}:{concept}"


# ==================== 子句 ====================

@dataclass(frozen=True)
class Clause:
    """约束 Datalog 子句 α0 ← α1, ..., αm & γ1, ..., γn；head 为空时是查询"""
    head: Optional[Atom]
    body: Tuple[Atom, ...] = ()
    constraints: Tuple[Constraint, ...] = ()
    # 在对象同一性偏置下求解（假设与 O-query）
    oi: bool = field(default=False, compare=False)
    # 对象同一性只在每组项内部要求；为空时整个子句是一组
    oi_groups: Tuple[FrozenSet[Term], ...] = field(default=(), compare=False)

    @property
    def is_query(self) -> bool:
        return self.head is None

    @property
    def is_fact(self) -> bool:
        return self.head is not None and not self.body and not self.constraints and self.head.is_ground()

    def atoms(self) -> List[Atom]:
        return ([self.head] if self.head is not None else []) + list(self.body)

    def variables(self) -> List[Variable]:
        """按首次出现顺序列出变量（头、体、约束）"""
        seen: Dict[Variable, None] = {}
        for atom in self.atoms():
            for v in atom.variables():
                seen.setdefault(v)
        for c in self.constraints:
            if isinstance(c.term, Variable):
                seen.setdefault(c.term)
        return list(seen)

    def datalog_variables(self) -> FrozenSet[Variable]:
        return frozenset(v for atom in self.atoms() for v in atom.variables())

    def constants(self) -> List[Constant]:
        seen: Dict[Constant, None] = {}
        for atom in self.atoms():
            for t in atom.args:
                if isinstance(t, Constant):
                    seen.setdefault(t)
        for c in self.constraints:
            if isinstance(c.term, Constant):
                seen.setdefault(c.term)
        return list(seen)

    def terms(self) -> List[Term]:
        return list(self.variables()) + list(self.constants())

    def with_oi(self, oi: bool = True) -> "Clause":
        return Clause(self.head, self.body, self.constraints, oi, self.oi_groups)

    def with_oi_groups(self, groups: Sequence[Iterable[Term]]) -> "Clause":
        return Clause(self.head, self.body, self.constraints, self.oi, tuple(frozenset(g) for g in groups))

    def __str__(self) -> str:
        body = ", ".join(str(a) for a in self.body)
        if self.constraints:
            body = f"{body} & " if body else "& "
            body += ", ".join(str(c) for c in self.constraints)
        if self.head is None:
            return f"?- {body}."
        if not body:
            return f"{self.head}."
        return f"{self.head} :- {body}."


# ==================== 代换 ====================

class Substitution:
    """代换 θ：变量 → 项的有限映射（不可变）"""

    __slots__ = ("_bindings", "_key")

    def __init__(self, bindings: Optional[Mapping[Variable, Term]] = None):
        self._bindings: Dict[Variable, Term] = dict(bindings or {})
        self._key = frozenset(self._bindings.items())

    @property
    def bindings(self) -> Mapping[Variable, Term]:
        return dict(self._bindings)

    def __contains__(self, v: Variable) -> bool:
        return v in self._bindings

    def __getitem__(self, v: Variable) -> Term:
        return self._bindings[v]

    def __iter__(self) -> Iterator[Variable]:
        return iter(self._bindings)

    def __len__(self) -> int:
        return len(self._bindings)

    def __eq__(self, other) -> bool:
        return isinstance(other, Substitution) and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def items(self):
        return self._bindings.items()

    def term(self, t: Term) -> Term:
        """单步替换，不做链式改写"""
        if isinstance(t, Variable):
            return self._bindings.get(t, t)
        return t

    def atom(self, a: Atom) -> Atom:
        return Atom(a.predicate, tuple(self.term(t) for t in a.args))

    def constraint(self, c: Constraint) -> Constraint:
        return Constraint(self.term(c.term), c.concept)

    def __str__(self) -> str:
        inner = ", ".join(f"{v}/{t}" for v, t in sorted(self._bindings.items(), key=lambda kv: kv[0].name))
        return "{" + inner + "}"

    __repr__ = __str__


def apply_substitution(h: Clause, s: Substitution) -> Clause:
    """对子句的原子与约束同时应用代换，未绑定的变量保持不变"""
    head = s.atom(h.head) if h.head is not None else None
    return Clause(head,
                  tuple(s.atom(a) for a in h.body),
                  tuple(s.constraint(c) for c in h.constraints),
                  h.oi,
                  tuple(frozenset(s.term(t) for t in g) for g in h.oi_groups))


def is_oi_substitution(s: Substitution, terms: Iterable[Term]) -> bool:
    """s 在 terms 上是否单射（对象同一性）"""
    images = {}
    for t in set(terms):
        image = s.term(t)
        if image in images and images[image] != t:
            return False
        images[image] = t
    return True


def rename_clause(h: Clause, suffix: str) -> Clause:
    """给所有变量加后缀，使子句与其他子句变量分离"""
    return apply_substitution(h, Substitution({v: Variable(v.name + suffix) for v in h.variables()}))


def standardize(h: Clause, distinguished: Optional[Variable] = None) -> Clause:
    """按首次出现顺序把变量重命名为 A, B, C, ...（保持原子顺序）"""
    order = h.variables()
    if distinguished is not None and distinguished in order:
        order.remove(distinguished)
        order.insert(0, distinguished)
    return apply_substitution(h, Substitution({v: Variable(_letter(i)) for i, v in enumerate(order)}))


def _letter(i: int) -> str:
    if i < 26:
        return chr(ord("A") + i)
    return f"{chr(ord('A') + i % 26)}{i // 26}"


# ==================== 链接性与连通性 ====================

def is_linked_connected(h: Clause) -> bool:
    """每个文字都被链接，且头部变量都出现在体中（约束也算体文字）"""
    if h.head is None:
        raise ValueError("链接性只对有头子句定义")
    literals: List[Tuple[Term, ...]] = [a.args for a in h.body]
    literals += [(c.term,) for c in h.constraints]

    body_vars = {t for lit in literals for t in lit if isinstance(t, Variable)}
    if any(v not in body_vars for v in h.head.variables()):
        return False

    linked = set(h.head.args)
    pending = list(literals)
    changed = True
    while changed:
        changed = False
        rest = []
        for lit in pending:
            if any(t in linked for t in lit):
                linked.update(lit)
                changed = True
            else:
                rest.append(lit)
        pending = rest
    return not pending


# ==================== 知识库 ====================

@dataclass(frozen=True)
class KnowledgeBase:
    """AL-log 知识库 ℬ = ⟨Σ, Π⟩"""
    sigma: Ontology
    clauses: Tuple[Clause, ...] = ()

    @property
    def intensional(self) -> List[Clause]:
        """带体或约束的规则（不含查询）"""
        return [c for c in self.clauses if not c.is_fact and c.head is not None]

    @property
    def extensional(self) -> List[Atom]:
        return [c.head for c in self.clauses if c.is_fact]

    def predicates(self) -> Dict[str, int]:
        """谓词名 → 元数（首次出现）"""
        result: Dict[str, int] = {}
        for clause in self.clauses:
            for atom in clause.atoms():
                result.setdefault(atom.predicate, atom.arity)
        return result

    def constants(self) -> List[Constant]:
        seen: Dict[Constant, None] = {}
        for clause in self.clauses:
            for c in clause.constants():
                seen.setdefault(c)
        return list(seen)

    def with_clauses(self, clauses: Iterable[Clause]) -> "KnowledgeBase":
        return KnowledgeBase(self.sigma, self.clauses + tuple(clauses))

    def with_facts(self, facts: Iterable[Atom]) -> "KnowledgeBase":
        return self.with_clauses(Clause(f) for f in facts)

    def with_sigma(self, sigma: Ontology) -> "KnowledgeBase":
        return KnowledgeBase(sigma, self.clauses)


@dataclass(frozen=True)
class Observation:
    """观察 (q(a_i), 𝒜_i)"""
    label: Atom
    facts: Tuple[Atom, ...] = ()

    def __post_init__(self):
        if not self.label.is_ground():
            raise ValueError(f"观察标签必须是基原子: {self.label}")
        for f in self.facts:
            if not f.is_ground():
                raise ValueError(f"观察事实必须是基原子: {f}")

    def as_clause(self) -> Clause:
        """等价的蕴涵设定下的观察子句 q(a_i) ← 𝒜_i"""
        return Clause(self.label, self.facts)


# ==================== O-query ====================

@dataclass(frozen=True)
class OQuery:
    """O-query：q(X) ← α1, ..., αm & X:C_ref, γ2, ..., γn"""
    clause: Clause

    def __post_init__(self):
        h = self.clause
        if h.head is None or h.head.arity != 1 or not isinstance(h.head.args[0], Variable):
            raise ValueError(f"O-query 的头必须是 q(X): {h}")
        x = h.head.args[0]
        on_x = [c for c in h.constraints if c.term == x]
        if len(on_x) != 1 or not isinstance(on_x[0].concept, Atomic):
            raise ValueError(f"O-query 必须恰有一个区分变量上的参考概念约束: {h}")
        if not is_linked_connected(h):
            raise ValueError(f"O-query 必须是链接且连通的: {h}")
        if not h.oi:
            object.__setattr__(self, "clause", h.with_oi(True))

    @classmethod
    def trivial(cls, reference: str, predicate: str = "q") -> "OQuery":
        x = Variable("X")
        return cls(Clause(Atom(predicate, (x,)), (), (Constraint(x, Atomic(reference)),), True))

    @property
    def distinguished(self) -> Variable:
        return self.clause.head.args[0]

    @property
    def reference(self) -> str:
        x = self.distinguished
        return next(c.concept.name for c in self.clause.constraints if c.term == x)

    @property
    def body(self) -> Tuple[Atom, ...]:
        return self.clause.body

    def extra_constraints(self) -> List[Constraint]:
        """区分变量之外的约束"""
        x = self.distinguished
        return [c for c in self.clause.constraints if c.term != x]

    def constant_args(self) -> int:
        return sum(1 for a in self.clause.body for t in a.args if isinstance(t, Constant))

    @property
    def depth(self) -> int:
        """搜索深度 k = 1 + 原子数 + 非区分约束数 + 常量参数数"""
        return 1 + len(self.clause.body) + len(self.extra_constraints()) + self.constant_args()

    def canonical(self) -> str:
        return canonical_text(self.clause, self.distinguished)

    def __str__(self) -> str:
        return str(self.clause)


def canonical_text(h: Clause, distinguished: Optional[Variable] = None) -> str:
    """
    同构不变的规范文本

    区分变量记为 A。其余变量先按出现位置的签名迭代细分成有序的类，
    类内成员可互换时只取一种顺序，否则在类内枚举排列，取字典序最小的渲染。
    """
    variables = h.variables()
    if distinguished is None and h.head is not None and h.head.variables():
        distinguished = h.head.variables()[0]
    others = [v for v in variables if v != distinguished]
    classes = _variable_classes(h, distinguished, others)
    choices = [[tuple(c)] if _interchangeable(h, c) else list(permutations(c)) for c in classes]
    best: Optional[str] = None
    for blocks in product(*choices):
        order = [v for block in blocks for v in block]
        mapping: Dict[Variable, Term] = {v: Variable(_letter(i + 1)) for i, v in enumerate(order)}
        if distinguished is not None:
            mapping[distinguished] = Variable("A")
        renamed = apply_substitution(h, Substitution(mapping))
        text = str(Clause(renamed.head,
                          tuple(sorted(renamed.body, key=str)),
                          tuple(sorted(renamed.constraints, key=_constraint_key))))
        if best is None or text < best:
            best = text
    return best if best is not None else str(h)


def _literal_text(literal: Union[Atom, Constraint], names: Mapping[Term, str]) -> str:
    if isinstance(literal, Constraint):
        return f"{names.get(literal.term, str(literal.term))}:{literal.concept}"
    return f"{literal.predicate}({','.join(names.get(t, str(t)) for t in literal.args)})"


def _variable_classes(h: Clause, distinguished: Optional[Variable],
                      others: Sequence[Variable]) -> List[List[Variable]]:
    """按签名迭代细分变量，直到类数不再增加；类按签名排序"""
    literals: List[Union[Atom, Constraint]] = list(h.body) + list(h.constraints)
    occurrences = {v: [l for l in literals
                       if (l.term == v if isinstance(l, Constraint) else v in l.args)]
                   for v in others}
    rank = {v: 0 for v in others}
    count = 1
    while True:
        signatures = {}
        for v in others:
            names: Dict[Term, str] = {u: f"?{rank[u]}" for u in others}
            names[v] = "@"
            if distinguished is not None:
                names[distinguished] = "A"
            signatures[v] = (rank[v], tuple(sorted(_literal_text(l, names) for l in occurrences[v])))
        keys = sorted(set(signatures.values()))
        rank = {v: keys.index(signatures[v]) for v in others}
        if len(keys) == count:
            break
        count = len(keys)
    classes: List[List[Variable]] = [[] for _ in range(count)]
    for v in others:
        classes[rank[v]].append(v)
    return [c for c in classes if c]


def _interchangeable(h: Clause, members: Sequence[Variable]) -> bool:
    """类中任意两成员对换都是子句的自同构"""
    body, constraints = frozenset(h.body), frozenset(h.constraints)
    first = members[0]
    for v in members[1:]:
        swapped = apply_substitution(h, Substitution({first: v, v: first}))
        if (swapped.head != h.head or frozenset(swapped.body) != body
                or frozenset(swapped.constraints) != constraints):
            return False
    return True


def _constraint_key(c: Constraint) -> Tuple[str, str]:
    return (str(c.term), str(c.concept))


def ground_constraints(constraints: Sequence[Constraint]) -> List[ConceptAssertion]:
    """把基约束转为 Σ 断言"""
    result = []
    for c in constraints:
        if not isinstance(c.term, Constant):
            raise ValueError(f"约束不是基的: {c}")
        result.append(ConceptAssertion(c.term.name, c.concept))
    return result
