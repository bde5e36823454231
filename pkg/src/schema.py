"""
ALC 本体 Schema 定义
概念表达式、公理、断言与本体 Σ
"""

import re
from dataclasses import dataclass, field
from typing import FrozenSet, Iterable, List, Tuple, Union

_BARE_NAME = re.compile(r"^[a-z][A-Za-z0-9_]*$")
_KEYWORDS = {"top", "bot", "not", "and", "or", "all", "some", "concept", "role", "individual"}


def quote_name(name: str) -> str:
    """个体名的规范输出：小写标识符原样输出，其余加单引号"""
    if _BARE_NAME.match(name) and name not in _KEYWORDS:
        return name
    return "'" + name + "'"


# ==================== 概念表达式 ====================

class Concept:
    """ALC 概念表达式基类（不可变，结构相等）"""

    precedence = 3

    def concept_names(self) -> FrozenSet[str]:
        return frozenset()

    def role_names(self) -> FrozenSet[str]:
        return frozenset()

    def _wrap(self, child: "Concept", threshold: int) -> str:
        text = str(child)
        return f"({text})" if child.precedence < threshold else text


@dataclass(frozen=True)
class Top(Concept):
    def __str__(self) -> str:
        return "top"


@dataclass(frozen=True)
class Bottom(Concept):
    def __str__(self) -> str:
        return "bot"


@dataclass(frozen=True)
class Atomic(Concept):
    name: str

    def __post_init__(self):
        if not self.name:
            raise ValueError("概念名不能为空")

    def concept_names(self) -> FrozenSet[str]:
        return frozenset([self.name])

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not(Concept):
    operand: Concept

    def concept_names(self) -> FrozenSet[str]:
        return self.operand.concept_names()

    def role_names(self) -> FrozenSet[str]:
        return self.operand.role_names()

    def __str__(self) -> str:
        return "not " + self._wrap(self.operand, 3)


@dataclass(frozen=True)
class And(Concept):
    left: Concept
    right: Concept
    precedence = 2

    def concept_names(self) -> FrozenSet[str]:
        return self.left.concept_names() | self.right.concept_names()

    def role_names(self) -> FrozenSet[str]:
        return self.left.role_names() | self.right.role_names()

    def __str__(self) -> str:
        return f"{self._wrap(self.left, 2)} and {self._wrap(self.right, 3)}"


@dataclass(frozen=True)
class Or(Concept):
    left: Concept
    right: Concept
    precedence = 1

    def concept_names(self) -> FrozenSet[str]:
        return self.left.concept_names() | self.right.concept_names()

    def role_names(self) -> FrozenSet[str]:
        return self.left.role_names() | self.right.role_names()

    def __str__(self) -> str:
        return f"{self._wrap(self.left, 1)} or {self._wrap(self.right, 2)}"


@dataclass(frozen=True)
class All(Concept):
    role: str
    filler: Concept

    def __post_init__(self):
        if not self.role:
            raise ValueError("角色名不能为空")

    def concept_names(self) -> FrozenSet[str]:
        return self.filler.concept_names()

    def role_names(self) -> FrozenSet[str]:
        return frozenset([self.role]) | self.filler.role_names()

    def __str__(self) -> str:
        return f"all({self.role}, {self.filler})"


@dataclass(frozen=True)
class Some(Concept):
    role: str
    filler: Concept

    def __post_init__(self):
        if not self.role:
            raise ValueError("角色名不能为空")

    def concept_names(self) -> FrozenSet[str]:
        return self.filler.concept_names()

    def role_names(self) -> FrozenSet[str]:
        return frozenset([self.role]) | self.filler.role_names()

    def __str__(self) -> str:
        return f"some({self.role}, {self.filler})"


TOP = Top()
BOTTOM = Bottom()


def conjoin(concepts: Iterable[Concept]) -> Concept:
    """按给定顺序左结合地组成合取；空序列为 ⊤"""
    result = None
    for c in concepts:
        result = c if result is None else And(result, c)
    return TOP if result is None else result


def negate(c: Concept) -> Concept:
    """¬c 的否定范式"""
    if isinstance(c, Top):
        return BOTTOM
    if isinstance(c, Bottom):
        return TOP
    if isinstance(c, Atomic):
        return Not(c)
    if isinstance(c, Not):
        return nnf(c.operand)
    if isinstance(c, And):
        return Or(negate(c.left), negate(c.right))
    if isinstance(c, Or):
        return And(negate(c.left), negate(c.right))
    if isinstance(c, All):
        return Some(c.role, negate(c.filler))
    if isinstance(c, Some):
        return All(c.role, negate(c.filler))
    raise TypeError(f"未知概念类型: {type(c).__name__}")


def nnf(c: Concept) -> Concept:
    """否定范式：否定只出现在原子概念前"""
    if isinstance(c, Not):
        return negate(c.operand)
    if isinstance(c, And):
        return And(nnf(c.left), nnf(c.right))
    if isinstance(c, Or):
        return Or(nnf(c.left), nnf(c.right))
    if isinstance(c, All):
        return All(c.role, nnf(c.filler))
    if isinstance(c, Some):
        return Some(c.role, nnf(c.filler))
    return c


# ==================== 公理与断言 ====================

@dataclass(frozen=True)
class Equiv:
    """C ≡ D"""
    left: Concept
    right: Concept

    def __str__(self) -> str:
        return f"{self.left} == {self.right}."


@dataclass(frozen=True)
class Subsume:
    """C ⊑ D"""
    sub: Concept
    sup: Concept

    def __str__(self) -> str:
        return f"{self.sub} <= {self.sup}."


@dataclass(frozen=True)
class ConceptAssertion:
    """a : C"""
    individual: str
    concept: Concept

    def __str__(self) -> str:
        concept = str(self.concept)
        if self.concept.precedence < 3:
            concept = f"({concept})"
        return f"{quote_name(self.individual)} : {concept}"


@dataclass(frozen=True)
class RoleAssertion:
    """⟨a, b⟩ : R"""
    subject: str
    object: str
    role: str

    def __str__(self) -> str:
        return f"({quote_name(self.subject)}, {quote_name(self.object)}) : {self.role}"


Axiom = Union[Equiv, Subsume]
Assertion = Union[ConceptAssertion, RoleAssertion]


@dataclass(frozen=True)
class Ontology:
    """ALC 本体 Σ；各元组保持声明顺序"""
    concepts: Tuple[str, ...] = ()
    roles: Tuple[str, ...] = ()
    individuals: Tuple[str, ...] = ()
    axioms: Tuple[Axiom, ...] = ()
    assertions: Tuple[Assertion, ...] = ()
    _individual_set: FrozenSet[str] = field(default=frozenset(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "_individual_set", frozenset(self.individuals))

    def has_individual(self, name: str) -> bool:
        return name in self._individual_set

    def gcis(self) -> List[Tuple[Concept, Concept]]:
        """所有公理编译为 (C, D) 形式的 C ⊑ D 对，≡ 拆为两条"""
        pairs: List[Tuple[Concept, Concept]] = []
        for axiom in self.axioms:
            if isinstance(axiom, Equiv):
                pairs.append((axiom.left, axiom.right))
                pairs.append((axiom.right, axiom.left))
            else:
                pairs.append((axiom.sub, axiom.sup))
        return pairs

    def with_individuals(self, names: Iterable[str]) -> "Ontology":
        new = [n for n in dict.fromkeys(names) if not self.has_individual(n)]
        if not new:
            return self
        return Ontology(self.concepts, self.roles, self.individuals + tuple(new),
                        self.axioms, self.assertions)

    def with_assertions(self, assertions: Iterable[Assertion]) -> "Ontology":
        """追加断言，断言中出现的新个体一并登记"""
        assertions = tuple(assertions)
        names: List[str] = []
        for a in assertions:
            if isinstance(a, ConceptAssertion):
                names.append(a.individual)
            else:
                names.extend([a.subject, a.object])
        base = self.with_individuals(names)
        return Ontology(base.concepts, base.roles, base.individuals,
                        base.axioms, base.assertions + assertions)

    def undeclared_names(self) -> List[str]:
        """公理与断言中使用但未声明的名字"""
        concepts, roles = set(self.concepts), set(self.roles)
        problems: List[str] = []

        def check(c: Concept, where: str):
            for name in sorted(c.concept_names() - concepts):
                problems.append(f"未声明的概念 {name} ({where})")
            for name in sorted(c.role_names() - roles):
                problems.append(f"未声明的角色 {name} ({where})")

        for axiom in self.axioms:
            if isinstance(axiom, Equiv):
                check(axiom.left, str(axiom))
                check(axiom.right, str(axiom))
            else:
                check(axiom.sub, str(axiom))
                check(axiom.sup, str(axiom))
        for a in self.assertions:
            if isinstance(a, ConceptAssertion):
                check(a.concept, str(a))
                if not self.has_individual(a.individual):
                    problems.append(f"未声明的个体 {a.individual} ({a})")
            else:
                if a.role not in roles:
                    problems.append(f"未声明的角色 {a.role} ({a})")
                for name in (a.subject, a.object):
                    if not self.has_individual(name):
                        problems.append(f"未声明的个体 {name} ({a})")
        return problems

    def to_text(self) -> str:
        """输出为可重新解析的本体文本"""
        lines = [f"concept {name}." for name in self.concepts]
        lines += [f"role {name}." for name in self.roles]
        lines += [f"individual {quote_name(name)}." for name in self.individuals]
        lines += [str(axiom) for axiom in self.axioms]
        lines += [f"{a}." for a in self.assertions]
        return "\n".join(lines) + "\n"
