"""
AL-log 知识库安全条件检查
违例作为数据返回，便于一次列出全部问题
"""

from dataclasses import dataclass, field
from typing import List, Sequence

from .clauses import Clause, KnowledgeBase, Variable
from .schema import Ontology, quote_name

CONDITION_NAMES = {
    0: "名字已在 Σ 中声明",
    1: "字母表不相交",
    2: "常量即个体",
    3: "约束变量出现在 Datalog 部分",
}


@dataclass(frozen=True)
class Violation:
    condition: int
    location: str
    message: str

    def __str__(self) -> str:
        return f"[条件 {self.condition}: {CONDITION_NAMES[self.condition]}] {self.location}: {self.message}"


@dataclass(frozen=True)
class ValidationReport:
    violations: List[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def by_condition(self, condition: int) -> List[Violation]:
        return [v for v in self.violations if v.condition == condition]

    def to_text(self) -> str:
        if self.ok:
            return "OK: 0 violations\n"
        lines = [f"{len(self.violations)} violation(s)"]
        lines += [str(v) for v in self.violations]
        return "\n".join(lines) + "\n"


def validate_kb(sigma: Ontology, program: Sequence[Clause]) -> ValidationReport:
    """检查三条安全条件，外加 Σ 与约束中的未声明名字"""
    violations: List[Violation] = []

    for problem in sigma.undeclared_names():
        violations.append(Violation(0, "Σ", problem))
    concepts, roles = set(sigma.concepts), set(sigma.roles)
    for clause in program:
        for c in clause.constraints:
            for name in sorted(c.concept.concept_names() - concepts):
                violations.append(Violation(0, str(clause), f"约束 {c} 中的概念 {name} 未在 Σ 中声明"))
            for name in sorted(c.concept.role_names() - roles):
                violations.append(Violation(0, str(clause), f"约束 {c} 中的角色 {name} 未在 Σ 中声明"))

    dl_names = set(sigma.concepts) | set(sigma.roles)
    reported = set()
    for clause in program:
        for atom in clause.atoms():
            if atom.predicate in dl_names and atom.predicate not in reported:
                reported.add(atom.predicate)
                violations.append(Violation(
                    1, str(clause), f"谓词 {atom.predicate}/{atom.arity} 与本体中的概念或角色同名"))

    for clause in program:
        for c in clause.constants():
            if not c.numeric and not sigma.has_individual(c.name):
                violations.append(Violation(2, str(clause), f"常量 {c} 不是 Σ 中的个体"))
    used = {c.name for clause in program for c in clause.constants() if not c.numeric}
    for name in sigma.individuals:
        if name not in used:
            violations.append(Violation(2, "Σ", f"个体 {quote_name(name)} 没有出现在 Π 中"))

    for clause in program:
        datalog = clause.datalog_variables()
        for c in clause.constraints:
            if isinstance(c.term, Variable) and c.term not in datalog:
                violations.append(Violation(3, str(clause), f"约束变量 {c.term} 没有出现在头或体原子中"))

    return ValidationReport(violations)


def validate(kb: KnowledgeBase) -> ValidationReport:
    return validate_kb(kb.sigma, kb.clauses)
