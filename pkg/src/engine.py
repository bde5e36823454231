"""
约束 SLD 消解引擎
自顶向下、最左选择，按调用变体制表；计算答案集、两种覆盖测试与支持度
"""

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Iterator, List, Optional, Sequence, Set, Tuple

from rich.console import Console

from .clauses import (
    Atom, Clause, Constant, KnowledgeBase, Observation, OQuery, Substitution, Variable,
    ground_constraints,
)
from .config import Settings, settings as default_settings
from .errors import DepthLimitError, ReferenceConceptError
from .schema import Atomic, ConceptAssertion
from .tableau import EMPTY_CONSTRAINTS, ConstraintSet, TableauReasoner, TraceSink

console = Console(stderr=True)

_Answer = Tuple[Atom, ConstraintSet, Tuple[str, ...]]


@dataclass(frozen=True)
class ConstrainedDerivation:
    """一次约束 SLD 推导的残余：计算出的答案代换与合并后的基约束"""
    answer: Substitution
    constraints: ConstraintSet
    trace: Tuple[str, ...] = ()


class Derivations(list):
    """推导列表；truncated 表示曾因深度上限截断"""
    truncated: bool = False


@dataclass(frozen=True)
class AnswerSet:
    """O-query 的答案集：区分变量到 C_ref 个体的代换"""
    query: OQuery
    substitutions: Tuple[Substitution, ...]

    @property
    def individuals(self) -> Tuple[str, ...]:
        x = self.query.distinguished
        return tuple(sorted(s[x].name for s in self.substitutions))

    def __len__(self) -> int:
        return len(self.substitutions)

    def __contains__(self, name: str) -> bool:
        return name in self.individuals


@dataclass(frozen=True)
class QueryAnswer:
    """非基查询的一个答案及其见证约束集"""
    answer: Substitution
    witnesses: Tuple[ConstraintSet, ...]


def _variant_key(goal: Atom) -> tuple:
    seen: Dict[Variable, int] = {}
    parts = []
    for t in goal.args:
        if isinstance(t, Variable):
            parts.append(("v", seen.setdefault(t, len(seen))))
        else:
            parts.append(("c", t))
    return (goal.predicate, tuple(parts))


def _matches(goal: Atom, ground: Atom) -> bool:
    """ground 是否是 goal 的实例（重复变量取同值）"""
    if goal.predicate != ground.predicate or goal.arity != ground.arity:
        return False
    binding: Dict[Variable, Constant] = {}
    for t, v in zip(goal.args, ground.args):
        if isinstance(t, Variable):
            if binding.setdefault(t, v) != v:
                return False
        elif t != v:
            return False
    return True


class DatalogEngine:
    """
    约束 Datalog 的自顶向下求解器

    - 归结只看 Datalog 部分，约束沿推导累积
    - 每个调用变体一张答案表，递归调用读到未完成的表时重算到不动点
    - 标记了 oi 的子句（假设、O-query）只接受单射的实例
    - 规则体求解后仍未绑定的变量在常量字母表上枚举
    """

    def __init__(self, kb: KnowledgeBase, settings: Optional[Settings] = None,
                 reasoner: Optional[TableauReasoner] = None, trace: Optional[TraceSink] = None):
        self.kb = kb
        self.settings = settings or default_settings
        self.max_depth = self.settings.reasoning.max_depth
        self.reasoner = reasoner or TableauReasoner(kb.sigma, self.settings, trace)

        self._facts: Dict[str, List[Atom]] = {}
        self._facts_first: Dict[Tuple[str, Constant], List[Atom]] = {}
        self._rules: Dict[str, List[Clause]] = {}
        for fact in kb.extensional:
            self._facts.setdefault(fact.predicate, []).append(fact)
            if fact.args:
                self._facts_first.setdefault((fact.predicate, fact.args[0]), []).append(fact)
        for rule in kb.intensional:
            self._rules.setdefault(rule.head.predicate, []).append(rule)

        domain: Dict[Constant, None] = {Constant(n): None for n in kb.sigma.individuals}
        for c in kb.constants():
            if not c.numeric:
                domain.setdefault(c)
        self._domain: List[Constant] = list(domain)

        self._tables: Dict[tuple, Dict[Tuple[Atom, ConstraintSet], Tuple[str, ...]]] = {}
        self._complete: Set[tuple] = set()
        self._active: Set[tuple] = set()
        self._hits: Set[tuple] = set()
        self.truncated = False

    # ==================== 查询接口 ====================

    def resolve_all(self, query: Clause) -> Derivations:
        """所有以约束空子句结束的推导（按答案与约束集去重）"""
        self._reset_truncation()
        variables = tuple(query.variables())
        pseudo = Clause(Atom("?-", variables), query.body, query.constraints, query.oi, query.oi_groups)
        seen: Dict[Tuple[Substitution, ConstraintSet], Tuple[str, ...]] = {}
        for head, cs, trace in self._apply_rule(pseudo, pseudo.head, 0):
            answer = Substitution(dict(zip(variables, head.args)))
            seen.setdefault((answer, cs), trace)
        result = Derivations(ConstrainedDerivation(a, cs, tr) for (a, cs), tr in seen.items())
        result.truncated = self.truncated
        return result

    def _reset_truncation(self):
        """截断只对当前查询有效；截断过的表不完整，丢弃重算"""
        if self.truncated:
            self._tables.clear()
            self._complete.clear()
        self.truncated = False

    def answer_ground_query(self, query: Clause) -> bool:
        """ℬ ⊢ Q：存在推导且其约束集的析取被 Σ 蕴涵"""
        derivations = self.resolve_all(query)
        if not derivations:
            if derivations.truncated:
                raise DepthLimitError(f"查询 {query} 在深度上限内没有推导", self.max_depth)
            return False
        return self.entailed(derivations, query)

    def answer_query(self, query: Clause) -> List[QueryAnswer]:
        """非基查询：按答案代换分组，每组单独做析取蕴涵检查"""
        groups: Dict[Substitution, List[ConstraintSet]] = {}
        derivations = self.resolve_all(query)
        for d in derivations:
            groups.setdefault(d.answer, []).append(d.constraints)
        answers = []
        for answer, sets in groups.items():
            group = Derivations(ConstrainedDerivation(answer, cs) for cs in sets)
            group.truncated = derivations.truncated
            if self.entailed(group, query):
                answers.append(QueryAnswer(answer, tuple(dict.fromkeys(sets))))
        return answers

    def entailed(self, derivations: Derivations, query: Clause) -> bool:
        """一组推导的约束集析取是否被 Σ 蕴涵"""
        alternatives = list(dict.fromkeys(d.constraints for d in derivations))
        if any(not cs for cs in alternatives):
            return True
        merged = self.settings.reasoning.merge_constraints
        if self.reasoner.entails_disjunction(alternatives, merged=merged):
            return True
        if derivations.truncated:
            raise DepthLimitError(f"查询 {query} 的推导被截断，无法判定", self.max_depth)
        return False

    # ==================== 制表求解 ====================

    def _call(self, goal: Atom, depth: int) -> List[_Answer]:
        key = _variant_key(goal)
        table = self._tables.get(key)
        if key in self._complete:
            return [(a, cs, tr) for (a, cs), tr in table.items()]
        if key in self._active:
            self._hits.add(key)
            return [(a, cs, tr) for (a, cs), tr in table.items()]
        if depth > self.max_depth:
            if not self.truncated:
                console.print(f"[yellow]⚠️ 推导深度超过 {self.max_depth}，结果已截断: {goal}[/yellow]")
            self.truncated = True
            return []

        if table is None:
            table = self._tables[key] = {}
        self._active.add(key)
        outer_hits = self._hits
        while True:
            self._hits = set()
            size = len(table)
            for atom, cs, tr in self._expand(goal, depth):
                table.setdefault((atom, cs), tr)
            hits = self._hits
            if key in hits and len(table) > size:
                continue
            break
        self._active.discard(key)
        hits.discard(key)
        self._hits = outer_hits | hits
        if not hits:
            self._complete.add(key)
        return [(a, cs, tr) for (a, cs), tr in table.items()]

    def _expand(self, goal: Atom, depth: int) -> Iterator[_Answer]:
        first = goal.args[0] if goal.args else None
        if isinstance(first, Constant):
            facts = self._facts_first.get((goal.predicate, first), [])
        else:
            facts = self._facts.get(goal.predicate, [])
        for fact in facts:
            if _matches(goal, fact):
                yield fact, EMPTY_CONSTRAINTS, (f"{fact}.",)
        for rule in self._rules.get(goal.predicate, []):
            yield from self._apply_rule(rule, goal, depth + 1)

    def _apply_rule(self, rule: Clause, goal: Atom, depth: int) -> Iterator[_Answer]:
        if rule.head.arity != goal.arity:
            return
        binding: Dict[Variable, Constant] = {}
        for g, h in zip(goal.args, rule.head.args):
            if isinstance(g, Constant):
                if isinstance(h, Constant):
                    if h != g:
                        return
                elif binding.setdefault(h, g) != g:
                    return
        if rule.oi and not self._oi_ok(rule, binding):
            return
        for solved, cs, trace in self._solve(rule, rule.body, binding, depth):
            for full in self._ground_rest(rule, solved):
                head = Atom(rule.head.predicate, tuple(full.get(t, t) for t in rule.head.args))
                if not _matches(goal, head):
                    continue
                instance = Substitution(full)
                own = ConstraintSet.of(ground_constraints([instance.constraint(c) for c in rule.constraints]))
                step = str(Clause(head, tuple(instance.atom(a) for a in rule.body),
                                  tuple(instance.constraint(c) for c in rule.constraints)))
                yield head, cs | own, trace + (step,)

    def _solve(self, rule: Clause, goals: Sequence[Atom], binding: Dict[Variable, Constant],
               depth: int) -> Iterator[Tuple[Dict[Variable, Constant], ConstraintSet, Tuple[str, ...]]]:
        if not goals:
            yield binding, EMPTY_CONSTRAINTS, ()
            return
        first = Atom(goals[0].predicate, tuple(binding.get(t, t) for t in goals[0].args))
        for answer, cs, trace in self._call(first, depth):
            extended = dict(binding)
            ok = True
            for t, v in zip(first.args, answer.args):
                if isinstance(t, Variable) and extended.setdefault(t, v) != v:
                    ok = False
                    break
            if not ok or (rule.oi and not self._oi_ok(rule, extended)):
                continue
            for solved, rest_cs, rest_trace in self._solve(rule, goals[1:], extended, depth):
                yield solved, cs | rest_cs, trace + rest_trace

    def _ground_rest(self, rule: Clause, binding: Dict[Variable, Constant]) -> Iterator[Dict[Variable, Constant]]:
        """在常量字母表上枚举剩余未绑定变量"""
        free = [v for v in rule.variables() if v not in binding]
        if not free:
            yield binding
            return

        def extend(i: int, current: Dict[Variable, Constant]):
            if i == len(free):
                yield current
                return
            for c in self._domain:
                candidate = dict(current)
                candidate[free[i]] = c
                if rule.oi and not self._oi_ok(rule, candidate):
                    continue
                yield from extend(i + 1, candidate)

        yield from extend(0, binding)

    @staticmethod
    def _oi_ok(rule: Clause, binding: Dict[Variable, Constant]) -> bool:
        """对象同一性：同组的不同变量取不同常量，且不取本组中已出现的常量"""
        if not rule.oi_groups:
            values = list(binding.values())
            if len(set(values)) != len(values):
                return False
            return not any(c in binding.values() for c in rule.constants())
        for group in rule.oi_groups:
            values = [binding[t] for t in group if isinstance(t, Variable) and t in binding]
            if len(set(values)) != len(values):
                return False
            if any(isinstance(t, Constant) and t in values for t in group):
                return False
        return True


# ==================== 函数式接口 ====================

def resolve_all(kb: KnowledgeBase, query: Clause, settings: Optional[Settings] = None) -> Derivations:
    return DatalogEngine(kb, settings).resolve_all(query)


def answer_ground_query(kb: KnowledgeBase, query: Clause, settings: Optional[Settings] = None,
                        reasoner: Optional[TableauReasoner] = None) -> bool:
    return DatalogEngine(kb, settings, reasoner).answer_ground_query(query)


def reference_instances(kb: KnowledgeBase, reference: str,
                        reasoner: Optional[TableauReasoner] = None,
                        settings: Optional[Settings] = None) -> List[str]:
    """Σ 中被蕴涵为 C_ref 实例的个体（声明顺序）"""
    reasoner = reasoner or TableauReasoner(kb.sigma, settings)
    concept = Atomic(reference)
    return [a for a in kb.sigma.individuals if reasoner.entails(ConceptAssertion(a, concept))]


def _label_query(q: OQuery, individual: str) -> Clause:
    return Clause(None, (Atom(q.clause.head.predicate, (Constant(individual),)),))


def answer_set(kb: KnowledgeBase, q: OQuery, settings: Optional[Settings] = None,
               reasoner: Optional[TableauReasoner] = None,
               instances: Optional[Sequence[str]] = None) -> AnswerSet:
    """
    answerset(Q, ℬ)：对 C_ref 的每个实例 a，把 Q 作为 OI 规则加入 ℬ 后判定 ← q(a)

    非区分变量按存在量词理解，由求解时在常量字母表上枚举实现。
    """
    reasoner = reasoner or TableauReasoner(kb.sigma, settings)
    if instances is None:
        instances = reference_instances(kb, q.reference, reasoner)
    engine = DatalogEngine(kb.with_clauses([q.clause]), settings, reasoner)
    x = q.distinguished
    substitutions = tuple(Substitution({x: Constant(a)}) for a in instances
                          if engine.answer_ground_query(_label_query(q, a)))
    return AnswerSet(q, substitutions)


def covers_interpretations(h: OQuery, k: KnowledgeBase, o: Observation,
                           settings: Optional[Settings] = None) -> bool:
    """从解释中学习的覆盖：K ∪ 𝒜_i ∪ H ⊢ q(a_i)"""
    kb = k.with_facts(o.facts).with_clauses([h.clause])
    return DatalogEngine(kb, settings).answer_ground_query(Clause(None, (o.label,)))


def covers_entailment(h: OQuery, k: KnowledgeBase, o: Clause,
                      settings: Optional[Settings] = None) -> bool:
    """从蕴涵中学习的覆盖：K ∪ body(o) ∪ H ⊢ head(o)"""
    if o.head is None or o.head.predicate != h.clause.head.predicate:
        return False
    kb = k.with_facts(o.body).with_clauses([h.clause])
    if o.constraints:
        kb = kb.with_sigma(kb.sigma.with_assertions(ground_constraints(o.constraints)))
    return DatalogEngine(kb, settings).answer_ground_query(Clause(None, (o.head,)))


def support(q: OQuery, kb: KnowledgeBase, settings: Optional[Settings] = None,
            reasoner: Optional[TableauReasoner] = None) -> Fraction:
    """supp(Q, ℬ) = |answerset(Q)| / |answerset(Q_t)|"""
    reasoner = reasoner or TableauReasoner(kb.sigma, settings)
    instances = reference_instances(kb, q.reference, reasoner)
    trivial = OQuery.trivial(q.reference, q.clause.head.predicate)
    total = len(answer_set(kb, trivial, settings, reasoner, instances))
    if total == 0:
        raise ReferenceConceptError(f"参考概念 {q.reference} 没有实例，支持度无定义")
    return Fraction(len(answer_set(kb, q, settings, reasoner, instances)), total)


def format_percent(value: Fraction) -> str:
    """保留一位小数（截断），如 4/15 → '26.6 %'"""
    tenths = (value.numerator * 1000) // value.denominator
    return f"{tenths // 10}.{tenths % 10} %"
