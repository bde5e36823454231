"""
输入文件解析
本体（.onto）、约束 Datalog 程序（.dlp）与偏置规格（.bias）三种文本格式，
所有诊断信息都带行列位置
"""

from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

from lark import Lark, Token, Transformer, Tree, v_args
from lark.exceptions import UnexpectedCharacters, UnexpectedEOF, UnexpectedInput, UnexpectedToken
from pydantic import ValidationError

from .clauses import Atom, Clause, Constant, Constraint, KnowledgeBase, Term, Variable
from .discovery import LanguageSpec, Thresholds
from .errors import Diagnostic, DiagnosticsError
from .schema import (
    BOTTOM, TOP, All, And, Atomic, ConceptAssertion, Equiv, Not, Ontology, Or, RoleAssertion,
    Some, Subsume,
)
from .taxonomy import BiasSpec, SearchBias

GRAMMAR_DIR = Path(__file__).parent / "grammars"


@lru_cache(maxsize=None)
def _parser(name: str) -> Lark:
    grammar = (GRAMMAR_DIR / f"{name}.lark").read_text(encoding="utf-8")
    return Lark(grammar, parser="lalr", lexer="contextual", propagate_positions=True)


def _syntax_error(e: UnexpectedInput, source: str) -> Diagnostic:
    if isinstance(e, UnexpectedEOF):
        message = "文件意外结束"
    elif isinstance(e, UnexpectedToken):
        expected = ", ".join(sorted(e.expected)[:8])
        message = f"意外的记号 {str(e.token)!r}，期望 {expected}"
    elif isinstance(e, UnexpectedCharacters):
        message = f"无法识别的字符 {e.char!r}"
    else:
        message = "语法错误"
    line = getattr(e, "line", 0) or 0
    column = getattr(e, "column", 0) or 0
    return Diagnostic("error", max(line, 0), max(column, 0), message, source)


def _parse(name: str, text: str, source: str) -> Tree:
    try:
        return _parser(name).parse(text)
    except UnexpectedInput as e:
        raise DiagnosticsError([_syntax_error(e, source)]) from None


def _at(node, source: str, severity: str, message: str) -> Diagnostic:
    if isinstance(node, Token):
        line, column = node.line or 0, node.column or 0
    else:
        meta = node.meta
        line, column = (0, 0) if meta.empty else (meta.line, meta.column)
    return Diagnostic(severity, line, column, message, source)


def _unquote(token: Token) -> str:
    return str(token)[1:-1] if token.type == "QUOTED" else str(token)


# ==================== 本体 ====================

@v_args(inline=True)
class _ConceptBuilder(Transformer):
    def top(self):
        return TOP

    def bot(self):
        return BOTTOM

    def atomic(self, name):
        return Atomic(str(name))

    def not_(self, c):
        return Not(c)

    def and_(self, a, b):
        return And(a, b)

    def or_(self, a, b):
        return Or(a, b)

    def all_(self, role, c):
        return All(str(role), c)

    def some_(self, role, c):
        return Some(str(role), c)


def parse_ontology(text: str, source: str = "<ontology>") -> Ontology:
    """解析本体文本；未声明或重复声明的名字报告为带位置的诊断"""
    tree = _parse("ontology", text, source)
    builder = _ConceptBuilder()
    diagnostics: List[Diagnostic] = []
    concepts: Dict[str, None] = {}
    roles: Dict[str, Tree] = {}
    individuals: Dict[str, None] = {}
    axioms = []
    assertions = []
    uses: List[Tuple[Tree, object]] = []

    for stmt in tree.children:
        kind = stmt.data
        if kind == "concept_decl":
            name = str(stmt.children[0])
            if name in concepts:
                diagnostics.append(_at(stmt, source, "warning", f"概念 {name} 重复声明"))
            concepts.setdefault(name)
        elif kind == "role_decl":
            name = str(stmt.children[0])
            if name in roles:
                diagnostics.append(_at(stmt, source, "warning", f"角色 {name} 重复声明"))
            roles.setdefault(name, stmt)
        elif kind == "individual_decl":
            individuals.setdefault(_unquote(stmt.children[0].children[0]))
        elif kind in ("equiv", "subsume"):
            left, right = (builder.transform(c) for c in stmt.children)
            axiom = Equiv(left, right) if kind == "equiv" else Subsume(left, right)
            axioms.append(axiom)
            uses.append((stmt, left))
            uses.append((stmt, right))
        elif kind == "concept_assertion":
            name = _unquote(stmt.children[0].children[0])
            concept = builder.transform(stmt.children[1])
            assertions.append(ConceptAssertion(name, concept))
            uses.append((stmt, concept))
            uses.append((stmt, ("individual", name)))
        elif kind == "role_assertion":
            a = _unquote(stmt.children[0].children[0])
            b = _unquote(stmt.children[1].children[0])
            role = str(stmt.children[2])
            assertions.append(RoleAssertion(a, b, role))
            uses.append((stmt, ("individual", a)))
            uses.append((stmt, ("individual", b)))
            uses.append((stmt, ("role", role)))

    for name in sorted(set(concepts) & set(roles)):
        diagnostics.append(_at(roles[name], source, "error", f"{name} 同时声明为概念和角色"))

    for stmt, used in uses:
        if isinstance(used, tuple):
            kind, name = used
            known = individuals if kind == "individual" else roles
            if name not in known:
                label = "个体" if kind == "individual" else "角色"
                diagnostics.append(_at(stmt, source, "error", f"未声明的{label} {name}"))
            continue
        for name in sorted(used.concept_names() - set(concepts)):
            diagnostics.append(_at(stmt, source, "error", f"未声明的概念 {name}"))
        for name in sorted(used.role_names() - set(roles)):
            diagnostics.append(_at(stmt, source, "error", f"未声明的角色 {name}"))

    if any(d.severity == "error" for d in diagnostics):
        raise DiagnosticsError(diagnostics)
    return Ontology(tuple(concepts), tuple(roles), tuple(individuals), tuple(axioms), tuple(assertions))


# ==================== 程序 ====================

def _term(node: Tree) -> Term:
    token = node.children[0]
    if node.data == "number_term":
        return Constant(str(token), numeric=True)
    if node.data == "quoted_term":
        return Constant(_unquote(token))
    text = str(token)
    if text[0].isupper() or text[0] == "_":
        return Variable(text)
    return Constant(text)


def _atom(node: Tree) -> Atom:
    name = str(node.children[0])
    args = tuple(_term(c) for c in node.children[1:] if isinstance(c, Tree))
    return Atom(name, args)


def _body(node: Optional[Tree]) -> Tuple[Tuple[Atom, ...], Tuple[Constraint, ...]]:
    if node is None:
        return (), ()
    builder = _ConceptBuilder()
    atoms: List[Atom] = []
    constraints: List[Constraint] = []
    for part in node.children:
        if not isinstance(part, Tree):
            continue
        if part.data == "atoms":
            atoms = [_atom(a) for a in part.children]
        elif part.data == "constraints":
            constraints = [Constraint(_term(c.children[0]), builder.transform(c.children[1]))
                           for c in part.children]
    return tuple(atoms), tuple(constraints)


@dataclass
class Program:
    """解析结果：子句与查询（按出现顺序）"""
    clauses: List[Clause] = field(default_factory=list)
    queries: List[Clause] = field(default_factory=list)


def parse_program(text: str, source: str = "<program>") -> Program:
    """解析约束 Datalog 程序；同一谓词元数不一致时报错"""
    tree = _parse("program", text, source)
    program = Program()
    arities: Dict[str, int] = {}
    diagnostics: List[Diagnostic] = []

    for item in tree.children:
        if item.data == "clause":
            head = _atom(item.children[0])
            body, constraints = _body(item.children[1] if len(item.children) > 1 else None)
            clause = Clause(head, body, constraints)
            program.clauses.append(clause)
        else:
            body, constraints = _body(item.children[0])
            clause = Clause(None, body, constraints)
            program.queries.append(clause)
        for atom in clause.atoms():
            known = arities.setdefault(atom.predicate, atom.arity)
            if known != atom.arity:
                diagnostics.append(_at(item, source, "error",
                                       f"谓词 {atom.predicate} 的元数不一致: {known} 与 {atom.arity}"))
        if clause.head is not None and not clause.body and not clause.constraints and not clause.head.is_ground():
            diagnostics.append(_at(item, source, "error", f"事实必须是基的: {clause}"))

    if diagnostics:
        raise DiagnosticsError(diagnostics)
    return program


def parse_clause(text: str, source: str = "<clause>") -> Clause:
    """解析单个子句或查询（末尾的 . 可省略）"""
    text = text.strip()
    if not text.endswith("."):
        text += "."
    tree = _parse("program", text, source)
    if len(tree.children) != 1:
        where = tree.children[1] if len(tree.children) > 1 else None
        message = f"期望一个子句，得到 {len(tree.children)} 个"
        raise DiagnosticsError([_at(where, source, "error", message) if where is not None
                                else Diagnostic("error", 1, 1, message, source)])
    program = parse_program(text, source)
    return (program.clauses + program.queries)[0]


def parse_query(text: str, source: str = "<query>") -> Clause:
    """解析查询；省略 ?- 时自动补上"""
    stripped = text.strip()
    if not stripped.startswith("?-"):
        stripped = "?- " + stripped
    clause = parse_clause(stripped, source)
    return clause


# ==================== 偏置 ====================

@dataclass(frozen=True)
class BiasFile:
    """偏置文件的三部分"""
    language: LanguageSpec
    thresholds: Thresholds
    bias: BiasSpec

    def to_text(self) -> str:
        """按 [language] / [thresholds] / [search] 三段输出，可被 parse_bias 读回"""
        language = self.language
        lines = ["[language]", f"reference = {language.reference}",
                 "predicates = " + ", ".join(f"{p}/{n}" for p, n in language.predicates.items())]
        lines += [f"level.{i} = " + ", ".join(names) for i, names in enumerate(language.levels, start=1)]
        lines += [f"mode.{p} = " + ", ".join(s or "_" for s in slots) for p, slots in language.modes.items()]
        lines += [f"maxD = {language.max_depth}", f"maxG = {language.max_granularity}", "", "[thresholds]"]
        lines += [f"minsup.{i} = {_number_text(v)}" for i, v in enumerate(self.thresholds.minsup, start=1)]
        lines += ["", "[search]", f"minG = {self.bias.min_granularity}",
                  f"all_vars_constrained = {'true' if self.bias.all_vars_constrained else 'false'}",
                  f"bias = {self.bias.search_bias.value}"]
        return "\n".join(lines) + "\n"


_KNOWN_KEYS = {"reference", "predicates", "maxD", "maxG", "minG", "all_vars_constrained", "bias"}
_INDEXED_KEYS = {"level", "minsup"}
_SECTIONS = {"language", "thresholds", "search", "bias"}
# 缺少某个键时，诊断指向它所属的段
_SECTION_OF = {"reference": "language", "predicates": "language", "level": "language", "minsup": "thresholds"}


def _number_text(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    rest = value.denominator
    for p in (2, 5):
        while rest % p == 0:
            rest //= p
    if rest != 1:
        return f"{value.numerator}/{value.denominator}"
    return format(Decimal(value.numerator) / Decimal(value.denominator), "f")


def _value(node: Tree):
    token = node.children[0]
    if node.data == "number":
        return Fraction(str(token))
    if node.data == "quoted":
        return _unquote(token)
    if node.data == "predicate":
        name, arity = str(token).split("/")
        return (name, int(arity))
    return str(token)


def parse_bias(text: str, source: str = "<bias>", kb: Optional[KnowledgeBase] = None) -> BiasFile:
    """
    解析偏置规格

    必需键：reference、predicates、level.1..level.N、minsup.1..minsup.N；
    可选键：maxD（默认 5）、maxG（默认为层数）、minG（默认 1）、
    all_vars_constrained（默认 true）、bias（mgd | msd，默认 mgd）、
    mode.<谓词>（各参数的概念槽，_ 表示不限）。
    给出 kb 时还检查名字是否出现在 Σ 与 Π 中。
    """
    tree = _parse("bias", text if text.endswith("\n") else text + "\n", source)
    diagnostics: List[Diagnostic] = []
    entries: Dict[str, Tuple[Token, list]] = {}
    headers: Dict[str, Tree] = {}

    for item in tree.children:
        if item.data == "header":
            name = str(item.children[0])
            if name not in _SECTIONS:
                diagnostics.append(_at(item, source, "error", f"未知的段 [{name}]"))
            headers.setdefault("search" if name == "bias" else name, item)
            continue
        key = item.children[0]
        values = [_value(v) for v in item.children[1:]]
        base, _, suffix = str(key).partition(".")
        if str(key) in entries:
            diagnostics.append(_at(key, source, "error", f"键 {key} 重复"))
        elif base in _INDEXED_KEYS and suffix.isdigit():
            entries[str(key)] = (key, values)
        elif base == "mode" and suffix and not suffix.isdigit():
            entries[str(key)] = (key, values)
        elif str(key) in _KNOWN_KEYS:
            entries[str(key)] = (key, values)
        else:
            diagnostics.append(_at(key, source, "error", f"未知的键 {key}"))

    last_line = max(1, len(text.splitlines()))

    def missing(key: str, message: str) -> Diagnostic:
        header = headers.get(_SECTION_OF.get(key.split(".")[0], ""))
        if header is not None:
            return _at(header, source, "error", message)
        return Diagnostic("error", last_line, 1, message, source)

    def scalar(name: str, default=None, required: bool = False):
        if name not in entries:
            if required:
                diagnostics.append(missing(name, f"缺少必需的键 {name}"))
            return default
        token, values = entries[name]
        if len(values) != 1:
            diagnostics.append(_at(token, source, "error", f"键 {name} 只接受一个值"))
            return default
        return values[0]

    def indexed(prefix: str) -> Dict[int, Tuple[Token, list]]:
        found = {}
        for key, (token, values) in entries.items():
            if key.startswith(prefix + "."):
                found[int(key.split(".")[1])] = (token, values)
        return found

    reference = scalar("reference", required=True)
    predicates: Dict[str, int] = {}
    if "predicates" not in entries:
        diagnostics.append(missing("predicates", "缺少必需的键 predicates"))
    else:
        token, values = entries["predicates"]
        for v in values:
            if isinstance(v, tuple):
                predicates[v[0]] = v[1]
            else:
                diagnostics.append(_at(token, source, "error", f"谓词必须写成 name/arity: {v}"))

    def integer(name: str, default: int) -> int:
        value = scalar(name, default=Fraction(default))
        if not isinstance(value, Fraction) or value.denominator != 1 or value < 1:
            diagnostics.append(_at(entries[name][0], source, "error", f"{name} 必须是正整数: {value}"))
            return default
        return int(value)

    levels_found = indexed("level")
    n_levels = integer("maxG", len(levels_found) or 1)
    levels: List[List[str]] = []
    for i in range(1, n_levels + 1):
        if i not in levels_found:
            diagnostics.append(missing("level", f"缺少粒度层 level.{i}"))
            continue
        levels.append([str(v) for v in levels_found[i][1]])
    for i, (token, _) in sorted(levels_found.items()):
        if i < 1 or i > n_levels:
            diagnostics.append(_at(token, source, "error", f"粒度层 level.{i} 超出 1..{n_levels}"))

    minsup_found = indexed("minsup")
    minsup: List[Fraction] = []
    for i in range(1, n_levels + 1):
        if i not in minsup_found:
            diagnostics.append(missing("minsup", f"缺少最小支持度 minsup.{i}"))
            continue
        token, values = minsup_found[i]
        value = values[0] if values else None
        if not isinstance(value, Fraction) or not (0 < value <= 1):
            diagnostics.append(_at(token, source, "error", f"minsup.{i} 必须在 (0, 1] 内: {value}"))
            continue
        minsup.append(value)
    for i, (token, _) in sorted(minsup_found.items()):
        if i < 1 or i > n_levels:
            diagnostics.append(_at(token, source, "error", f"最小支持度 minsup.{i} 超出 1..{n_levels}"))

    modes: Dict[str, List[Optional[str]]] = {}
    for key, (token, values) in entries.items():
        if not key.startswith("mode."):
            continue
        name = key.split(".", 1)[1]
        if any(not isinstance(v, str) for v in values):
            diagnostics.append(_at(token, source, "error", f"{key} 的参数槽必须是概念名或 _"))
        elif predicates.get(name) != len(values):
            diagnostics.append(_at(token, source, "error", f"{key} 有 {len(values)} 个参数槽，与谓词 {name} 的元数不符"))
        else:
            modes[name] = [None if v == "_" else v for v in values]

    max_d = integer("maxD", 5)
    min_g = integer("minG", 1)
    all_vars = scalar("all_vars_constrained", default="true")
    search = scalar("bias", default="mgd")
    if all_vars not in ("true", "false"):
        token = entries["all_vars_constrained"][0]
        diagnostics.append(_at(token, source, "error", f"all_vars_constrained 必须是 true 或 false: {all_vars}"))
    if search not in {b.value for b in SearchBias}:
        diagnostics.append(_at(entries["bias"][0], source, "error", f"bias 必须是 mgd 或 msd: {search}"))
    if min_g > n_levels:
        token = entries["minG"][0]
        diagnostics.append(_at(token, source, "error", f"minG={min_g} 超过 maxG={n_levels}"))

    if kb is not None and not diagnostics:
        diagnostics.extend(_check_names(reference, predicates, levels, modes, kb, source, entries))

    if diagnostics:
        raise DiagnosticsError(diagnostics)

    try:
        language = LanguageSpec(reference=reference, predicates=predicates, levels=levels,
                                max_depth=int(max_d), modes=modes)
        thresholds = Thresholds(minsup=minsup)
        bias = BiasSpec(min_granularity=int(min_g), all_vars_constrained=(all_vars == "true"),
                        search_bias=search)
    except (ValidationError, TypeError, ValueError) as e:
        raise DiagnosticsError([missing("reference", f"偏置规格无效: {e}")]) from None
    return BiasFile(language, thresholds, bias)


def _check_names(reference: str, predicates: Dict[str, int], levels: Sequence[Sequence[str]],
                 modes: Dict[str, List[Optional[str]]], kb: KnowledgeBase, source: str,
                 entries) -> List[Diagnostic]:
    """𝒜 中的名字出现在 Π 中，Γ^l、参数槽与 C_ref 出现在 Σ 中"""
    problems: List[Diagnostic] = []
    concepts = set(kb.sigma.concepts)
    known_predicates = kb.predicates()
    if reference not in concepts:
        problems.append(_at(entries["reference"][0], source, "error", f"参考概念 {reference} 不在本体中"))
    for name, arity in predicates.items():
        if known_predicates.get(name) != arity:
            problems.append(_at(entries["predicates"][0], source, "error", f"谓词 {name}/{arity} 不在程序中"))
    for i, names in enumerate(levels, start=1):
        for name in names:
            if name not in concepts:
                problems.append(_at(entries[f"level.{i}"][0], source, "error", f"概念 {name} 不在本体中"))
    for predicate, slots in modes.items():
        for name in slots:
            if name is not None and name not in concepts:
                problems.append(_at(entries[f"mode.{predicate}"][0], source, "error", f"参数槽概念 {name} 不在本体中"))
    return problems


# ==================== 文件加载 ====================

def load_ontology(path: Path) -> Ontology:
    path = Path(path)
    return parse_ontology(path.read_text(encoding="utf-8"), str(path))


def load_program(path: Path) -> Program:
    path = Path(path)
    return parse_program(path.read_text(encoding="utf-8"), str(path))


def load_kb(onto_path: Path, program_path: Path) -> KnowledgeBase:
    sigma = load_ontology(onto_path)
    return KnowledgeBase(sigma, tuple(load_program(program_path).clauses))


def load_bias(path: Path, kb: Optional[KnowledgeBase] = None) -> BiasFile:
    path = Path(path)
    return parse_bias(path.read_text(encoding="utf-8"), str(path), kb)
