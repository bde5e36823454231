"""
报告输出
文本、制表符分隔记录（pandas）与 DOT 三种格式；报告中不含任何控制台修饰
"""

import sys
from pathlib import Path
from typing import Iterable, List, Optional

import pandas as pd

from .discovery import DiscoveryResult, PatternEntry
from .engine import QueryAnswer, format_percent
from .taxonomy import ConceptTaxonomy


def records_to_text(frames: Iterable[pd.DataFrame]) -> str:
    """多张表依次输出，中间空一行"""
    parts = [frame.to_csv(sep="\t", index=False, lineterminator="\n") for frame in frames]
    return "\n".join(parts)


def write_report(text: str, output: Optional[Path] = None):
    if output is None:
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    output.write_text(text, encoding="utf-8", newline="\n")


# ==================== 查询 ====================

def query_text(answers: List[QueryAnswer], ground: bool) -> str:
    if not answers:
        return "no\n"
    lines: List[str] = []
    for a in answers:
        if ground:
            lines.append("yes")
        else:
            lines.append(str(a.answer))
        for cs in a.witnesses[:1]:
            lines.append(f"  witness: {cs}")
    return "\n".join(lines) + "\n"


def query_records(answers: List[QueryAnswer]) -> str:
    frame = pd.DataFrame(
        [{"answer": str(a.answer), "witness": str(a.witnesses[0]) if a.witnesses else "{}"} for a in answers],
        columns=["answer", "witness"],
    )
    return records_to_text([frame])


# ==================== 发现 ====================

def _support_fields(e: PatternEntry) -> dict:
    return {
        "support": f"{e.support.numerator}/{e.support.denominator}",
        "percent": format_percent(e.support),
    }


def discovery_records(result: DiscoveryResult) -> str:
    rows = []
    for e in result.entries:
        rows.append({
            "id": e.id,
            "level": e.level,
            "depth": e.depth,
            "pattern": e.canonical,
            **_support_fields(e),
            "frequent": "yes" if e.frequent else "no",
            "parents": ";".join(str(p) for p in e.parents),
        })
    patterns = pd.DataFrame(rows, columns=["id", "level", "depth", "pattern", "support", "percent",
                                           "frequent", "parents"])
    summary = pd.DataFrame(
        [{"level": level, "evaluated": c.evaluated, "pruned": c.pruned, "frequent": c.frequent}
         for level, c in sorted(result.counters.items())],
        columns=["level", "evaluated", "pruned", "frequent"],
    )
    return records_to_text([patterns, summary])


def discovery_text(result: DiscoveryResult) -> str:
    lines = [f"frequent patterns: {len(result.frequent)} of {result.candidates} candidates "
             f"({result.pruned} pruned before evaluation)"]
    for level, c in sorted(result.counters.items()):
        lines.append(f"  level {level}: evaluated {c.evaluated}, pruned {c.pruned}, frequent {c.frequent}")
    stages = sorted({(e.level, e.depth) for e in result.frequent})
    for level, depth in stages:
        lines.append("")
        lines.append(f"F[{level}][{depth}]")
        for e in sorted(result.stage(level, depth), key=lambda x: x.canonical):
            lines.append(f"  #{e.id} {e.canonical}  supp = {e.support} ({format_percent(e.support)})")
    return "\n".join(lines) + "\n"


# ==================== 分类体系 ====================

def taxonomy_text(g: ConceptTaxonomy) -> str:
    lines: List[str] = []
    for node in g.ordered_nodes():
        lines.append(f"{node.label} in F[{node.level}][{node.depth}]")
        for clause in node.intension_text():
            lines.append(f"  {clause}")
        lines.append("  {" + ", ".join(node.extension) + "}")
        lines.append("")
    lines.append("edges:")
    for parent, child in g.edges():
        lines.append(f"  {parent.label} -> {child.label}")
    return "\n".join(lines) + "\n"


def taxonomy_records(g: ConceptTaxonomy) -> str:
    nodes = pd.DataFrame(
        [{"label": n.label, "index": n.id, "level": n.level, "depth": n.depth, "size": len(n.extension),
          "extension": " ".join(n.extension), "intension": " | ".join(n.intension_text())}
         for n in g.ordered_nodes()],
        columns=["label", "index", "level", "depth", "size", "extension", "intension"],
    )
    edges = pd.DataFrame([{"parent": p.label, "child": c.label} for p, c in g.edges()],
                         columns=["parent", "child"])
    return records_to_text([nodes, edges])


def _dot_escape(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def taxonomy_dot(g: ConceptTaxonomy) -> str:
    lines = ["digraph taxonomy {", "  rankdir=TB;", "  node [shape=box, fontname=\"Helvetica\"];"]
    for node in g.ordered_nodes():
        label = "\\n".join([node.label] + [_dot_escape(c) for c in node.intension_text()]
                           + ["{" + ", ".join(node.extension) + "}"])
        lines.append(f'  "{node.label}" [label="{label}"];')
    for parent, child in g.edges():
        lines.append(f'  "{parent.label}" -> "{child.label}";')
    lines.append("}")
    return "\n".join(lines) + "\n"
