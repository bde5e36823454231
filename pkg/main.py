#!/usr/bin/env python
# -*- coding: utf-8 -*-
"""
AL-log Concept Refinement - 本体概念精化工具
主入口文件

用法:
    python main.py validate <onto> <prog>                 检查安全条件
    python main.py check <onto>                           一致性检查
    python main.py query <onto> <prog> "<query>"          约束查询
    python main.py compare <onto> <prog> <c1> <c2>        ℬ-包含比较
    python main.py coverage <onto> <prog> <hyp> <obs>     覆盖测试
    python main.py discover <onto> <prog> <bias>          频繁模式发现
    python main.py taxonomy <onto> <prog> <bias>          概念分类体系
"""

import sys
import argparse
from pathlib import Path
from typing import List, Optional

from rich.console import Console
from rich.markup import escape

console = Console(stderr=True)


def show_banner():
    """显示欢迎横幅"""
    banner = """
╔═══════════════════════════════════════════════════════════════╗
║                                                               ║
║   🧩 AL-log Concept Refinement                               ║
║   ────────────────────────────────────                        ║
║   ALC 本体 + 约束 Datalog：频繁模式发现与概念分类              ║
║                                                               ║
╚═══════════════════════════════════════════════════════════════╝
    """
    console.print(banner, style="bold cyan")


def _emit(text: str, args):
    from src.reports import write_report
    write_report(text, Path(args.output) if args.output else None)


def _trace_sink(settings):
    if not settings.output.trace:
        return None
    return lambda line: console.print(line, style="dim", markup=False, highlight=False)


def _load_kb(args):
    from src.parsers import load_kb
    return load_kb(Path(args.ontology), Path(args.program))


def cmd_validate(args, settings) -> int:
    """检查三条安全条件"""
    import pandas as pd
    from src.reports import records_to_text
    from src.validation import validate

    report = validate(_load_kb(args))
    if settings.output.format == "records":
        frame = pd.DataFrame([{"condition": v.condition, "location": v.location, "message": v.message}
                              for v in report.violations], columns=["condition", "location", "message"])
        _emit(records_to_text([frame]), args)
    else:
        _emit(report.to_text(), args)
    if report.ok:
        console.print("[green]✓ 知识库满足全部安全条件[/green]")
        return 0
    console.print(f"[red]✗ 发现 {len(report.violations)} 处违例[/red]")
    return 1


def cmd_check(args, settings) -> int:
    """本体一致性检查"""
    from src.parsers import load_ontology
    from src.tableau import TableauReasoner

    sigma = load_ontology(Path(args.ontology))
    result = TableauReasoner(sigma, settings, _trace_sink(settings)).check()
    if result.consistent:
        _emit("consistent\n" + result.witness.to_text(), args)
    else:
        _emit("inconsistent\n", args)
    return 0


def cmd_query(args, settings) -> int:
    """回答约束查询"""
    from src.engine import DatalogEngine
    from src.parsers import parse_query
    from src.reports import query_records, query_text

    kb = _load_kb(args)
    query = parse_query(args.query)
    engine = DatalogEngine(kb, settings, trace=_trace_sink(settings))
    answers = engine.answer_query(query)
    if settings.output.format == "records":
        _emit(query_records(answers), args)
    else:
        _emit(query_text(answers, ground=not query.variables()), args)
    return 0


def cmd_compare(args, settings) -> int:
    """ℬ-包含比较两个子句"""
    from src.generality import compare, find_subsumption
    from src.parsers import parse_clause

    kb = _load_kb(args)
    h1, h2 = parse_clause(args.clause1), parse_clause(args.clause2)
    outcome = compare(h1, h2, kb, settings)
    lines = [outcome.value]
    forward = find_subsumption(h1, h2, kb, settings)
    backward = find_subsumption(h2, h1, kb, settings)
    if forward is not None:
        lines.append(f"H1 >= H2: {forward}")
    if backward is not None:
        lines.append(f"H2 >= H1: {backward}")
    _emit("\n".join(lines) + "\n", args)
    return 0


def cmd_coverage(args, settings) -> int:
    """两种设定下的覆盖测试"""
    from src.clauses import Observation, OQuery
    from src.engine import covers_entailment, covers_interpretations
    from src.errors import Diagnostic, DiagnosticsError
    from src.parsers import parse_clause

    kb = _load_kb(args)
    try:
        hypothesis = OQuery(parse_clause(args.hypothesis, "<hypothesis>"))
        observed = parse_clause(args.observation, "<observation>")
        observation = Observation(observed.head, observed.body)
    except (ValueError, AttributeError) as e:
        raise DiagnosticsError([Diagnostic("error", 1, 1, str(e), "<argument>")]) from None

    if args.setting == "entailment":
        covered = covers_entailment(hypothesis, kb, observation.as_clause(), settings)
    else:
        covered = covers_interpretations(hypothesis, kb, observation, settings)
    _emit("covered\n" if covered else "not covered\n", args)
    return 0


def _discover(args, settings):
    from src.discovery import discover
    from src.parsers import load_bias
    from src.validation import validate

    kb = _load_kb(args)
    report = validate(kb)
    if not report.ok:
        for v in report.violations:
            console.print(f"[red]{escape(str(v))}[/red]", highlight=False)
        return kb, None, None
    bias_file = load_bias(Path(args.bias), kb)
    return kb, bias_file, discover(kb, bias_file.language, bias_file.thresholds, settings)


def show_discovery_stats(result):
    """各粒度层的候选统计"""
    from rich.table import Table

    table = Table(title="频繁模式发现")
    table.add_column("层", style="cyan")
    table.add_column("已评估", style="green")
    table.add_column("剪枝", style="yellow")
    table.add_column("频繁", style="magenta")
    for level, c in sorted(result.counters.items()):
        table.add_row(str(level), str(c.evaluated), str(c.pruned), str(c.frequent))
    console.print(table)


def cmd_discover(args, settings) -> int:
    """频繁 O-query 发现"""
    from src.reports import discovery_records, discovery_text

    kb, bias_file, result = _discover(args, settings)
    if result is None:
        return 1
    if settings.output.show_progress:
        show_discovery_stats(result)
    if settings.output.format == "records":
        _emit(discovery_records(result), args)
    else:
        _emit(discovery_text(result), args)
    return 0


def cmd_taxonomy(args, settings) -> int:
    """发现频繁模式并构建概念分类体系"""
    from src.owl_export import export_owl
    from src.reports import taxonomy_dot, taxonomy_records, taxonomy_text, write_report
    from src.errors import Diagnostic, DiagnosticsError
    from src.taxonomy import SearchBias, build_taxonomy

    kb, bias_file, result = _discover(args, settings)
    if result is None:
        return 1
    bias = bias_file.bias
    overrides = {}
    if args.min_g is not None:
        max_g = bias_file.language.max_granularity
        if not 1 <= args.min_g <= max_g:
            raise DiagnosticsError([Diagnostic("error", 1, 1, f"--min-g 必须在 1..{max_g} 内: {args.min_g}",
                                               "<argument>")])
        overrides["min_granularity"] = args.min_g
    if args.search_bias is not None:
        overrides["search_bias"] = SearchBias(args.search_bias)
    if overrides:
        bias = bias.model_copy(update=overrides)

    g = build_taxonomy(result, kb, bias_file.language, bias, settings)
    if settings.output.show_progress:
        from rich.panel import Panel
        stats = g.get_stats()
        console.print(Panel(
            f"概念数: {stats['节点数']}\n"
            f"边数: {stats['边数']}\n"
            f"偏置: minG={bias.min_granularity}, {bias.search_bias.value}",
            title="[bold green]概念分类体系[/bold green]", border_style="green"
        ))
    if settings.output.format == "records":
        _emit(taxonomy_records(g), args)
    else:
        _emit(taxonomy_text(g), args)

    if args.dot:
        write_report(taxonomy_dot(g), Path(args.dot))
    if args.owl:
        write_report(export_owl(kb.sigma, taxonomy=g), Path(args.owl))
    if args.graphml:
        g.save_graphml(Path(args.graphml))
    if args.html:
        from src.visualizer import visualize_taxonomy
        visualize_taxonomy(g, args.html)
    if args.summary:
        from src.visualizer import generate_summary_report
        generate_summary_report(g, args.summary)
    return 0


COMMANDS = {
    "validate": cmd_validate,
    "check": cmd_check,
    "query": cmd_query,
    "compare": cmd_compare,
    "coverage": cmd_coverage,
    "discover": cmd_discover,
    "taxonomy": cmd_taxonomy,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--max-depth", type=int, help="SLD 推导深度上限（默认 50）")
    common.add_argument("--tableau-cap", type=int, help="单次表推演节点上限（默认 10^6）")
    common.add_argument("--seedless", action="store_true", help="保留选项；本工具没有随机性")
    common.add_argument("--format", choices=["text", "records"], default="text", help="报告格式")
    common.add_argument("-v", "--trace", action="store_true", help="输出表推演规则轨迹")
    common.add_argument("--no-progress", action="store_true", help="不显示进度条")
    common.add_argument("-o", "--output", help="报告输出文件（默认标准输出）")

    parser = argparse.ArgumentParser(
        description="AL-log 本体概念精化工具",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
示例:
  python main.py validate data/mini_cia/mini_cia.onto data/mini_cia/mini_cia.dlp
  python main.py check data/cia/cia.onto
  python main.py query data/mini_cia/mini_cia.onto data/mini_cia/mini_cia.dlp "?- speaks('IR',L) & L:IndoEuropeanLanguage."
  python main.py taxonomy data/cia/cia.onto data/cia/cia.dlp data/cia/cia.bias --dot output/cia.dot
        """
    )

    subparsers = parser.add_subparsers(dest="command", help="可用命令")

    p = subparsers.add_parser("validate", parents=[common], help="检查知识库安全条件")
    p.add_argument("ontology", help="本体文件 (.onto)")
    p.add_argument("program", help="程序文件 (.dlp)")

    p = subparsers.add_parser("check", parents=[common], help="本体一致性检查")
    p.add_argument("ontology", help="本体文件 (.onto)")

    p = subparsers.add_parser("query", parents=[common], help="回答约束查询")
    p.add_argument("ontology", help="本体文件 (.onto)")
    p.add_argument("program", help="程序文件 (.dlp)")
    p.add_argument("query", help='查询，如 "?- speaks(X,Y) & Y:Language."')

    p = subparsers.add_parser("compare", parents=[common], help="ℬ-包含比较两个子句")
    p.add_argument("ontology", help="本体文件 (.onto)")
    p.add_argument("program", help="程序文件 (.dlp)")
    p.add_argument("clause1", help="子句 H1")
    p.add_argument("clause2", help="子句 H2")

    p = subparsers.add_parser("coverage", parents=[common], help="覆盖测试")
    p.add_argument("ontology", help="本体文件 (.onto)")
    p.add_argument("program", help="程序文件 (.dlp)")
    p.add_argument("hypothesis", help="假设 O-query")
    p.add_argument("observation", help="观察，写成 q(a) :- f1, ..., fn.")
    p.add_argument("--setting", choices=["interpretations", "entailment"], default="interpretations",
                   help="学习设定")

    for name, help_text in (("discover", "频繁 O-query 发现"), ("taxonomy", "构建概念分类体系")):
        p = subparsers.add_parser(name, parents=[common], help=help_text)
        p.add_argument("ontology", help="本体文件 (.onto)")
        p.add_argument("program", help="程序文件 (.dlp)")
        p.add_argument("bias", help="偏置规格文件 (.bias)")
        if name == "taxonomy":
            p.add_argument("--min-g", type=int, help="覆盖偏置文件中的 minG")
            p.add_argument("--search-bias", choices=["mgd", "msd"], help="覆盖偏置文件中的搜索偏置")
            p.add_argument("--dot", help="DOT 输出文件")
            p.add_argument("--owl", help="OWL (RDF/XML) 输出文件")
            p.add_argument("--graphml", help="GraphML 输出文件")
            p.add_argument("--html", help="交互式 HTML 输出文件")
            p.add_argument("--summary", help="Markdown 摘要输出文件")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """主函数"""
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command is None:
        parser.print_help(sys.stderr)
        return 1

    from src.config import Settings
    from src.errors import ALLogError, DiagnosticsError, ResourceLimitError

    settings = Settings.from_args(args)
    if settings.output.show_progress:
        show_banner()

    try:
        return COMMANDS[args.command](args, settings)
    except DiagnosticsError as e:
        for d in e.diagnostics:
            console.print(f"[red]{escape(str(d))}[/red]", highlight=False)
        return 1
    except ResourceLimitError as e:
        console.print(f"[red]资源上限: {escape(str(e))}[/red]", highlight=False)
        return 2
    except ALLogError as e:
        console.print(f"[red]错误: {escape(str(e))}[/red]", highlight=False)
        return 1
    except OSError as e:
        console.print(f"[red]无法读写文件: {escape(str(e))}[/red]", highlight=False)
        return 1


if __name__ == "__main__":
    sys.exit(main())
