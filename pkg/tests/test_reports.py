"""报告格式与可视化输出"""

import pytest

from src.discovery import discover
from src.engine import DatalogEngine
from src.parsers import parse_query
from src.reports import (
    discovery_records, discovery_text, query_records, query_text, records_to_text, taxonomy_dot,
    taxonomy_records, taxonomy_text, write_report,
)
from src.taxonomy import build_taxonomy
from src.visualizer import generate_summary_report


@pytest.fixture(scope="module")
def mini_result(mini_kb, mini_bias, quiet):
    return discover(mini_kb, mini_bias.language, mini_bias.thresholds, quiet)


@pytest.fixture(scope="module")
def mini_taxonomy(mini_result, mini_kb, mini_bias, quiet):
    return build_taxonomy(mini_result, mini_kb, mini_bias.language, mini_bias.bias, quiet)


def _answers(kb, text):
    return DatalogEngine(kb).answer_query(parse_query(text))


def test_query_text(mini_kb):
    assert query_text(_answers(mini_kb, "speaks('SA', L)"), ground=False) == "no\n"

    ground = query_text(_answers(mini_kb, "speaks('IR', 'Persian')"), ground=True)
    assert ground.splitlines()[0] == "yes"
    assert ground.splitlines()[1].startswith("  witness: {")

    lines = query_text(_answers(mini_kb, "speaks('IR', L) & L:IndoEuropeanLanguage"), ground=False).splitlines()
    assert lines[0] == "{L/'Persian'}"


def test_query_records(mini_kb):
    text = query_records(_answers(mini_kb, "speaks('IR', L) & L:IndoEuropeanLanguage"))
    header, row = text.splitlines()
    assert header == "answer\twitness"
    assert row.startswith("{L/'Persian'}\t{")


def test_records_are_separated_by_blank_line():
    import pandas as pd

    text = records_to_text([pd.DataFrame({"a": [1]}), pd.DataFrame({"b": [2]})])
    assert text == "a\n1\n\nb\n2\n"


def test_discovery_text(mini_result):
    lines = discovery_text(mini_result).splitlines()
    assert lines[0] == "frequent patterns: 6 of 8 candidates (3 pruned before evaluation)"
    assert lines[1] == "  level 1: evaluated 5, pruned 0, frequent 3"
    assert lines[2] == "  level 2: evaluated 3, pruned 3, frequent 3"
    assert "F[1][1]" in lines
    assert any("supp = 1 (100.0 %)" in line for line in lines)


def test_discovery_records(mini_result):
    patterns, summary = discovery_records(mini_result).split("\n\n")
    rows = patterns.splitlines()
    assert rows[0] == "id\tlevel\tdepth\tpattern\tsupport\tpercent\tfrequent\tparents"
    assert len(rows) == 1 + len(mini_result.entries)
    assert summary.splitlines() == ["level\tevaluated\tpruned\tfrequent", "1\t5\t0\t3", "2\t3\t3\t3"]


def test_taxonomy_text(mini_taxonomy):
    text = taxonomy_text(mini_taxonomy)
    first, second = mini_taxonomy.nodes[1], mini_taxonomy.nodes[2]
    assert f"{first.label} in F[{first.level}][{first.depth}]" in text
    assert "  {ARM, IR, SA}" in text
    assert "  {ARM, IR}" in text
    assert text.endswith(f"edges:\n  {first.label} -> {second.label}\n")


def test_taxonomy_records(mini_taxonomy):
    nodes, edges = taxonomy_records(mini_taxonomy).split("\n\n")
    assert nodes.splitlines()[0] == "label\tindex\tlevel\tdepth\tsize\textension\tintension"
    assert len(nodes.splitlines()) == 3
    assert edges.splitlines()[1] == f"{mini_taxonomy.nodes[1].label}\t{mini_taxonomy.nodes[2].label}"


def test_taxonomy_dot(mini_taxonomy):
    dot = taxonomy_dot(mini_taxonomy)
    assert dot.startswith("digraph taxonomy {\n")
    assert dot.endswith("}\n")
    first, second = mini_taxonomy.nodes[1], mini_taxonomy.nodes[2]
    assert f'  "{first.label}" -> "{second.label}";' in dot
    assert "\\n{ARM, IR}" in dot


def test_write_report_to_file(tmp_path):
    path = tmp_path / "nested" / "report.txt"
    write_report("yes\n", path)
    assert path.read_text(encoding="utf-8") == "yes\n"


def test_write_report_to_stdout(capsys):
    write_report("no\n")
    assert capsys.readouterr().out == "no\n"


def test_summary_report(mini_taxonomy, tmp_path):
    path = tmp_path / "taxonomy.md"
    report = generate_summary_report(mini_taxonomy, str(path))
    assert path.read_text(encoding="utf-8") == report
    assert "**概念数**: 2" in report
    assert f"**{mini_taxonomy.nodes[2].label}** (2)" in report


def test_html_view(mini_taxonomy, tmp_path):
    pytest.importorskip("pyvis")
    from src.visualizer import visualize_taxonomy

    path = tmp_path / "taxonomy.html"
    visualize_taxonomy(mini_taxonomy, str(path))
    html = path.read_text(encoding="utf-8")
    assert mini_taxonomy.nodes[1].label in html
