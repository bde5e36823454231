"""
分类体系可视化模块
生成交互式 HTML 视图与 Markdown 摘要
"""

from pathlib import Path

from rich.console import Console

from .taxonomy import ConceptTaxonomy

console = Console(stderr=True)

# 粒度层对应的颜色
LEVEL_COLORS = {
    1: "#e94560",
    2: "#4ecdc4",
    3: "#f9ca24",
}


def visualize_taxonomy(
    taxonomy: ConceptTaxonomy,
    output_path: str = "output/taxonomy.html",
    height: str = "800px",
    width: str = "100%",
):
    """
    生成交互式分类体系视图

    Args:
        taxonomy: 概念分类体系
        output_path: 输出 HTML 文件路径
        height: 图高度
        width: 图宽度
    """
    from pyvis.network import Network

    net = Network(
        height=height,
        width=width,
        bgcolor="#1a1a2e",
        font_color="white",
        directed=True
    )

    for node in taxonomy.ordered_nodes():
        title = "\n".join(node.intension_text()) + "\n{" + ", ".join(node.extension) + "}"
        net.add_node(
            node.label,
            label=f"{node.label} ({len(node.extension)})",
            title=title,
            color=LEVEL_COLORS.get(node.level, "#95a5a6"),
            size=15 + len(node.extension),
            level=node.level,
        )

    for parent, child in taxonomy.edges():
        net.add_edge(parent.label, child.label, arrows="to")

    # 自上而下的层次布局
    net.set_options("""
    {
        "layout": {
            "hierarchical": {
                "enabled": true,
                "direction": "UD",
                "sortMethod": "directed"
            }
        },
        "nodes": {
            "shape": "box",
            "font": {"size": 14}
        },
        "physics": {"enabled": false},
        "interaction": {
            "hover": true,
            "navigationButtons": true
        }
    }
    """)

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    net.save_graph(str(output_path))
    console.print(f"[green]可视化分类体系已保存到: {output_path}[/green]")
    console.print("[dim]用浏览器打开查看交互式视图[/dim]")


def generate_summary_report(taxonomy: ConceptTaxonomy, output_path: str = "output/taxonomy.md") -> str:
    """生成分类体系摘要报告"""
    stats = taxonomy.get_stats()

    report = f"""# 概念分类体系报告

## 统计摘要

- **概念数**: {stats['节点数']}
- **边数**: {stats['边数']}

## 各层外延规模

| 层 | 概念数 | 外延规模 |
|----|--------|----------|
"""
    for level, sizes in stats["各层外延规模"].items():
        report += f"| {level} | {len(sizes)} | {', '.join(str(s) for s in sizes)} |\n"

    report += "\n## 概念\n\n"
    for node in taxonomy.ordered_nodes():
        report += f"- **{node.label}** ({len(node.extension)}): `{node.intension_text()[0]}`"
        if len(node.intension) > 1:
            report += f" 等 {len(node.intension)} 条子句"
        report += "\n"

    output_path = Path(output_path)
    output_path.parent.mkdir(parents=True, exist_ok=True)
    output_path.write_text(report, encoding="utf-8")
    console.print(f"[green]报告已保存到: {output_path}[/green]")
    return report
