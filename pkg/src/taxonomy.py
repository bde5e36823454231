"""
概念分类体系构建模块
把频繁模式集 𝓕 按外延聚类成以 C_ref 为根的 DAG，并用偏置选择内涵
"""

import json
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Tuple

import networkx as nx
from pydantic import BaseModel, ConfigDict, Field
from rich.console import Console

from .clauses import Clause, KnowledgeBase, OQuery, Variable, canonical_text
from .config import Settings, settings as default_settings
from .discovery import DiscoveryResult, LanguageSpec, PatternEntry
from .generality import mgd, msd

console = Console(stderr=True)


class SearchBias(str, Enum):
    """内涵选择准则"""
    MGD = "mgd"   # 最一般描述
    MSD = "msd"   # 最特殊描述


class BiasSpec(BaseModel):
    """语言偏置（最小粒度、变量是否全部受约束）与搜索偏置"""
    model_config = ConfigDict(frozen=True)

    min_granularity: int = Field(default=1, ge=1)
    all_vars_constrained: bool = True
    search_bias: SearchBias = SearchBias.MGD


@dataclass
class TaxonomyNode:
    """输出概念 𝒞：内涵 int(𝒞) 为子句集，外延 ext(𝒞) 为个体集"""
    id: int
    intension: Tuple[Clause, ...]
    extension: Tuple[str, ...]
    level: int
    depth: int
    patterns: List[int] = field(default_factory=list)

    @property
    def label(self) -> str:
        return f"C-{self.id}{self.level}{self.depth}"

    def intension_text(self) -> List[str]:
        return [canonical_text(c) for c in self.intension]


class ConceptTaxonomy:
    """概念分类 DAG 𝒢（边为外延严格包含关系的传递归约）"""

    def __init__(self):
        self.graph = nx.DiGraph()
        self.nodes: Dict[int, TaxonomyNode] = {}
        self._by_extension: Dict[frozenset, int] = {}

    @property
    def root(self) -> Optional[TaxonomyNode]:
        return self.nodes.get(1)

    def find(self, extension: Iterable[str]) -> Optional[TaxonomyNode]:
        node_id = self._by_extension.get(frozenset(extension))
        return self.nodes.get(node_id) if node_id is not None else None

    def add_node(self, node: TaxonomyNode):
        """添加节点并重新推导边"""
        self.nodes[node.id] = node
        self._by_extension[frozenset(node.extension)] = node.id
        self.graph.add_node(node.id)
        self._rebuild_edges()

    def _rebuild_edges(self):
        order = nx.DiGraph()
        order.add_nodes_from(self.nodes)
        for u, a in self.nodes.items():
            ext_a = set(a.extension)
            for v, b in self.nodes.items():
                if u != v and set(b.extension) < ext_a:
                    order.add_edge(u, v)
        reduced = nx.transitive_reduction(order)
        self.graph.remove_edges_from(list(self.graph.edges()))
        self.graph.add_edges_from(reduced.edges())

    def edges(self) -> List[Tuple[TaxonomyNode, TaxonomyNode]]:
        return [(self.nodes[u], self.nodes[v]) for u, v in sorted(self.graph.edges())]

    def ordered_nodes(self) -> List[TaxonomyNode]:
        return [self.nodes[i] for i in sorted(self.nodes)]

    def get_stats(self) -> Dict:
        """获取分类体系统计信息"""
        sizes: Dict[int, List[int]] = {}
        for node in self.nodes.values():
            sizes.setdefault(node.level, []).append(len(node.extension))
        return {
            "节点数": self.graph.number_of_nodes(),
            "边数": self.graph.number_of_edges(),
            "各层外延规模": {level: sorted(v, reverse=True) for level, v in sorted(sizes.items())},
        }

    def to_networkx(self) -> nx.DiGraph:
        """带标量属性的副本，可直接写 GraphML"""
        g = nx.DiGraph()
        for node in self.ordered_nodes():
            g.add_node(node.label,
                       intension="\n".join(node.intension_text()),
                       extension=", ".join(node.extension),
                       size=len(node.extension),
                       level=node.level,
                       depth=node.depth)
        for parent, child in self.edges():
            g.add_edge(parent.label, child.label)
        return g

    def save_graphml(self, path: Path):
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        nx.write_graphml(self.to_networkx(), path)
        console.print(f"[green]分类体系已保存到 {path}[/green]")

    def to_json(self) -> str:
        data = {
            "nodes": [{"label": n.label, "id": n.id, "level": n.level, "depth": n.depth,
                       "intension": n.intension_text(), "extension": list(n.extension)}
                      for n in self.ordered_nodes()],
            "edges": [[p.label, c.label] for p, c in self.edges()],
        }
        return json.dumps(data, ensure_ascii=False, indent=2)


def passes_language_bias(q: OQuery, bias: BiasSpec, spec: LanguageSpec) -> bool:
    """C_ref 之外的约束概念都在 l ≥ minG 的某层；必要时要求体中变量全部受约束"""
    x = q.distinguished
    for c in q.clause.constraints:
        if c.term == x and c.concept.name == spec.reference:
            continue
        level = spec.level_of(c.concept.name)
        if level is None or level < bias.min_granularity:
            return False
    if bias.all_vars_constrained:
        constrained = {c.term for c in q.clause.constraints}
        for atom in q.body:
            if any(isinstance(t, Variable) and t not in constrained for t in atom.args):
                return False
    return True


def insert_concept(g: ConceptTaxonomy, entry: PatternEntry, kb: KnowledgeBase, bias: BiasSpec,
                   settings: Optional[Settings] = None) -> ConceptTaxonomy:
    """外延已存在时按搜索偏置更新内涵，否则新增节点"""
    settings = settings or default_settings
    existing = g.find(entry.answers)
    if existing is None:
        node = TaxonomyNode(len(g.nodes) + 1, (entry.query.clause,), tuple(sorted(entry.answers)),
                            entry.level, entry.depth, [entry.id])
        g.add_node(node)
        return g
    combine = mgd if bias.search_bias is SearchBias.MGD else msd
    existing.intension = combine([existing.intension, (entry.query.clause,)], kb, settings)
    existing.patterns.append(entry.id)
    return g


def build_taxonomy(discovered: DiscoveryResult, kb: KnowledgeBase, spec: LanguageSpec, bias: BiasSpec,
                   settings: Optional[Settings] = None) -> ConceptTaxonomy:
    """按 (l, k, 规范文本) 顺序把通过语言偏置的频繁模式插入 𝒢"""
    if bias.min_granularity > spec.max_granularity:
        raise ValueError(f"minG={bias.min_granularity} 超过 maxG={spec.max_granularity}")
    g = ConceptTaxonomy()
    insert_concept(g, discovered.trivial, kb, bias, settings)
    ordered = sorted((e for e in discovered.frequent if e is not discovered.trivial),
                     key=lambda e: (e.level, e.depth, e.canonical))
    for entry in ordered:
        if passes_language_bias(entry.query, bias, spec):
            insert_concept(g, entry, kb, bias, settings)

    stats = g.get_stats()
    console.print(f"[green]✓ 分类体系: {stats['节点数']} 个概念, {stats['边数']} 条边[/green]")
    return g
