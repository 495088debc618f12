"""Category-level network association graphs from a narrative matrix.

Topics are grouped into user-supplied categories; edge weight between two
categories is the sum of the matrix cells they cover. Exports are
deterministic (lexicographic node/edge order) in DOT and JSON.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .index import NarrativeMatrix

FORMATS = ("dot", "json")


class CategoryError(ValueError):
    """Raised for category maps that do not cover the matrix topics."""


@dataclass(frozen=True)
class CategoryMap:
    topic_to_category: dict[str, str]
    keywords: dict[str, list[str]] = field(default_factory=dict)  # display only

    @classmethod
    def load(cls, path) -> "CategoryMap":
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
        categories = obj.get("categories")
        if not isinstance(categories, dict):
            raise CategoryError("category map must carry a 'categories' object")
        keywords = obj.get("keywords", {})
        return cls(topic_to_category=dict(categories), keywords=dict(keywords))


@dataclass(frozen=True)
class CategoryGraph:
    nodes: tuple[str, ...]
    edges: dict[tuple[str, str], float]  # directed; self-edges permitted


def aggregate_categories(matrix: NarrativeMatrix, cmap: CategoryMap) -> CategoryGraph:
    """Sum matrix cells into directed category-to-category edge weights."""
    for topic in matrix.topics:
        if topic not in cmap.topic_to_category:
            raise CategoryError(f"topic {topic!r} has no category mapping")
    edges: dict[tuple[str, str], float] = {}
    for (src, dst) in sorted(matrix.cells):
        key = (cmap.topic_to_category[src], cmap.topic_to_category[dst])
        edges[key] = edges.get(key, 0.0) + matrix.cells[(src, dst)]
    nodes = tuple(sorted({cmap.topic_to_category[t] for t in matrix.topics}))
    return CategoryGraph(nodes=nodes, edges=edges)


def _penwidths(edges: dict[tuple[str, str], float]) -> dict[tuple[str, str], float]:
    if not edges:
        return {}
    weights = edges.values()
    lo, hi = min(weights), max(weights)
    if hi == lo:
        return {k: 8.0 for k in edges}
    return {k: 1.0 + 7.0 * (w - lo) / (hi - lo) for k, w in edges.items()}


def export_graph(graph: CategoryGraph, min_weight: float = 0.0, format: str = "dot") -> str:
    """Render the graph, dropping edges below min_weight.

    Pen widths scale linearly with weight into [1, 8] over the kept edges.
    Output is byte-deterministic for a given graph.
    """
    if min_weight < 0:
        raise ValueError("min_weight must be >= 0")
    if format not in FORMATS:
        raise ValueError(f"unknown format {format!r}; expected one of {FORMATS}")
    kept = {k: w for k, w in sorted(graph.edges.items()) if w >= min_weight}
    if format == "json":
        return json.dumps(
            {
                "nodes": list(graph.nodes),
                "edges": [
                    {"src": src, "dst": dst, "weight": kept[(src, dst)]}
                    for (src, dst) in sorted(kept)
                ],
            },
            ensure_ascii=False,
            indent=2,
            sort_keys=True,
        ) + "\n"
    widths = _penwidths(kept)
    lines = ["digraph narratives {"]
    for node in graph.nodes:
        lines.append(f'  "{node}";')
    for (src, dst) in sorted(kept):
        lines.append(
            f'  "{src}" -> "{dst}" [weight={kept[(src, dst)]:.9f}, '
            f"penwidth={widths[(src, dst)]:.3f}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"
