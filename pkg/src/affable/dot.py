"""Graphviz DOT rendering of diagrams, one rank per level."""

from __future__ import annotations

from affable.diagram import BratteliDiagram, Subdiagram

HIGHLIGHT = 'color="red", penwidth=2'


def _node(level: int, v: str) -> str:
    return f'"{level}:{v}"'


def emit_dot(d: BratteliDiagram, highlight: Subdiagram | None = None, name: str = "bratteli") -> str:
    lines = [f"digraph {name} {{", "  rankdir=TB;", "  node [shape=circle, fontsize=10];"]
    for n in range(d.depth + 1):
        nodes = " ".join(f'{_node(n, v)} [label="{v}"];' for v in d.vertices(n))
        lines.append(f"  {{ rank=same; {nodes} }}")
    for n in range(1, d.depth + 1):
        marked = highlight.edge_ids(n) if highlight is not None else frozenset()
        for e in d.edges(n):
            style = f", {HIGHLIGHT}" if e.id in marked else ""
            lines.append(f'  {_node(n - 1, e.source)} -> {_node(n, e.range)} [label="{e.id}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def count_dot(text: str) -> tuple[int, int, int]:
    """(nodes, edges, highlighted edges) in text produced by `emit_dot`."""
    nodes = sum(line.count("[label=") for line in text.splitlines() if "rank=same" in line)
    edge_lines = [line for line in text.splitlines() if " -> " in line]
    return nodes, len(edge_lines), sum(HIGHLIGHT in line for line in edge_lines)
