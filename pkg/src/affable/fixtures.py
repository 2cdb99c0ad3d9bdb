"""Small named diagrams used throughout the tests, the demo and the CLI."""

from __future__ import annotations

from affable.diagram import BratteliDiagram, DiagramQuotient, Edge, STRICT_FULL, Subdiagram

ROOT = "v0"


def odometer(depth: int, width: int = 2) -> BratteliDiagram:
    """One vertex per level joined by `width` parallel edges named a, b, c, ..."""
    names = [chr(ord("a") + k) for k in range(width)]
    vertices = [[ROOT]] + [[f"o{n}"] for n in range(1, depth + 1)]
    edges = []
    for n in range(1, depth + 1):
        src = vertices[n - 1][0]
        edges.append([Edge(name, src, f"o{n}") for name in names])
    return BratteliDiagram(vertices, edges)


def odometer_half(d: BratteliDiagram) -> Subdiagram:
    """The subdiagram keeping only the first edge of every level."""
    return Subdiagram(d, [[d.edges(n)[0].id] for n in range(1, d.depth + 1)])


def two_branch_tree(depth: int) -> BratteliDiagram:
    """Two disjoint chains x_1, x_2, ... and y_1, y_2, ... below the root."""
    vertices = [[ROOT]] + [[f"x{n}", f"y{n}"] for n in range(1, depth + 1)]
    edges = []
    for n in range(1, depth + 1):
        sx, sy = (ROOT, ROOT) if n == 1 else (f"x{n - 1}", f"y{n - 1}")
        edges.append([Edge(f"ex{n}", sx, f"x{n}"), Edge(f"ey{n}", sy, f"y{n}")])
    return BratteliDiagram(vertices, edges)


def loop_then_chain(depth: int) -> BratteliDiagram:
    """Two parallel edges into z_1, then a single chain z_1, z_2, ..."""
    vertices = [[ROOT]] + [[f"z{n}"] for n in range(1, depth + 1)]
    edges = []
    for n in range(1, depth + 1):
        if n == 1:
            edges.append([Edge("l1", ROOT, "z1"), Edge("l2", ROOT, "z1")])
        else:
            edges.append([Edge(f"c{n}", f"z{n - 1}", f"z{n}")])
    return BratteliDiagram(vertices, edges)


def branch_collapse(depth: int) -> DiagramQuotient:
    """The quotient of the two-branch tree onto the loop-then-chain diagram."""
    tree, loop = two_branch_tree(depth), loop_then_chain(depth)
    vmaps = [{ROOT: ROOT}] + [{f"x{n}": f"z{n}", f"y{n}": f"z{n}"} for n in range(1, depth + 1)]
    emaps: list[dict[str, str]] = [{}]
    for n in range(1, depth + 1):
        if n == 1:
            emaps.append({"ex1": "l1", "ey1": "l2"})
        else:
            emaps.append({f"ex{n}": f"c{n}", f"ey{n}": f"c{n}"})
    return DiagramQuotient(tree, loop, tuple(vmaps), tuple(emaps), STRICT_FULL)


def complete_stationary(depth: int, width: int, multiplicity: int = 1) -> BratteliDiagram:
    """`width` vertices per level, every pair joined by `multiplicity` edges."""
    vertices = [[ROOT]] + [[f"u{k}" for k in range(width)] for _ in range(depth)]
    edges = []
    for n in range(1, depth + 1):
        level = []
        for a in vertices[n - 1]:
            for b in vertices[n]:
                for m in range(multiplicity):
                    level.append(Edge(f"{a}{b}_{m}" if n > 1 else f"{b}_{m}", a, b))
        edges.append(level)
    return BratteliDiagram(vertices, edges)
