"""Color correction: the deterministic post-pass that repairs invalid edges.

The model may give both endpoints of an edge the same color. For each such
edge <n1, n2>, taken in lexicographic order, the pass first tries to recolor
n1 with an already-allocated color absent from n1's whole neighborhood, then
the same for n2, and only if both fail mints a fresh color (max in use + 1)
for n1. Fresh colors join the palette and are reusable by later edges.

A recolored node ends up with a color no neighbor holds, so a repaired edge
stays repaired and no new conflict can appear: the output is always proper.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .graphs import Coloring, Graph, validate_coloring


@dataclass(frozen=True)
class CorrectionStats:
    initial_invalid_edges: int
    recolored_by_reuse: int
    fresh_colors_added: int
    final_colors_used: int


def color_correct(g: Graph, coloring: Sequence[int]) -> tuple[Coloring, CorrectionStats]:
    """Repair all invalid edges; returns the proper coloring and bookkeeping stats.

    Deterministic: invalid edges are enumerated once at entry as (u, v) pairs
    with u < v in lexicographic order, reuse candidates are scanned in
    ascending color value, and an edge already fixed by an earlier repair is
    skipped.
    """
    report = validate_coloring(g, coloring)
    colors = list(coloring)
    palette = sorted(set(colors))  # stays sorted: fresh colors are maxima
    reused = 0
    fresh = 0

    for n1, n2 in report.invalid_edges:
        if colors[n1] != colors[n2]:
            continue  # an earlier repair already fixed this edge
        conflict = colors[n1]
        if _reuse(g, colors, palette, n1, conflict):
            reused += 1
        elif _reuse(g, colors, palette, n2, conflict):
            reused += 1
        else:
            new_color = palette[-1] + 1
            palette.append(new_color)
            colors[n1] = new_color
            fresh += 1

    stats = CorrectionStats(
        initial_invalid_edges=len(report.invalid_edges),
        recolored_by_reuse=reused,
        fresh_colors_added=fresh,
        final_colors_used=len(set(colors)),
    )
    return tuple(colors), stats


def _reuse(g: Graph, colors: list[int], palette: list[int], node: int, conflict: int) -> bool:
    """Recolor `node` with the smallest palette color its neighborhood misses."""
    neighbor_colors = {colors[u] for u in g.neighbors(node)}
    for candidate in palette:
        if candidate != conflict and candidate not in neighbor_colors:
            colors[node] = candidate
            return True
    return False
