"""Classical coloring heuristics: first-fit greedy, DSATUR, and RLF.

DSATUR doubles as the baseline allocator in comparisons and as the upper
bound seed for the exact solver. All tie-breaks are pinned so runs are
deterministic: saturation, then degree, then lowest node id.
"""

from __future__ import annotations

from typing import Sequence

from .graphs import Coloring, Graph, _check_permutation


def _lowest_missing_color(used_bits: int) -> int:
    c = 1
    while used_bits & 1:
        used_bits >>= 1
        c += 1
    return c


def greedy_sequential(g: Graph, order: Sequence[int]) -> Coloring:
    """First-fit coloring along `order`: smallest color unused by neighbors."""
    perm = _check_permutation(order, g.n)
    colors = [0] * g.n
    for v in perm:
        used = 0
        for u in g.neighbors(v):
            if colors[u]:
                used |= 1 << (colors[u] - 1)
        colors[v] = _lowest_missing_color(used)
    return tuple(colors)


def dsatur(g: Graph) -> Coloring:
    """DSATUR: repeatedly color the vertex with most distinct neighbor colors.

    Ties go to the higher-degree vertex, then the lower id. Each vertex gets
    the smallest color absent from its neighborhood, so the result is proper
    by construction and uses at most max-degree + 1 colors.
    """
    n = g.n
    colors = [0] * n
    sat_bits = [0] * n  # bitmask of colors used by already-colored neighbors
    degrees = [g.degree(v) for v in range(n)]
    for _ in range(n):
        best = -1
        best_key = (-1, -1, 0)
        for v in range(n):
            if colors[v] == 0:
                key = (sat_bits[v].bit_count(), degrees[v], -v)
                if key > best_key:
                    best_key = key
                    best = v
        c = _lowest_missing_color(sat_bits[best])
        colors[best] = c
        bit = 1 << (c - 1)
        for u in g.neighbors(best):
            if colors[u] == 0:
                sat_bits[u] |= bit
    return tuple(colors)


def rlf(g: Graph) -> Coloring:
    """Recursive Largest First: peel off one maximal independent color class at a time.

    Each class is seeded with the highest-degree uncolored vertex; candidates
    are then added greedily, preferring the one with most neighbors already
    forbidden for this class (ties: lowest id).
    """
    n = g.n
    colors = [0] * n
    uncolored = set(range(n))
    color = 0
    while uncolored:
        color += 1
        seed = max(uncolored, key=lambda v: (g.degree(v), -v))
        cls = {seed}
        forbidden = set(g.neighbors(seed)) & uncolored
        candidates = uncolored - cls - forbidden
        while candidates:
            pick = max(
                candidates,
                key=lambda v: (len(forbidden.intersection(g.neighbors(v))), -v),
            )
            cls.add(pick)
            forbidden |= set(g.neighbors(pick)) & uncolored
            candidates = candidates - {pick} - set(g.neighbors(pick))
        for v in cls:
            colors[v] = color
        uncolored -= cls
    return tuple(colors)
