"""Exact chromatic number and optimal colorings via DSATUR-ordered branch and bound.

Used to label the training corpus and as evaluation ground truth. Exact
coloring gets slow beyond roughly 75 nodes, so a timeout is a first-class
outcome: a timed-out solve still returns a proper coloring, just without the
optimality proof.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Optional

from .graphs import Coloring, Graph
from .heuristics import dsatur

BRUTE_FORCE_MAX_NODES = 10

STATUS_EXACT = "exact"
STATUS_TIMED_OUT = "timed_out"

# How often the searches look at the clock, in visited nodes.
_TICK_INTERVAL = 256


class SearchOutcome(Enum):
    FOUND = "found"          # a proper coloring with <= k colors exists (and is returned)
    EXHAUSTED = "exhausted"  # the search space was exhausted: no such coloring
    TIMEOUT = "timeout"      # the deadline hit first; nothing was proven


@dataclass(frozen=True)
class ExactResult:
    chromatic_number: int
    coloring: Coloring
    status: str  # STATUS_EXACT or STATUS_TIMED_OUT

    @property
    def is_exact(self) -> bool:
        return self.status == STATUS_EXACT


def max_clique_lower_bound(g: Graph, deadline: Optional[float] = None) -> int:
    """Size of a large clique, found by branch and bound within the deadline.

    Any clique is a chromatic lower bound, so running out of time merely
    degrades to the best clique found so far (at worst the greedy one).
    `deadline` is a time.monotonic() instant.
    """
    n = g.n
    masks = [g.neighbor_mask(v) for v in range(n)]

    # Greedy warm start: high-degree vertices first.
    best = 0
    clique_mask = 0
    for v in sorted(range(n), key=lambda v: (-masks[v].bit_count(), v)):
        if clique_mask & ~masks[v] == 0:
            clique_mask |= 1 << v
            best += 1
    best = max(best, 1)

    tick = 0
    aborted = False

    def expand(size: int, cand: int) -> None:
        nonlocal best, tick, aborted
        while cand:
            tick += 1
            if deadline is not None and tick % _TICK_INTERVAL == 0:
                if time.monotonic() > deadline:
                    aborted = True
            if aborted:
                return
            if size + cand.bit_count() <= best:
                return
            bit = cand & -cand
            cand ^= bit
            v = bit.bit_length() - 1
            if size + 1 > best:
                best = size + 1
            sub = cand & masks[v]
            if sub:
                expand(size + 1, sub)

    expand(0, (1 << n) - 1)
    return best


def k_colorable(
    g: Graph, k: int, deadline: Optional[float] = None
) -> tuple[SearchOutcome, Optional[Coloring]]:
    """Decide whether g has a proper coloring with at most k colors.

    DSATUR-ordered backtracking: branch on an uncolored vertex of maximum
    saturation (ties: higher degree, then lower id), trying the already-used
    colors in ascending value and then at most one fresh color. Fresh colors
    are introduced in canonical order (used + 1), which fixes the first
    branched vertex to color 1 and removes the color-permutation symmetry.

    Returns (FOUND, coloring), (EXHAUSTED, None), or (TIMEOUT, None).
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    n = g.n
    masks = [g.neighbor_mask(v) for v in range(n)]
    degrees = [m.bit_count() for m in masks]
    neighbor_ids = [g.neighbors(v) for v in range(n)]

    colors = [0] * n
    nbr_bits = [0] * n  # bitmask of colors among each vertex's colored neighbors
    tick = 0

    def search(colored: int, used: int) -> SearchOutcome:
        nonlocal tick
        if colored == n:
            return SearchOutcome.FOUND
        tick += 1
        if deadline is not None and tick % _TICK_INTERVAL == 0:
            if time.monotonic() > deadline:
                return SearchOutcome.TIMEOUT
        best = -1
        best_key = (-1, -1, 0)
        for v in range(n):
            if colors[v] == 0:
                key = (nbr_bits[v].bit_count(), degrees[v], -v)
                if key > best_key:
                    best_key = key
                    best = v
        v = best

        def assign(c: int) -> list[int]:
            colors[v] = c
            bit = 1 << (c - 1)
            touched = []
            for u in neighbor_ids[v]:
                if colors[u] == 0 and not nbr_bits[u] & bit:
                    nbr_bits[u] |= bit
                    touched.append(u)
            return touched

        def unassign(c: int, touched: list[int]) -> None:
            bit = 1 << (c - 1)
            for u in touched:
                nbr_bits[u] &= ~bit
            colors[v] = 0

        avail = ~nbr_bits[v] & ((1 << used) - 1)
        while avail:
            low = avail & -avail
            avail ^= low
            c = low.bit_length()
            touched = assign(c)
            outcome = search(colored + 1, used)
            if outcome is SearchOutcome.FOUND:
                return outcome
            unassign(c, touched)
            if outcome is SearchOutcome.TIMEOUT:
                return outcome
        if used < k:
            c = used + 1
            touched = assign(c)
            outcome = search(colored + 1, used + 1)
            if outcome is SearchOutcome.FOUND:
                return outcome
            unassign(c, touched)
            if outcome is SearchOutcome.TIMEOUT:
                return outcome
        return SearchOutcome.EXHAUSTED

    outcome = search(0, 0)
    if outcome is SearchOutcome.FOUND:
        return outcome, tuple(colors)
    return outcome, None


def chromatic_number(g: Graph, timeout_ms: float = 60_000.0) -> ExactResult:
    """Compute the chromatic number with an optimal coloring, or a timed-out bound.

    Strategy: DSATUR gives an upper bound U (and the incumbent coloring), a
    clique gives a lower bound L, then k-colorability is tested downward from
    U-1 until either some k is refuted (exact answer k+1) or the incumbent
    meets L (exact answer L). A timeout returns the incumbent as an upper
    bound with status "timed_out".
    """
    start = time.monotonic()
    deadline = start + timeout_ms / 1000.0

    incumbent = dsatur(g)
    upper = len(set(incumbent))

    # The clique search gets a slice of the budget; it only sharpens the bound.
    clique_deadline = min(deadline, start + 0.1 * (timeout_ms / 1000.0))
    lower = max_clique_lower_bound(g, deadline=clique_deadline)

    k = upper - 1
    while k >= lower:
        outcome, coloring = k_colorable(g, k, deadline=deadline)
        if outcome is SearchOutcome.FOUND:
            incumbent = coloring
            k = len(set(coloring)) - 1
        elif outcome is SearchOutcome.EXHAUSTED:
            return ExactResult(len(set(incumbent)), incumbent, STATUS_EXACT)
        else:
            return ExactResult(len(set(incumbent)), incumbent, STATUS_TIMED_OUT)
    # Descent hit the clique bound: the incumbent is provably optimal.
    return ExactResult(len(set(incumbent)), incumbent, STATUS_EXACT)


def brute_force_chromatic(g: Graph) -> int:
    """Independent oracle: exhaustively enumerate all colorings of a tiny graph.

    Enumerates every assignment up to color renaming (canonical form: node 0
    gets color 1, each later node at most one more than the running maximum)
    and returns the fewest colors over the proper ones. Deliberately has no
    pruning or bounds so it shares no machinery with the real solver.
    """
    if g.n > BRUTE_FORCE_MAX_NODES:
        raise ValueError(f"brute force capped at {BRUTE_FORCE_MAX_NODES} nodes, got {g.n}")
    edges = g.edges()
    best = g.n
    for assignment in _canonical_assignments(g.n):
        if all(assignment[u] != assignment[v] for u, v in edges):
            best = min(best, max(assignment))
            if best == 1:
                break
    return best


def _canonical_assignments(n: int):
    colors = [0] * n
    colors[0] = 1

    def rec(i: int, mx: int):
        if i == n:
            yield tuple(colors)
            return
        for c in range(1, mx + 2):
            colors[i] = c
            yield from rec(i + 1, max(mx, c))

    yield from rec(1, 1)
