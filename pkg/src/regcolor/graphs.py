"""Core graph and coloring types: validation, metrics, node-order preprocessing."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

# Run-time size cap shared by generators and the corpus pipeline. The packed
# sample format additionally caps at 100 nodes (see graph_io.PACK_MAX_NODES).
DEFAULT_MAX_NODES = 100

# A coloring is a plain tuple of positive integer colors, one per node.
Coloring = tuple[int, ...]


class Graph:
    """Immutable simple undirected graph on nodes 0..n-1.

    Stored as a dense boolean adjacency matrix (symmetric, zero diagonal).
    Each row is also cached as a Python int bitmask (bit j set iff node j is
    adjacent), LSB-first; the solvers and the sample packer both build on it.
    """

    __slots__ = ("_adj", "_masks")

    def __init__(self, adjacency) -> None:
        adj = np.asarray(adjacency, dtype=bool)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ValueError(f"adjacency must be a square matrix, got shape {adj.shape}")
        if adj.shape[0] < 1:
            raise ValueError("a graph needs at least one node")
        if bool(np.diagonal(adj).any()):
            raise ValueError("self-loops are not allowed")
        if not np.array_equal(adj, adj.T):
            raise ValueError("adjacency must be symmetric")
        adj = adj.copy()
        adj.setflags(write=False)
        self._adj = adj
        packed = np.packbits(adj, axis=1, bitorder="little")
        self._masks = tuple(int.from_bytes(row.tobytes(), "little") for row in packed)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Graph":
        adj = np.zeros((n, n), dtype=bool)
        for u, v in edges:
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={n}")
            if u == v:
                raise ValueError(f"self-loop at node {u}")
            adj[u, v] = adj[v, u] = True
        return cls(adj)

    @property
    def n(self) -> int:
        return self._adj.shape[0]

    @property
    def m(self) -> int:
        return int(self._adj.sum()) // 2

    @property
    def adjacency(self) -> np.ndarray:
        """Read-only n x n boolean adjacency matrix."""
        return self._adj

    def neighbor_mask(self, v: int) -> int:
        """Neighbors of v as an int bitmask, bit j = adjacency[v][j]."""
        return self._masks[v]

    def neighbors(self, v: int) -> list[int]:
        return np.flatnonzero(self._adj[v]).tolist()

    def degree(self, v: int) -> int:
        return self._masks[v].bit_count()

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self._adj[u, v])

    def edges(self) -> list[tuple[int, int]]:
        """All edges as (u, v) with u < v, in lexicographic order."""
        iu, ju = np.nonzero(np.triu(self._adj, 1))
        return list(zip(iu.tolist(), ju.tolist()))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self._adj, other._adj)

    __hash__ = None  # mutable-equality semantics; not hashable

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class ColoringReport:
    """Validity report for a coloring: distinct colors used and conflicting edges."""

    colors_used: int
    invalid_edges: tuple[tuple[int, int], ...]
    invalid_fraction: float

    @property
    def is_proper(self) -> bool:
        return not self.invalid_edges


def validate_coloring(g: Graph, colors: Sequence[int]) -> ColoringReport:
    """Check a coloring edge by edge; report every edge whose endpoints match.

    Accepts any sequence of positive integer colors of length g.n (the input
    need not be proper, and repaired colorings may use values above g.n).
    Invalid edges come out as (u, v) with u < v in lexicographic order, which
    is the iteration order the correction pass relies on.
    """
    if len(colors) != g.n:
        raise ValueError(f"coloring has length {len(colors)}, graph has {g.n} nodes")
    for v, c in enumerate(colors):
        if int(c) != c or c < 1:
            raise ValueError(f"color of node {v} must be a positive integer, got {c!r}")
    invalid = tuple((u, v) for u, v in g.edges() if colors[u] == colors[v])
    m = g.m
    fraction = len(invalid) / m if m > 0 else 0.0
    return ColoringReport(
        colors_used=len(set(colors)),
        invalid_edges=invalid,
        invalid_fraction=fraction,
    )


def bfs_permutation(g: Graph, start: int) -> tuple[int, ...]:
    """Breadth-first visit order from `start`; ties and leftovers by ascending id.

    Nodes unreachable from `start` (other components) are appended afterwards
    in ascending id order, so the result is always a bijection on 0..n-1.
    """
    if not 0 <= start < g.n:
        raise ValueError(f"start node {start} out of range for n={g.n}")
    seen = [False] * g.n
    seen[start] = True
    order = [start]
    queue = deque([start])
    while queue:
        v = queue.popleft()
        for u in g.neighbors(v):  # ascending id
            if not seen[u]:
                seen[u] = True
                order.append(u)
                queue.append(u)
    order.extend(v for v in range(g.n) if not seen[v])
    return tuple(order)


def apply_permutation(g: Graph, perm: Sequence[int]) -> Graph:
    """Relabel nodes: old node i becomes node perm[i] in the returned graph."""
    p = _check_permutation(perm, g.n)
    new_adj = np.zeros_like(g.adjacency)
    new_adj[np.ix_(p, p)] = g.adjacency
    return Graph(new_adj)


def invert_permutation(perm: Sequence[int]) -> tuple[int, ...]:
    p = _check_permutation(perm, len(perm))
    inv = [0] * len(p)
    for i, target in enumerate(p):
        inv[target] = i
    return tuple(inv)


def _check_permutation(perm: Sequence[int], n: int) -> list[int]:
    p = [int(x) for x in perm]
    if len(p) != n or sorted(p) != list(range(n)):
        raise ValueError(f"not a permutation of 0..{n - 1}: {perm!r}")
    return p
