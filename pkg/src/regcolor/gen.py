"""Random graph generators for training corpora and robustness tests.

Both generators run on numpy's PCG64 (`np.random.default_rng(seed)`), so a
corpus is regenerable byte-for-byte from its seeds.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import DEFAULT_MAX_NODES, Graph


@dataclass(frozen=True)
class GnpParams:
    """Erdős–Rényi G(n, p) parameters: every pair is an edge with probability p."""

    n: int
    p: float
    seed: int

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"n must be >= 1, got {self.n}")
        if not 0.0 <= self.p <= 1.0:
            raise ValueError(f"p must lie in [0, 1], got {self.p}")


def gnp(params: GnpParams, max_nodes: int = DEFAULT_MAX_NODES) -> Graph:
    """Sample G(n, p): one uniform draw per unordered pair, in lexicographic order."""
    if params.n > max_nodes:
        raise ValueError(f"n={params.n} exceeds max_nodes={max_nodes}")
    n = params.n
    rng = np.random.default_rng(params.seed)
    adj = np.zeros((n, n), dtype=bool)
    iu = np.triu_indices(n, 1)
    adj[iu] = rng.random(iu[0].size) < params.p
    adj |= adj.T
    return Graph(adj)


def scale_free(n: int, m: int, seed: int, max_nodes: int = DEFAULT_MAX_NODES) -> Graph:
    """Preferential-attachment (Barabási–Albert) graph.

    Starts from a clique on m+1 nodes; every further node attaches to m
    distinct existing nodes picked with probability proportional to current
    degree. Always connected, with exactly (m+1)m/2 + m(n-m-1) edges.
    """
    if n > max_nodes:
        raise ValueError(f"n={n} exceeds max_nodes={max_nodes}")
    if not 1 <= m < n:
        raise ValueError(f"need 1 <= m < n, got m={m}, n={n}")
    rng = np.random.default_rng(seed)
    edges: list[tuple[int, int]] = []
    # Degree-proportional sampling via the repeated-endpoints list.
    repeated: list[int] = []
    for u in range(m + 1):
        for v in range(u + 1, m + 1):
            edges.append((u, v))
        repeated.extend([u] * m)
    for v in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(repeated[int(rng.integers(0, len(repeated)))])
        for t in sorted(targets):
            edges.append((v, t))
            repeated.append(t)
        repeated.extend([v] * m)
    return Graph.from_edges(n, edges)
