"""Training-corpus generation: random graphs labeled by the exact solver.

Graph parameters (n, p, per-graph seed) are all drawn up front from the
master seed, so the corpus is reproducible regardless of how the labeling
work is scheduled. Labeling fans out across processes; results are gathered
by graph index, and graphs whose exact solve times out are skipped in the
output CSV but recorded in the manifest.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .exact import STATUS_EXACT, chromatic_number
from .gen import GnpParams, gnp
from .graph_io import SampleRow, row_from_graph


@dataclass(frozen=True)
class CorpusSpec:
    count: int
    n_min: int
    n_max: int
    p_min: float = 0.05
    p_max: float = 0.95
    seed: int = 0
    timeout_ms: float = 10_000.0
    max_nodes: int = 100

    def __post_init__(self) -> None:
        if self.count < 0:
            raise ValueError(f"count must be >= 0, got {self.count}")
        if not 1 <= self.n_min <= self.n_max <= self.max_nodes:
            raise ValueError(
                f"need 1 <= n_min <= n_max <= max_nodes, got "
                f"{self.n_min}..{self.n_max} (max_nodes={self.max_nodes})"
            )
        if not 0.0 <= self.p_min <= self.p_max <= 1.0:
            raise ValueError(f"need 0 <= p_min <= p_max <= 1, got {self.p_min}..{self.p_max}")


def _label_one(task: tuple[int, int, float, int, float, int]) -> tuple[int, Optional[SampleRow], dict]:
    index, n, p, seed, timeout_ms, max_nodes = task
    g = gnp(GnpParams(n=n, p=p, seed=seed), max_nodes=max_nodes)
    started = time.monotonic()
    result = chromatic_number(g, timeout_ms=timeout_ms)
    solve_ms = (time.monotonic() - started) * 1000.0
    record = {
        "id": index,
        "n": n,
        "p": p,
        "seed": seed,
        "status": result.status,
        "chromatic_number": result.chromatic_number,
        "solve_ms": round(solve_ms, 3),
    }
    if result.status != STATUS_EXACT:
        return index, None, record
    row = row_from_graph(g, result.coloring, max_nodes=max_nodes, optimal_k=result.chromatic_number)
    return index, row, record


def generate_labeled_corpus(
    spec: CorpusSpec, jobs: int = 1
) -> tuple[list[SampleRow], dict]:
    """Generate and exactly label `spec.count` G(n, p) graphs.

    Returns (rows, manifest). The manifest records every attempted graph,
    including the timed-out ones that are absent from the rows.
    """
    rng = np.random.default_rng(spec.seed)
    ns = rng.integers(spec.n_min, spec.n_max + 1, size=spec.count)
    ps = rng.uniform(spec.p_min, spec.p_max, size=spec.count)
    seeds = rng.integers(0, 1 << 62, size=spec.count)
    tasks = [
        (i, int(ns[i]), float(ps[i]), int(seeds[i]), spec.timeout_ms, spec.max_nodes)
        for i in range(spec.count)
    ]

    results: list[tuple[int, Optional[SampleRow], dict]] = []
    if jobs <= 1 or spec.count <= 1:
        results = [_label_one(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_label_one, tasks, chunksize=4))
    results.sort(key=lambda item: item[0])

    rows = [row for _, row, _ in results if row is not None]
    records = [record for _, _, record in results]
    manifest = {
        "spec": {
            "count": spec.count,
            "n_min": spec.n_min,
            "n_max": spec.n_max,
            "p_min": spec.p_min,
            "p_max": spec.p_max,
            "seed": spec.seed,
            "timeout_ms": spec.timeout_ms,
            "max_nodes": spec.max_nodes,
        },
        "labeled": len(rows),
        "timed_out": spec.count - len(rows),
        "graphs": records,
    }
    return rows, manifest
