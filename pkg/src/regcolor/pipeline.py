"""End-to-end pipelines: hybrid coloring, test-set evaluation, dual-path compare.

The hybrid pipeline is model prediction followed by color correction, so its
output is proper by construction. Evaluation buckets each graph by how many
colors the hybrid uses beyond the exact optimum; comparison races the hybrid
against the DSATUR baseline (the stand-in for a production greedy allocator;
reports always say DSATUR) and feeds lost cases back into a training store.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional, Sequence

from filelock import FileLock

from .correction import CorrectionStats, color_correct
from .exact import STATUS_EXACT, chromatic_number
from .graph_io import SampleRow, row_from_graph, unpack_sample, write_csv
from .graphs import (
    Coloring,
    ColoringReport,
    Graph,
    apply_permutation,
    bfs_permutation,
    invert_permutation,
    validate_coloring,
)
from .heuristics import dsatur
from .model import ModelParams, predict_colors


@dataclass(frozen=True)
class HybridResult:
    """One graph through the hybrid pipeline: raw prediction, repair, stats."""

    before: Coloring
    report: ColoringReport          # validity of `before`
    after: Coloring
    stats: CorrectionStats

    @property
    def colors_before(self) -> int:
        return self.report.colors_used

    @property
    def colors_after(self) -> int:
        return self.stats.final_colors_used


def hybrid_color(
    models: Sequence[ModelParams] | ModelParams,
    g: Graph,
    bfs_start: Optional[int] = None,
) -> HybridResult:
    """Predict, then repair. With several models, keep the best corrected result.

    `bfs_start` optionally renumbers the nodes in breadth-first order from the
    given start before prediction (the colors are mapped back afterwards), a
    cheap way to present a structure-aware sequence to the model.
    """
    params_list = [models] if isinstance(models, ModelParams) else list(models)
    if not params_list:
        raise ValueError("need at least one model")
    best: Optional[HybridResult] = None
    for params in params_list:
        before = _predict(params, g, bfs_start)
        report = validate_coloring(g, before)
        after, stats = color_correct(g, before)
        candidate = HybridResult(before, report, after, stats)
        if best is None or candidate.colors_after < best.colors_after:
            best = candidate
    return best


def _predict(params: ModelParams, g: Graph, bfs_start: Optional[int]) -> Coloring:
    if bfs_start is None:
        return predict_colors(params, g)
    # order[k] is the k-th visited node; the model should see it at step k.
    perm = invert_permutation(bfs_permutation(g, bfs_start))
    reordered = apply_permutation(g, perm)
    colors = predict_colors(params, reordered)
    return tuple(colors[perm[v]] for v in range(g.n))


@dataclass(frozen=True)
class EvalBuckets:
    """Test-set summary: how close the hybrid gets to the exact optimum."""

    total_graphs: int
    pct_invalid_edges_mean: float
    pct_match_optimal: float
    pct_within_3_extra: float
    pct_6_to_10_extra: float
    pct_other: float
    mean_colors_hybrid: float
    mean_colors_baseline: float
    mean_colors_optimal: Optional[float]

    def as_dict(self) -> dict:
        return {
            "total_graphs": self.total_graphs,
            "pct_invalid_edges_mean": self.pct_invalid_edges_mean,
            "pct_match_optimal": self.pct_match_optimal,
            "pct_within_3_extra": self.pct_within_3_extra,
            "pct_6_to_10_extra": self.pct_6_to_10_extra,
            "pct_other": self.pct_other,
            "mean_colors_hybrid": self.mean_colors_hybrid,
            "mean_colors_baseline": self.mean_colors_baseline,
            "mean_colors_optimal": self.mean_colors_optimal,
        }


def evaluate_rows(
    models: Sequence[ModelParams] | ModelParams,
    rows: Sequence[SampleRow],
    bfs_start: Optional[int] = None,
) -> tuple[EvalBuckets, list[dict]]:
    """Run the hybrid pipeline over a labeled corpus and bucket the outcomes.

    Buckets: exactly optimal, 1-3 extra colors, 6-10 extra colors, and an
    explicit "other" bucket (4-5 or more than 10 extra) so the percentages
    always account for every graph. Requires exact labels on every row.
    """
    if not rows:
        raise ValueError("evaluation corpus is empty")
    records: list[dict] = []
    invalid_pcts: list[float] = []
    match = within3 = six_to_ten = other = 0
    hybrid_total = baseline_total = optimal_total = 0
    for index, row in enumerate(rows):
        if row.is_inference:
            raise ValueError(f"row {index} has no exact label")
        g, _ = unpack_sample(row)
        result = hybrid_color(models, g, bfs_start=bfs_start)
        baseline_colors = len(set(dsatur(g)))
        extra = result.colors_after - row.optimal_k
        if extra < 0:
            raise AssertionError(
                f"row {index}: proper coloring with {result.colors_after} colors "
                f"beats the exact optimum {row.optimal_k}"
            )
        if extra == 0:
            match += 1
        elif extra <= 3:
            within3 += 1
        elif 6 <= extra <= 10:
            six_to_ten += 1
        else:
            other += 1
        invalid_pct = 100.0 * result.report.invalid_fraction
        invalid_pcts.append(invalid_pct)
        hybrid_total += result.colors_after
        baseline_total += baseline_colors
        optimal_total += row.optimal_k
        records.append(
            {
                "graph": index,
                "n": g.n,
                "m": g.m,
                "optimal_colors": row.optimal_k,
                "colors_before": result.colors_before,
                "invalid_edges": len(result.report.invalid_edges),
                "invalid_pct": round(invalid_pct, 3),
                "colors_after": result.colors_after,
                "baseline_colors": baseline_colors,
                "extra_colors": extra,
            }
        )
    total = len(rows)
    buckets = EvalBuckets(
        total_graphs=total,
        pct_invalid_edges_mean=sum(invalid_pcts) / total,
        pct_match_optimal=100.0 * match / total,
        pct_within_3_extra=100.0 * within3 / total,
        pct_6_to_10_extra=100.0 * six_to_ten / total,
        pct_other=100.0 * other / total,
        mean_colors_hybrid=hybrid_total / total,
        mean_colors_baseline=baseline_total / total,
        mean_colors_optimal=optimal_total / total,
    )
    return buckets, records


@dataclass(frozen=True)
class CompareResult:
    chosen: Coloring
    winner: str                  # "hybrid" or "baseline"
    hybrid_colors: int
    baseline_colors: int
    stored: bool                 # True when the losing case went to the feedback store
    label_source: Optional[str]  # "exact" or "baseline" for stored rows


def compare_with_baseline(
    models: Sequence[ModelParams] | ModelParams,
    g: Graph,
    store_path: Optional[str] = None,
    exact_timeout_ms: float = 10_000.0,
    max_nodes: int = 100,
) -> CompareResult:
    """Race the hybrid pipeline against DSATUR; keep whichever uses fewer colors.

    Ties go to the hybrid. When the baseline wins, the graph is appended to
    the feedback store as a training row, labeled with the exact coloring if
    the solver finishes in time and with the DSATUR coloring otherwise.
    """
    hybrid = hybrid_color(models, g)
    baseline = dsatur(g)
    hybrid_count = hybrid.colors_after
    baseline_count = len(set(baseline))
    if hybrid_count <= baseline_count:
        return CompareResult(hybrid.after, "hybrid", hybrid_count, baseline_count, False, None)

    stored = False
    label_source = None
    if store_path is not None:
        exact = chromatic_number(g, timeout_ms=exact_timeout_ms)
        if exact.status == STATUS_EXACT:
            label, label_source = exact.coloring, "exact"
        else:
            label, label_source = baseline, "baseline"
        append_feedback_row(store_path, row_from_graph(g, label, max_nodes=max_nodes))
        stored = True
    return CompareResult(baseline, "baseline", hybrid_count, baseline_count, stored, label_source)


def append_feedback_row(store_path: str, row: SampleRow) -> None:
    """Append one training row to the feedback CSV under an exclusive lock."""
    lock = FileLock(store_path + ".lock")
    with lock:
        with open(store_path, "a", encoding="utf-8", newline="\n") as fh:
            fields = [row.n, row.optimal_k, *row.packed, *row.target_colors]
            fh.write(",".join(str(f) for f in fields))
            fh.write("\n")
