"""Hybrid graph-coloring toolkit for register allocation experiments.

An LSTM sequence model predicts per-node colors from adjacency-vector
sequences, a deterministic correction pass repairs invalid edges, and an
exact branch-and-bound solver plus classical heuristics provide training
labels and baselines.
"""

from .correction import CorrectionStats, color_correct
from .exact import ExactResult, brute_force_chromatic, chromatic_number, k_colorable, max_clique_lower_bound
from .gen import GnpParams, gnp, scale_free
from .graph_io import (
    FormatError,
    LiveInterval,
    SampleRow,
    build_interference,
    emit_dimacs,
    pack_adjacency_row,
    parse_dimacs,
    parse_intervals,
    read_csv,
    row_from_graph,
    unpack_sample,
    write_csv,
)
from .graphs import (
    Coloring,
    ColoringReport,
    Graph,
    apply_permutation,
    bfs_permutation,
    invert_permutation,
    validate_coloring,
)
from .heuristics import dsatur, greedy_sequential, rlf
from .model import (
    ModelConfig,
    ModelParams,
    ensemble_predict,
    forward,
    init_params,
    load_params,
    predict_colors,
    save_params,
)
from .pipeline import (
    CompareResult,
    EvalBuckets,
    HybridResult,
    compare_with_baseline,
    evaluate_rows,
    hybrid_color,
)
from .training import TrainConfig, grad_check, mape_loss, train

__version__ = "0.1.0"
