"""Command-line surface: corpus generation, training, coloring, evaluation.

Subcommands: gen-corpus, train, color, evaluate, compare, exact, heuristic.
Human-readable reports go to stdout; --out additionally writes one JSON
record per graph (JSON lines). Exit codes: 0 success, 1 usage error,
2 input/format error, 3 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
import traceback
from typing import Optional

from . import corpus as corpus_mod
from . import graph_io
from .exact import chromatic_number
from .graphs import Graph, validate_coloring
from .heuristics import dsatur, greedy_sequential, rlf
from .model import ModelConfig, ModelParams, load_params, save_params
from .pipeline import compare_with_baseline, evaluate_rows, hybrid_color
from .training import TrainConfig, train

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_INTERNAL = 3

logger = logging.getLogger(__name__)


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad flags; the contract here says 1."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _add_format_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--format",
        choices=("dimacs", "csv", "intervals"),
        default=None,
        help="input format (default: inferred from the file extension)",
    )


def _add_out_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--out", default=None, help="write per-graph JSON lines here")


def build_parser() -> _Parser:
    parser = _Parser(prog="regcolor", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-corpus", help="generate an exactly-labeled random corpus")
    p.add_argument("--count", type=int, required=True)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--p-min", type=float, default=0.05)
    p.add_argument("--p-max", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--timeout-ms", type=float, default=10_000.0)
    p.add_argument("--max-nodes", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1, help="parallel labeling processes")
    p.add_argument("--out", required=True, help="corpus CSV path")
    p.set_defaults(func=cmd_gen_corpus)

    p = sub.add_parser("train", help="train the LSTM coloring model")
    p.add_argument("corpus", help="training CSV produced by gen-corpus")
    p.add_argument("--out", required=True, help="model parameter file")
    p.add_argument(
        "--profile",
        choices=("desk", "full"),
        default="desk",
        help="desk: 3x128 model, 50 epochs; full: 3x1024, 100 epochs (CPU-days)",
    )
    p.add_argument("--layers", type=int, default=None)
    p.add_argument("--hidden", type=int, default=None)
    p.add_argument("--max-nodes", type=int, default=None)
    p.add_argument("--epochs", type=int, default=None)
    p.add_argument("--learning-rate", type=float, default=None)
    p.add_argument("--batch-size", type=int, default=None)
    p.add_argument("--clip-norm", type=float, default=None)
    p.add_argument("--seed", type=int, default=0, help="seeds both init and shuffling")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("color", help="hybrid coloring: predict, then repair")
    p.add_argument("input", help="graph file (DIMACS, sample CSV, or intervals)")
    p.add_argument(
        "--model", action="append", required=True,
        help="model parameter file (repeat for an ensemble)",
    )
    _add_format_flag(p)
    p.add_argument(
        "--bfs-start", type=int, default=None,
        help="renumber nodes in BFS order from this node before predicting",
    )
    _add_out_flag(p)
    p.set_defaults(func=cmd_color)

    p = sub.add_parser("evaluate", help="bucketed comparison against exact labels")
    p.add_argument("corpus", help="labeled test CSV")
    p.add_argument("--model", action="append", required=True)
    p.add_argument("--baseline", choices=("dsatur",), default="dsatur")
    _add_out_flag(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("compare", help="hybrid vs DSATUR; losing cases feed the store")
    p.add_argument("input")
    p.add_argument("--model", action="append", required=True)
    _add_format_flag(p)
    p.add_argument("--baseline", choices=("dsatur",), default="dsatur")
    p.add_argument("--store", default=None, help="feedback training CSV (appended)")
    p.add_argument("--timeout-ms", type=float, default=10_000.0,
                   help="exact-labeling budget for stored cases")
    _add_out_flag(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("exact", help="exact chromatic number")
    p.add_argument("input")
    _add_format_flag(p)
    p.add_argument("--timeout-ms", type=float, default=60_000.0)
    _add_out_flag(p)
    p.set_defaults(func=cmd_exact)

    p = sub.add_parser("heuristic", help="classical coloring heuristics")
    p.add_argument("input")
    _add_format_flag(p)
    p.add_argument("--algorithm", choices=("dsatur", "rlf", "greedy"), default="dsatur")
    _add_out_flag(p)
    p.set_defaults(func=cmd_heuristic)

    return parser


def _infer_format(path: str) -> str:
    lower = path.lower()
    if lower.endswith((".col", ".dimacs")):
        return "dimacs"
    if lower.endswith(".csv"):
        return "csv"
    if lower.endswith((".intervals", ".ivl")):
        return "intervals"
    raise graph_io.FormatError(
        f"cannot infer format of {path!r}; pass --format dimacs|csv|intervals"
    )


def load_graphs(path: str, fmt: Optional[str]) -> list[tuple[str, Graph]]:
    """Load one or more graphs from a file; CSV files may hold many rows."""
    fmt = fmt or _infer_format(path)
    if fmt == "dimacs":
        with open(path, "r", encoding="utf-8") as fh:
            return [(path, graph_io.parse_dimacs(fh.read()))]
    if fmt == "csv":
        rows = graph_io.read_csv(path)
        return [(f"{path}[{i}]", graph_io.unpack_sample(row)[0]) for i, row in enumerate(rows)]
    if fmt == "intervals":
        with open(path, "r", encoding="utf-8") as fh:
            intervals = graph_io.parse_intervals(fh.read())
        return [(path, graph_io.build_interference(intervals))]
    raise graph_io.FormatError(f"unknown format {fmt!r}")


def _load_models(paths: list[str]) -> list[ModelParams]:
    return [load_params(p) for p in paths]


def _write_jsonl(path: Optional[str], records: list[dict]) -> None:
    if path is None:
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record))
            fh.write("\n")


def cmd_gen_corpus(args: argparse.Namespace) -> int:
    spec = corpus_mod.CorpusSpec(
        count=args.count,
        n_min=args.n_min,
        n_max=args.n_max,
        p_min=args.p_min,
        p_max=args.p_max,
        seed=args.seed,
        timeout_ms=args.timeout_ms,
        max_nodes=args.max_nodes,
    )
    rows, manifest = corpus_mod.generate_labeled_corpus(spec, jobs=args.jobs)
    graph_io.write_csv(rows, args.out)
    manifest_path = args.out + ".manifest.json"
    with open(manifest_path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")
    print(
        f"labeled {manifest['labeled']}/{spec.count} graphs "
        f"({manifest['timed_out']} timed out) -> {args.out}"
    )
    print(f"manifest: {manifest_path}")
    return EXIT_OK


_PROFILES = {
    "desk": {"layers": 3, "hidden": 128, "max_nodes": 30, "epochs": 50},
    "full": {"layers": 3, "hidden": 1024, "max_nodes": 100, "epochs": 100},
}


def cmd_train(args: argparse.Namespace) -> int:
    profile = _PROFILES[args.profile]
    model_config = ModelConfig(
        num_layers=args.layers if args.layers is not None else profile["layers"],
        hidden_size=args.hidden if args.hidden is not None else profile["hidden"],
        max_nodes=args.max_nodes if args.max_nodes is not None else profile["max_nodes"],
        seed=args.seed,
    )
    defaults = TrainConfig()
    train_config = TrainConfig(
        epochs=args.epochs if args.epochs is not None else profile["epochs"],
        learning_rate=(
            args.learning_rate if args.learning_rate is not None else defaults.learning_rate
        ),
        batch_size=args.batch_size if args.batch_size is not None else defaults.batch_size,
        clip_norm=args.clip_norm if args.clip_norm is not None else defaults.clip_norm,
        seed=args.seed,
    )
    rows = graph_io.read_csv(args.corpus)
    if not rows:
        raise graph_io.FormatError(f"{args.corpus}: corpus is empty")
    started = time.monotonic()
    params, history = train(train_config, model_config, rows)
    elapsed = time.monotonic() - started
    save_params(params, args.out)
    loss_path = args.out + ".loss.csv"
    with open(loss_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("epoch,mean_mape\n")
        for epoch, loss in enumerate(history, start=1):
            fh.write(f"{epoch},{loss:.6f}\n")
    print(
        f"trained {model_config.num_layers}x{model_config.hidden_size} model on "
        f"{len(rows)} rows for {train_config.epochs} epochs in {elapsed:.1f}s"
    )
    print(f"epoch-1 mean MAPE {history[0]:.3f}%  final {history[-1]:.3f}%")
    print(f"params: {args.out}")
    print(f"loss history: {loss_path}")
    return EXIT_OK


def cmd_color(args: argparse.Namespace) -> int:
    models = _load_models(args.model)
    records = []
    for label, g in load_graphs(args.input, args.format):
        result = hybrid_color(models, g, bfs_start=args.bfs_start)
        final_report = validate_coloring(g, result.after)
        if not final_report.is_proper:
            raise AssertionError(f"{label}: corrected coloring is not proper")
        invalid_pct = 100.0 * result.report.invalid_fraction
        print(
            f"{label}: n={g.n} m={g.m}: before={result.colors_before} colors, "
            f"invalid {len(result.report.invalid_edges)}/{g.m} ({invalid_pct:.1f}%), "
            f"after={result.colors_after} colors"
        )
        print("  coloring:", " ".join(str(c) for c in result.after))
        records.append(
            {
                "graph": label,
                "n": g.n,
                "m": g.m,
                "colors_before": result.colors_before,
                "invalid_edges": len(result.report.invalid_edges),
                "invalid_pct": round(invalid_pct, 3),
                "colors_after": result.colors_after,
                "fresh_colors_added": result.stats.fresh_colors_added,
                "coloring": list(result.after),
            }
        )
    _write_jsonl(args.out, records)
    return EXIT_OK


def cmd_evaluate(args: argparse.Namespace) -> int:
    models = _load_models(args.model)
    rows = graph_io.read_csv(args.corpus)
    if not rows:
        raise graph_io.FormatError(f"{args.corpus}: corpus is empty")
    buckets, records = evaluate_rows(models, rows)
    print(f"graphs evaluated: {buckets.total_graphs}")
    print(f"mean invalid edges before correction: {buckets.pct_invalid_edges_mean:.1f}%")
    print(f"match optimal:   {buckets.pct_match_optimal:.1f}%")
    print(f"1-3 extra:       {buckets.pct_within_3_extra:.1f}%")
    print(f"6-10 extra:      {buckets.pct_6_to_10_extra:.1f}%")
    print(f"other:           {buckets.pct_other:.1f}%")
    print(
        f"mean colors: hybrid {buckets.mean_colors_hybrid:.2f}, "
        f"DSATUR baseline {buckets.mean_colors_baseline:.2f}, "
        f"optimal {buckets.mean_colors_optimal:.2f}"
    )
    _write_jsonl(args.out, [{"summary": buckets.as_dict()}] + records)
    return EXIT_OK


def cmd_compare(args: argparse.Namespace) -> int:
    models = _load_models(args.model)
    max_nodes = max(m.config.max_nodes for m in models)
    records = []
    for label, g in load_graphs(args.input, args.format):
        result = compare_with_baseline(
            models, g,
            store_path=args.store,
            exact_timeout_ms=args.timeout_ms,
            max_nodes=max_nodes,
        )
        note = ""
        if result.stored:
            note = f" (stored with {result.label_source} label)"
        print(
            f"{label}: hybrid={result.hybrid_colors} vs "
            f"DSATUR baseline={result.baseline_colors} -> {result.winner}{note}"
        )
        records.append(
            {
                "graph": label,
                "winner": result.winner,
                "hybrid_colors": result.hybrid_colors,
                "baseline_colors": result.baseline_colors,
                "stored": result.stored,
                "label_source": result.label_source,
                "coloring": list(result.chosen),
            }
        )
    _write_jsonl(args.out, records)
    return EXIT_OK


def cmd_exact(args: argparse.Namespace) -> int:
    records = []
    for label, g in load_graphs(args.input, args.format):
        started = time.monotonic()
        result = chromatic_number(g, timeout_ms=args.timeout_ms)
        elapsed_ms = (time.monotonic() - started) * 1000.0
        print(
            f"{label}: n={g.n} m={g.m}: chi={result.chromatic_number} "
            f"({result.status}) in {elapsed_ms:.0f} ms"
        )
        records.append(
            {
                "graph": label,
                "n": g.n,
                "m": g.m,
                "chromatic_number": result.chromatic_number,
                "status": result.status,
                "solve_ms": round(elapsed_ms, 3),
                "coloring": list(result.coloring),
            }
        )
    _write_jsonl(args.out, records)
    return EXIT_OK


def cmd_heuristic(args: argparse.Namespace) -> int:
    records = []
    for label, g in load_graphs(args.input, args.format):
        if args.algorithm == "dsatur":
            coloring = dsatur(g)
        elif args.algorithm == "rlf":
            coloring = rlf(g)
        else:
            coloring = greedy_sequential(g, range(g.n))
        report = validate_coloring(g, coloring)
        if not report.is_proper:
            raise AssertionError(f"{label}: heuristic produced an improper coloring")
        print(f"{label}: n={g.n} m={g.m}: {args.algorithm} uses {report.colors_used} colors")
        records.append(
            {
                "graph": label,
                "algorithm": args.algorithm,
                "n": g.n,
                "m": g.m,
                "colors": report.colors_used,
                "coloring": list(coloring),
            }
        )
    _write_jsonl(args.out, records)
    return EXIT_OK


def main(argv: Optional[list[str]] = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (graph_io.FormatError, ValueError, OSError) as exc:
        print(f"regcolor: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (AssertionError, RuntimeError) as exc:
        print(f"regcolor: internal error: {exc}", file=sys.stderr)
        traceback.print_exc()
        return EXIT_INTERNAL


def entrypoint() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entrypoint()
