"""Serialization: packed sample rows, sample CSV, DIMACS .col, live intervals.

Sample row format (one CSV line, no header, LF endings):

    n, k, v0_word0, v0_word1, v1_word0, ..., target_0, ..., target_{max_nodes-1}

Each node's adjacency vector is packed into two unsigned 64-bit words,
LSB-first: bit j of word0 covers node j (0..63), bit j of word1 covers node
64+j. Nodes at index >= n are zero padding. `k` is the labeled color count
(0 marks an inference row, whose target slots are all written as 1).

The upstream record format omits n, which is unrecoverable when trailing
nodes are isolated (all-zero adjacency is indistinguishable from padding),
so n is prepended here; this is a documented divergence.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

from .graphs import Coloring, DEFAULT_MAX_NODES, Graph

logger = logging.getLogger(__name__)

# The two-word packing is fixed: bits 0..99 are meaningful, the rest padding.
PACK_MAX_NODES = 100
_WORD_MAX = (1 << 64) - 1


class FormatError(ValueError):
    """A file or text blob does not match its declared format."""


@dataclass(frozen=True)
class SampleRow:
    """One training or inference record in the packed sample format."""

    n: int
    optimal_k: int
    packed: tuple[int, ...]         # 2 * max_nodes words
    target_colors: tuple[int, ...]  # max_nodes entries

    def __post_init__(self) -> None:
        max_nodes = len(self.target_colors)
        if not 1 <= max_nodes <= PACK_MAX_NODES:
            raise ValueError(f"max_nodes must be in 1..{PACK_MAX_NODES}, got {max_nodes}")
        if not 1 <= self.n <= max_nodes:
            raise ValueError(f"n={self.n} out of range for max_nodes={max_nodes}")
        if len(self.packed) != 2 * max_nodes:
            raise ValueError(
                f"expected {2 * max_nodes} packed words, got {len(self.packed)}"
            )
        for w in self.packed:
            if not 0 <= w <= _WORD_MAX:
                raise ValueError(f"packed word {w} outside unsigned 64-bit range")
        if any(self.packed[2 * v] or self.packed[2 * v + 1] for v in range(self.n, max_nodes)):
            raise ValueError("packed words for padding nodes must be zero")
        if self.optimal_k == 0:
            # Inference row: the whole output sequence is filled with ones.
            if any(t != 1 for t in self.target_colors):
                raise ValueError("inference rows must have all-ones targets")
        elif self.optimal_k >= 1:
            for i, t in enumerate(self.target_colors):
                if i < self.n:
                    if not 1 <= t <= self.n:
                        raise ValueError(
                            f"target color {t} at node {i} outside 1..{self.n}"
                        )
                elif t != 0:
                    raise ValueError("target padding must be zero")
        else:
            raise ValueError(f"optimal_k must be >= 0, got {self.optimal_k}")

    @property
    def max_nodes(self) -> int:
        return len(self.target_colors)

    @property
    def is_inference(self) -> bool:
        return self.optimal_k == 0


def pack_adjacency_row(g: Graph, v: int) -> tuple[int, int]:
    """Pack node v's adjacency vector into (word0, word1), LSB-first."""
    if g.n > PACK_MAX_NODES:
        raise ValueError(f"packing is fixed at {PACK_MAX_NODES} nodes, graph has {g.n}")
    if not 0 <= v < g.n:
        raise ValueError(f"node {v} out of range for n={g.n}")
    mask = g.neighbor_mask(v)
    return mask & _WORD_MAX, mask >> 64


def row_from_graph(
    g: Graph,
    coloring: Optional[Sequence[int]] = None,
    max_nodes: int = DEFAULT_MAX_NODES,
    optimal_k: Optional[int] = None,
) -> SampleRow:
    """Build a SampleRow: a training row if a coloring is given, else an inference row."""
    if g.n > max_nodes:
        raise ValueError(f"graph has {g.n} nodes, row holds at most {max_nodes}")
    packed: list[int] = []
    for v in range(g.n):
        packed.extend(pack_adjacency_row(g, v))
    packed.extend([0] * (2 * (max_nodes - g.n)))
    if coloring is None:
        return SampleRow(g.n, 0, tuple(packed), (1,) * max_nodes)
    if len(coloring) != g.n:
        raise ValueError(f"coloring has length {len(coloring)}, graph has {g.n} nodes")
    targets = tuple(int(c) for c in coloring) + (0,) * (max_nodes - g.n)
    k = len(set(coloring)) if optimal_k is None else optimal_k
    return SampleRow(g.n, k, tuple(packed), targets)


def unpack_sample(row: SampleRow) -> tuple[Graph, Optional[Coloring]]:
    """Rebuild the graph (and the target coloring for training rows)."""
    n = row.n
    adj = np.zeros((n, n), dtype=bool)
    for v in range(n):
        mask = row.packed[2 * v] | (row.packed[2 * v + 1] << 64)
        if mask >> n:
            raise FormatError(f"node {v} has adjacency bits beyond n={n} (nonzero padding)")
        if mask & (1 << v):
            raise FormatError(f"node {v} has its diagonal bit set")
        for j in range(n):
            adj[v, j] = bool(mask & (1 << j))
    if not np.array_equal(adj, adj.T):
        raise FormatError("packed adjacency matrix is asymmetric")
    g = Graph(adj)
    if row.is_inference:
        return g, None
    return g, tuple(row.target_colors[:n])


def write_csv(rows: Iterable[SampleRow], path: str) -> int:
    """Write rows as sample CSV; returns the number of rows written."""
    count = 0
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for row in rows:
            fields = [row.n, row.optimal_k, *row.packed, *row.target_colors]
            fh.write(",".join(str(f) for f in fields))
            fh.write("\n")
            count += 1
    return count


def read_csv(path: str) -> list[SampleRow]:
    """Read sample CSV. Every line must carry 2 + 3*max_nodes integer fields."""
    rows: list[SampleRow] = []
    expected_fields: Optional[int] = None
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            if expected_fields is None:
                if len(parts) < 5 or (len(parts) - 2) % 3 != 0:
                    raise FormatError(
                        f"{path}:{lineno}: {len(parts)} fields do not fit 2 + 3*max_nodes"
                    )
                expected_fields = len(parts)
            if len(parts) != expected_fields:
                raise FormatError(
                    f"{path}:{lineno}: expected {expected_fields} fields, got {len(parts)}"
                )
            try:
                values = [int(p) for p in parts]
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: non-integer field ({exc})") from None
            max_nodes = (len(values) - 2) // 3
            packed = values[2 : 2 + 2 * max_nodes]
            targets = values[2 + 2 * max_nodes :]
            try:
                rows.append(
                    SampleRow(values[0], values[1], tuple(packed), tuple(targets))
                )
            except ValueError as exc:
                raise FormatError(f"{path}:{lineno}: {exc}") from None
    return rows


def parse_dimacs(text: str) -> Graph:
    """Parse a DIMACS .col instance: `c` comments, one `p edge N M`, `e u v` lines.

    Duplicate and reversed edge lines collapse to a single edge. An edge count
    M that disagrees with the actual edge lines is only warned about; real
    COLOR-dataset files are sloppy on that field.
    """
    n: Optional[int] = None
    declared_m: Optional[int] = None
    edges: set[tuple[int, int]] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        parts = line.split()
        if parts[0] == "p":
            if n is not None:
                raise FormatError(f"line {lineno}: duplicate p line")
            if len(parts) != 4:
                raise FormatError(f"line {lineno}: malformed p line: {line!r}")
            try:
                n, declared_m = int(parts[2]), int(parts[3])
            except ValueError:
                raise FormatError(f"line {lineno}: malformed p line: {line!r}") from None
            if n < 1:
                raise FormatError(f"line {lineno}: node count must be >= 1, got {n}")
        elif parts[0] == "e":
            if n is None:
                raise FormatError(f"line {lineno}: e line before p line")
            if len(parts) != 3:
                raise FormatError(f"line {lineno}: malformed e line: {line!r}")
            try:
                u, v = int(parts[1]), int(parts[2])
            except ValueError:
                raise FormatError(f"line {lineno}: malformed e line: {line!r}") from None
            if not (1 <= u <= n and 1 <= v <= n):
                raise FormatError(f"line {lineno}: node id out of 1..{n}: {line!r}")
            if u == v:
                raise FormatError(f"line {lineno}: self-loop on node {u}")
            edges.add((min(u, v) - 1, max(u, v) - 1))
        else:
            raise FormatError(f"line {lineno}: unrecognized line: {line!r}")
    if n is None:
        raise FormatError("missing p line")
    if declared_m is not None and declared_m != len(edges):
        logger.warning(
            "DIMACS header declares %d edges but %d distinct edges were read",
            declared_m,
            len(edges),
        )
    return Graph.from_edges(n, sorted(edges))


def emit_dimacs(g: Graph) -> str:
    lines = [f"p edge {g.n} {g.m}"]
    lines.extend(f"e {u + 1} {v + 1}" for u, v in g.edges())
    return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class LiveInterval:
    """A virtual register's live range: disjoint half-open [start, end) segments."""

    vreg: int
    segments: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        prev_end: Optional[int] = None
        for start, end in self.segments:
            if start >= end:
                raise ValueError(
                    f"vreg {self.vreg}: empty segment [{start}, {end})"
                )
            if prev_end is not None and start < prev_end:
                raise ValueError(
                    f"vreg {self.vreg}: segments overlap or are unsorted at [{start}, {end})"
                )
            prev_end = end

    def overlaps(self, other: "LiveInterval") -> bool:
        for a, b in self.segments:
            for c, d in other.segments:
                if a < d and c < b:
                    return True
        return False


def parse_intervals(text: str) -> list[LiveInterval]:
    """Parse live intervals, one per line: `vreg <id> <start> <end> [<start> <end> ...]`.

    Blank lines and `#` comments are skipped. Segments may arrive unsorted and
    are sorted here; overlapping segments within one vreg are an error, as are
    duplicate vreg ids.
    """
    intervals: list[LiveInterval] = []
    seen: set[int] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if parts[0] != "vreg" or len(parts) < 4 or len(parts) % 2 != 0:
            raise FormatError(f"line {lineno}: malformed interval line: {line!r}")
        try:
            numbers = [int(p) for p in parts[1:]]
        except ValueError:
            raise FormatError(f"line {lineno}: non-integer field: {line!r}") from None
        vreg = numbers[0]
        if vreg in seen:
            raise FormatError(f"line {lineno}: duplicate vreg id {vreg}")
        seen.add(vreg)
        points = numbers[1:]
        segments = sorted(zip(points[0::2], points[1::2]))
        try:
            intervals.append(LiveInterval(vreg, tuple(segments)))
        except ValueError as exc:
            raise FormatError(f"line {lineno}: {exc}") from None
    return intervals


def build_interference(
    intervals: Sequence[LiveInterval], max_nodes: int = DEFAULT_MAX_NODES
) -> Graph:
    """Interference graph: node i is the i-th interval, edges join overlapping ones."""
    if not intervals:
        raise ValueError("need at least one interval")
    if len(intervals) > max_nodes:
        raise ValueError(f"{len(intervals)} intervals exceed max_nodes={max_nodes}")
    n = len(intervals)
    adj = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i + 1, n):
            if intervals[i].overlaps(intervals[j]):
                adj[i, j] = adj[j, i] = True
    return Graph(adj)
