"""Stacked LSTM coloring model: forward pass, prediction, persistence, ensemble.

The input sequence for a graph is its nodes in id order; at step t the model
sees node t's adjacency vector zero-padded to 128 entries. Hidden states of
each layer feed the next, a dense head maps the top layer's hidden state to a
single value per step, and a ReLU makes it a non-negative color estimate.

Everything is double precision numpy. Gate blocks are stacked in the order
input, forget, output, cell-candidate (rows 0..H-1 of each weight matrix are
the input gate, and so on).
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .correction import color_correct
from .graphs import Coloring, Graph

INPUT_DIM = 128

_MAGIC = b"RGCLSTM\x00"
_FORMAT_VERSION = 1
_HEADER = struct.Struct("<8sIIIIIQ")  # magic, version, layers, hidden, input_dim, max_nodes, seed


@dataclass(frozen=True)
class ModelConfig:
    num_layers: int = 3
    hidden_size: int = 1024
    input_dim: int = INPUT_DIM
    max_nodes: int = 100
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_layers < 1:
            raise ValueError(f"num_layers must be >= 1, got {self.num_layers}")
        if self.hidden_size < 1:
            raise ValueError(f"hidden_size must be >= 1, got {self.hidden_size}")
        if self.input_dim != INPUT_DIM:
            raise ValueError(f"input_dim is fixed at {INPUT_DIM}, got {self.input_dim}")
        if not 1 <= self.max_nodes <= INPUT_DIM:
            raise ValueError(f"max_nodes must be in 1..{INPUT_DIM}, got {self.max_nodes}")
        if not 0 <= self.seed < 1 << 64:
            raise ValueError("seed must fit in an unsigned 64-bit value")

    @classmethod
    def desk_profile(cls, seed: int = 0) -> "ModelConfig":
        """Small configuration that trains in minutes on a CPU (graphs up to 30 nodes)."""
        return cls(num_layers=3, hidden_size=128, max_nodes=30, seed=seed)


@dataclass
class ModelParams:
    """Weights of the LSTM stack plus the dense ReLU head.

    Per layer: w_x (4H x in), w_h (4H x H), bias (4H,). The head is a weight
    vector over the top layer's hidden state plus a scalar bias (kept as a
    length-1 array so every parameter lives in an ndarray).
    """

    config: ModelConfig
    w_x: list = field(repr=False)
    w_h: list = field(repr=False)
    bias: list = field(repr=False)
    head_w: np.ndarray = field(repr=False)
    head_b: np.ndarray = field(repr=False)

    def tensors(self) -> list:
        """All parameter arrays in the canonical (serialization) order."""
        out = []
        for layer in range(self.config.num_layers):
            out.extend([self.w_x[layer], self.w_h[layer], self.bias[layer]])
        out.extend([self.head_w, self.head_b])
        return out

    @property
    def num_parameters(self) -> int:
        return sum(t.size for t in self.tensors())


def params_equal(a: ModelParams, b: ModelParams) -> bool:
    if a.config != b.config:
        return False
    return all(np.array_equal(x, y) for x, y in zip(a.tensors(), b.tensors()))


def init_params(config: ModelConfig) -> ModelParams:
    """Glorot-style uniform init, forget-gate biases at 1, deterministic per seed.

    Weights are drawn from U(-a, a) with a = sqrt(6 / (fan_in + fan_out)),
    where fan_out is the per-gate hidden size. Draw order: per layer w_x then
    w_h, then the head vector; biases are not drawn.
    """
    rng = np.random.default_rng(config.seed)
    h = config.hidden_size
    w_x, w_h, bias = [], [], []
    for layer in range(config.num_layers):
        in_dim = config.input_dim if layer == 0 else h
        a_x = math.sqrt(6.0 / (in_dim + h))
        a_h = math.sqrt(6.0 / (h + h))
        w_x.append(rng.uniform(-a_x, a_x, size=(4 * h, in_dim)))
        w_h.append(rng.uniform(-a_h, a_h, size=(4 * h, h)))
        b = np.zeros(4 * h)
        b[h : 2 * h] = 1.0  # forget gate
        bias.append(b)
    a_head = math.sqrt(6.0 / (h + 1))
    head_w = rng.uniform(-a_head, a_head, size=h)
    head_b = np.zeros(1)
    return ModelParams(config, w_x, w_h, bias, head_w, head_b)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # Numerically stable for large |z|.
    return 0.5 * (1.0 + np.tanh(0.5 * z))


@dataclass
class LayerCache:
    inp: np.ndarray   # (B, L, in)  layer input sequence
    i: np.ndarray     # (B, L, H)   gate activations
    f: np.ndarray
    o: np.ndarray
    g: np.ndarray     # cell candidate (tanh)
    c: np.ndarray     # cell state
    tc: np.ndarray    # tanh(cell state)
    h: np.ndarray     # hidden state


@dataclass
class ForwardCache:
    layers: list
    pre: np.ndarray       # (B, L) head pre-activation
    outputs: np.ndarray   # (B, L) ReLU outputs


def run_lstm(
    params: ModelParams, xs: np.ndarray, want_cache: bool = False
) -> tuple[np.ndarray, Optional[ForwardCache]]:
    """Run the full stack over a batch of padded sequences.

    xs has shape (B, L, input_dim); hidden and cell states start at zero.
    Returns the (B, L) ReLU outputs, plus the per-layer activations when
    training needs them for backpropagation.
    """
    cfg = params.config
    batch, length, _ = xs.shape
    h_dim = cfg.hidden_size
    layer_caches = []
    inp = np.ascontiguousarray(xs, dtype=np.float64)
    for layer in range(cfg.num_layers):
        w_x, w_h, b = params.w_x[layer], params.w_h[layer], params.bias[layer]
        # Input contributions for every step at once; only the recurrence is sequential.
        z_x = inp.reshape(batch * length, -1) @ w_x.T
        z_x = z_x.reshape(batch, length, 4 * h_dim) + b
        i_seq = np.empty((batch, length, h_dim))
        f_seq = np.empty_like(i_seq)
        o_seq = np.empty_like(i_seq)
        g_seq = np.empty_like(i_seq)
        c_seq = np.empty_like(i_seq)
        tc_seq = np.empty_like(i_seq)
        h_seq = np.empty_like(i_seq)
        h_t = np.zeros((batch, h_dim))
        c_t = np.zeros((batch, h_dim))
        for t in range(length):
            z = z_x[:, t] + h_t @ w_h.T
            i_t = _sigmoid(z[:, :h_dim])
            f_t = _sigmoid(z[:, h_dim : 2 * h_dim])
            o_t = _sigmoid(z[:, 2 * h_dim : 3 * h_dim])
            g_t = np.tanh(z[:, 3 * h_dim :])
            c_t = f_t * c_t + i_t * g_t
            tc_t = np.tanh(c_t)
            h_t = o_t * tc_t
            i_seq[:, t] = i_t
            f_seq[:, t] = f_t
            o_seq[:, t] = o_t
            g_seq[:, t] = g_t
            c_seq[:, t] = c_t
            tc_seq[:, t] = tc_t
            h_seq[:, t] = h_t
        if want_cache:
            layer_caches.append(
                LayerCache(inp, i_seq, f_seq, o_seq, g_seq, c_seq, tc_seq, h_seq)
            )
        inp = h_seq
    pre = inp @ params.head_w + params.head_b[0]
    outputs = np.maximum(pre, 0.0)
    if not want_cache:
        return outputs, None
    return outputs, ForwardCache(layer_caches, pre, outputs)


def input_matrix(g: Graph, length: Optional[int] = None) -> np.ndarray:
    """Adjacency rows as the model's input sequence, zero-padded to 128 wide."""
    length = g.n if length is None else length
    xs = np.zeros((length, INPUT_DIM))
    xs[: g.n, : g.n] = g.adjacency.astype(np.float64)
    return xs


def forward(params: ModelParams, g: Graph) -> np.ndarray:
    """Per-node raw outputs (non-negative reals), one value per graph node."""
    if g.n > params.config.max_nodes:
        raise ValueError(
            f"graph has {g.n} nodes, model is configured for {params.config.max_nodes}"
        )
    outputs, _ = run_lstm(params, input_matrix(g)[np.newaxis], want_cache=False)
    return outputs[0]


def predict_colors(params: ModelParams, g: Graph) -> Coloring:
    """Round the raw outputs half-away-from-zero and clamp into 1..n."""
    outputs = forward(params, g)
    n = g.n
    return tuple(min(n, max(1, int(math.floor(y + 0.5)))) for y in outputs)


def ensemble_predict(params_list: Sequence[ModelParams], g: Graph) -> Coloring:
    """Run predict + correction per model; keep the coloring using fewest colors.

    Ties go to the earliest model in the list.
    """
    if not params_list:
        raise ValueError("ensemble needs at least one parameter set")
    best: Optional[Coloring] = None
    best_count = 0
    for params in params_list:
        corrected, _ = color_correct(g, predict_colors(params, g))
        count = len(set(corrected))
        if best is None or count < best_count:
            best, best_count = corrected, count
    return best


def save_params(params: ModelParams, path: str) -> None:
    """Versioned little-endian binary: header, then tensors as raw float64."""
    cfg = params.config
    header = _HEADER.pack(
        _MAGIC,
        _FORMAT_VERSION,
        cfg.num_layers,
        cfg.hidden_size,
        cfg.input_dim,
        cfg.max_nodes,
        cfg.seed,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for tensor in params.tensors():
            fh.write(np.ascontiguousarray(tensor, dtype="<f8").tobytes())


def load_params(path: str) -> ModelParams:
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER.size:
        raise ValueError(f"{path}: truncated header")
    magic, version, layers, hidden, input_dim, max_nodes, seed = _HEADER.unpack_from(blob)
    if magic != _MAGIC:
        raise ValueError(f"{path}: not a model parameter file (bad magic)")
    if version != _FORMAT_VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    config = ModelConfig(
        num_layers=layers,
        hidden_size=hidden,
        input_dim=input_dim,
        max_nodes=max_nodes,
        seed=seed,
    )
    shapes = []
    for layer in range(layers):
        in_dim = input_dim if layer == 0 else hidden
        shapes.extend([(4 * hidden, in_dim), (4 * hidden, hidden), (4 * hidden,)])
    shapes.extend([(hidden,), (1,)])
    expected = _HEADER.size + 8 * sum(int(np.prod(s)) for s in shapes)
    if len(blob) != expected:
        raise ValueError(
            f"{path}: payload is {len(blob)} bytes, config implies {expected}"
        )
    offset = _HEADER.size
    tensors = []
    for shape in shapes:
        count = int(np.prod(shape))
        arr = np.frombuffer(blob, dtype="<f8", count=count, offset=offset)
        tensors.append(arr.astype(np.float64).reshape(shape))
        offset += 8 * count
    w_x = [tensors[3 * i] for i in range(layers)]
    w_h = [tensors[3 * i + 1] for i in range(layers)]
    bias = [tensors[3 * i + 2] for i in range(layers)]
    return ModelParams(config, w_x, w_h, bias, tensors[-2], tensors[-1])
