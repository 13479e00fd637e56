"""Training loop: MAPE loss, backpropagation through time, Adam, gradient check.

The loss is the mean absolute percentage error between the raw ReLU outputs
and the labeled colors, padding excluded; rounding to integer colors happens
only at prediction time, never inside the loss. Gradients for a mini-batch
are computed in one vectorized backward pass (the deterministic equivalent of
fanning out per sample), clipped to a global norm, and applied by Adam.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .graph_io import SampleRow, unpack_sample
from .graphs import Graph
from .model import ForwardCache, ModelConfig, ModelParams, init_params, input_matrix, run_lstm


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 100
    learning_rate: float = 1e-3
    batch_size: int = 32
    clip_norm: float = 5.0
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        # learning_rate 0 is allowed: a no-op optimizer is a useful sanity check.
        if self.learning_rate < 0:
            raise ValueError(f"learning_rate must be >= 0, got {self.learning_rate}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.clip_norm <= 0:
            raise ValueError(f"clip_norm must be > 0, got {self.clip_norm}")

    @classmethod
    def desk_profile(cls, seed: int = 0) -> "TrainConfig":
        return cls(epochs=50, seed=seed)


def mape_loss(pred: Sequence[float], target: Sequence[int], n: int) -> float:
    """Mean absolute percentage error over the first n positions, in percent."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if len(pred) < n or len(target) < n:
        raise ValueError(f"need at least {n} predictions and targets")
    total = 0.0
    for t in range(n):
        if target[t] < 1:
            raise ValueError(f"target at position {t} must be >= 1, got {target[t]}")
        total += abs(pred[t] - target[t]) / target[t]
    return 100.0 * total / n


def batch_loss_and_grads(
    params: ModelParams,
    xs: np.ndarray,        # (B, L, input_dim), zero-padded
    targets: np.ndarray,   # (B, L) float, >= 1 everywhere (padding is masked out)
    lengths: np.ndarray,   # (B,) actual sequence lengths
) -> tuple[np.ndarray, list]:
    """Per-sample MAPE losses and the gradient of their batch mean.

    Returns (losses of shape (B,), gradients aligned with params.tensors()).
    """
    batch, length, _ = xs.shape
    h_dim = params.config.hidden_size
    outputs, cache = run_lstm(params, xs, want_cache=True)
    assert cache is not None
    mask = np.arange(length)[np.newaxis, :] < lengths[:, np.newaxis]

    err = (outputs - targets) / targets
    per_step = np.where(mask, np.abs(err), 0.0)
    losses = 100.0 * per_step.sum(axis=1) / lengths

    # d(batch mean loss) / d outputs
    d_out = np.where(mask, np.sign(outputs - targets) / targets, 0.0)
    d_out *= (100.0 / lengths)[:, np.newaxis] / batch

    grads = _backward(params, cache, d_out)
    return losses, grads


def _backward(params: ModelParams, cache: ForwardCache, d_out: np.ndarray) -> list:
    """Backpropagation through time; returns grads aligned with params.tensors()."""
    cfg = params.config
    h_dim = cfg.hidden_size
    batch, length = d_out.shape

    d_pre = np.where(cache.pre > 0, d_out, 0.0)
    top_h = cache.layers[-1].h
    d_head_w = np.einsum("bl,blh->h", d_pre, top_h)
    d_head_b = np.array([d_pre.sum()])
    d_hidden = d_pre[:, :, np.newaxis] * params.head_w  # (B, L, H)

    layer_grads: list[tuple[np.ndarray, np.ndarray, np.ndarray]] = []
    for layer in range(cfg.num_layers - 1, -1, -1):
        lc = cache.layers[layer]
        w_x, w_h = params.w_x[layer], params.w_h[layer]
        d_z = np.empty((batch, length, 4 * h_dim))
        dh_next = np.zeros((batch, h_dim))
        dc_next = np.zeros((batch, h_dim))
        for t in range(length - 1, -1, -1):
            i_t, f_t, o_t, g_t = lc.i[:, t], lc.f[:, t], lc.o[:, t], lc.g[:, t]
            tc_t = lc.tc[:, t]
            dh = d_hidden[:, t] + dh_next
            dc = dc_next + dh * o_t * (1.0 - tc_t * tc_t)
            c_prev = lc.c[:, t - 1] if t > 0 else 0.0
            d_z[:, t, :h_dim] = dc * g_t * i_t * (1.0 - i_t)
            d_z[:, t, h_dim : 2 * h_dim] = dc * c_prev * f_t * (1.0 - f_t)
            d_z[:, t, 2 * h_dim : 3 * h_dim] = dh * tc_t * o_t * (1.0 - o_t)
            d_z[:, t, 3 * h_dim :] = dc * i_t * (1.0 - g_t * g_t)
            dh_next = d_z[:, t] @ w_h
            dc_next = dc * f_t
        flat_z = d_z.reshape(batch * length, 4 * h_dim)
        flat_x = lc.inp.reshape(batch * length, -1)
        h_prev = np.zeros_like(lc.h)
        h_prev[:, 1:] = lc.h[:, :-1]
        d_w_x = flat_z.T @ flat_x
        d_w_h = flat_z.T @ h_prev.reshape(batch * length, h_dim)
        d_b = flat_z.sum(axis=0)
        layer_grads.append((d_w_x, d_w_h, d_b))
        if layer > 0:
            d_hidden = (flat_z @ w_x).reshape(batch, length, -1)

    grads: list = []
    for d_w_x, d_w_h, d_b in reversed(layer_grads):
        grads.extend([d_w_x, d_w_h, d_b])
    grads.extend([d_head_w, d_head_b])
    return grads


def _clip_global_norm(grads: list, clip_norm: float) -> float:
    total = 0.0
    for grad in grads:
        total += float((grad * grad).sum())
    norm = float(np.sqrt(total))
    if norm > clip_norm:
        scale = clip_norm / norm
        for grad in grads:
            grad *= scale
    return norm


class _Adam:
    def __init__(self, tensors: list, config: TrainConfig) -> None:
        self.cfg = config
        self.m = [np.zeros_like(t) for t in tensors]
        self.v = [np.zeros_like(t) for t in tensors]
        self.step = 0

    def update(self, tensors: list, grads: list) -> None:
        cfg = self.cfg
        self.step += 1
        correction1 = 1.0 - cfg.beta1**self.step
        correction2 = 1.0 - cfg.beta2**self.step
        for tensor, grad, m, v in zip(tensors, grads, self.m, self.v):
            m *= cfg.beta1
            m += (1.0 - cfg.beta1) * grad
            v *= cfg.beta2
            v += (1.0 - cfg.beta2) * grad * grad
            m_hat = m / correction1
            v_hat = v / correction2
            tensor -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


def train(
    train_config: TrainConfig,
    model_config: ModelConfig,
    rows: Sequence[SampleRow],
) -> tuple[ModelParams, list[float]]:
    """Mini-batch BPTT training; returns final params and mean per-epoch MAPE.

    Deterministic for fixed seeds: the model is initialized from
    model_config.seed and epoch shuffling is driven by train_config.seed.
    Raises on an empty dataset, on inference rows, and on non-finite loss.
    """
    if not rows:
        raise ValueError("training dataset is empty")
    sequences: list[np.ndarray] = []
    target_vecs: list[np.ndarray] = []
    for idx, row in enumerate(rows):
        if row.is_inference:
            raise ValueError(f"row {idx} is an inference row (no targets)")
        g, coloring = unpack_sample(row)
        if g.n > model_config.max_nodes:
            raise ValueError(
                f"row {idx} has {g.n} nodes, model allows {model_config.max_nodes}"
            )
        sequences.append(input_matrix(g))
        target_vecs.append(np.asarray(coloring, dtype=np.float64))

    params = init_params(model_config)
    tensors = params.tensors()
    optimizer = _Adam(tensors, train_config)
    shuffle_rng = np.random.default_rng(train_config.seed)
    count = len(rows)
    history: list[float] = []

    for epoch in range(train_config.epochs):
        order = shuffle_rng.permutation(count)
        epoch_loss_sum = 0.0
        for start in range(0, count, train_config.batch_size):
            idx = order[start : start + train_config.batch_size]
            batch_lengths = np.array([len(target_vecs[i]) for i in idx])
            pad = int(batch_lengths.max())
            xs = np.zeros((len(idx), pad, model_config.input_dim))
            targets = np.ones((len(idx), pad))
            for slot, i in enumerate(idx):
                n_i = batch_lengths[slot]
                xs[slot, :n_i] = sequences[i]
                targets[slot, :n_i] = target_vecs[i]
            losses, grads = batch_loss_and_grads(params, xs, targets, batch_lengths)
            if not np.isfinite(losses).all():
                raise RuntimeError(
                    f"non-finite loss in epoch {epoch + 1} "
                    f"(batch starting at {start}): {losses}"
                )
            epoch_loss_sum += float(losses.sum())
            _clip_global_norm(grads, train_config.clip_norm)
            optimizer.update(tensors, grads)
        history.append(epoch_loss_sum / count)
    return params, history


def grad_check(
    config: ModelConfig,
    g: Graph,
    target: Sequence[int],
    eps: float = 1e-5,
    params: Optional[ModelParams] = None,
) -> float:
    """Max relative error between BPTT and central finite differences.

    Perturbs every parameter of a freshly initialized (or provided) model by
    +-eps and compares (loss(th+eps) - loss(th-eps)) / 2 eps against the
    analytic gradient, using |a-b| / max(|a|, |b|, 1e-8). Intended for tiny
    configurations only; both ReLU and the absolute error have isolated
    kinks, so callers should pick seeds that keep activations away from them.
    """
    if params is None:
        params = init_params(config)
    xs = input_matrix(g)[np.newaxis]
    targets = np.asarray(target, dtype=np.float64)[np.newaxis]
    lengths = np.array([g.n])

    _, grads = batch_loss_and_grads(params, xs, targets, lengths)

    def loss_value() -> float:
        outputs, _ = run_lstm(params, xs, want_cache=False)
        err = np.abs(outputs[0] - targets[0]) / targets[0]
        return float(100.0 * err.sum() / g.n)

    worst = 0.0
    for tensor, grad in zip(params.tensors(), grads):
        flat_t = tensor.reshape(-1)
        flat_g = grad.reshape(-1)
        for j in range(flat_t.size):
            original = flat_t[j]
            flat_t[j] = original + eps
            plus = loss_value()
            flat_t[j] = original - eps
            minus = loss_value()
            flat_t[j] = original
            numeric = (plus - minus) / (2.0 * eps)
            analytic = flat_g[j]
            rel = abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)
            worst = max(worst, rel)
    return worst
