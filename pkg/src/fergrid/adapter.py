"""Per-agent classifier: LayerNorm -> Linear -> GELU -> Dropout -> Linear -> Softmax.

Forward pass, analytic gradients of the label-smoothed cross-entropy, and
AdamW with decoupled weight decay are implemented by hand on numpy arrays.
All parameters live in one flat buffer; the named tensors are views into it,
which keeps optimizer steps to a handful of vectorized passes.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.special import erf

from .errors import NumericError
from .labels import N_CLASSES, Expression

_INV_SQRT2 = 0.7071067811865476
_INV_SQRT_2PI = 0.3989422804014327


@dataclass(frozen=True)
class TrainingConfig:
    learning_rate: float = 3e-4
    weight_decay: float = 5e-2
    label_smoothing: float = 0.05
    dropout: float = 0.1
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    hidden: int = 512
    ln_eps: float = 1e-5

    def validate(self) -> None:
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.weight_decay < 0:
            raise ValueError("weight_decay must be >= 0")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError("label_smoothing must lie in [0, 1)")
        if not 0.0 <= self.dropout < 1.0:
            raise ValueError("dropout must lie in [0, 1)")
        if not (0.0 <= self.adam_beta1 < 1.0 and 0.0 <= self.adam_beta2 < 1.0):
            raise ValueError("adam betas must lie in [0, 1)")
        if self.adam_eps < 0 or self.ln_eps <= 0:
            raise ValueError("bad epsilon")
        if self.hidden < 1:
            raise ValueError("hidden must be >= 1")


class AdapterParams:
    """Classifier weights in a single flat array with named views.

    Layout order: ln_gamma (D), ln_beta (D), W1 (H*D), b1 (H), W2 (7*H),
    b2 (7). Weight decay applies to the W1 and W2 slices only.
    """

    __slots__ = ("dim", "hidden", "data", "ln_gamma", "ln_beta", "W1", "b1", "W2", "b2",
                 "_w1_slice", "_w2_slice")

    def __init__(self, dim: int, hidden: int, data: np.ndarray | None = None,
                 dtype=np.float64):
        self.dim = dim
        self.hidden = hidden
        n = self.size(dim, hidden)
        if data is None:
            data = np.zeros(n, dtype=dtype)
        elif data.shape != (n,):
            raise ValueError(f"flat buffer must have shape ({n},), got {data.shape}")
        self.data = data
        o = 0
        self.ln_gamma = data[o : o + dim]
        o += dim
        self.ln_beta = data[o : o + dim]
        o += dim
        self._w1_slice = slice(o, o + hidden * dim)
        self.W1 = data[self._w1_slice].reshape(hidden, dim)
        o += hidden * dim
        self.b1 = data[o : o + hidden]
        o += hidden
        self._w2_slice = slice(o, o + N_CLASSES * hidden)
        self.W2 = data[self._w2_slice].reshape(N_CLASSES, hidden)
        o += N_CLASSES * hidden
        self.b2 = data[o : o + N_CLASSES]

    @staticmethod
    def size(dim: int, hidden: int) -> int:
        return 2 * dim + hidden * dim + hidden + N_CLASSES * hidden + N_CLASSES

    def copy(self) -> "AdapterParams":
        return AdapterParams(self.dim, self.hidden, self.data.copy())

    def weight_slices(self) -> tuple[slice, slice]:
        return self._w1_slice, self._w2_slice


class OptimizerState:
    """AdamW moments (same flat layout as the parameters) and step counter."""

    __slots__ = ("m", "v", "t")

    def __init__(self, n: int, dtype=np.float64):
        self.m = np.zeros(n, dtype=dtype)
        self.v = np.zeros(n, dtype=dtype)
        self.t = 0

    def copy(self) -> "OptimizerState":
        out = OptimizerState(self.m.shape[0], self.m.dtype)
        out.m[:] = self.m
        out.v[:] = self.v
        out.t = self.t
        return out


class Prediction(NamedTuple):
    probs: np.ndarray
    label: Expression
    confidence: float


class ForwardCache(NamedTuple):
    x_hat: np.ndarray
    h0: np.ndarray
    z1: np.ndarray
    gelu_cdf: np.ndarray
    dropped: np.ndarray
    mask: np.ndarray | None
    log_probs: np.ndarray
    probs: np.ndarray


def init_params(dim: int, hidden: int, seed,
                dtype=np.float64) -> tuple[AdapterParams, OptimizerState]:
    """Fan-in uniform init for the linear layers, identity LayerNorm, zero biases.

    `seed` is SeedSequence entropy: an int or a tuple of ints.
    """
    if dim < 1 or hidden < 1:
        raise ValueError("dim and hidden must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    params = AdapterParams(dim, hidden, dtype=dtype)
    params.ln_gamma[:] = 1.0
    bound1 = np.sqrt(1.0 / dim)
    params.W1[:] = rng.uniform(-bound1, bound1, size=(hidden, dim))
    bound2 = np.sqrt(1.0 / hidden)
    params.W2[:] = rng.uniform(-bound2, bound2, size=(N_CLASSES, hidden))
    opt = OptimizerState(params.data.shape[0], dtype=dtype)
    return params, opt


def draw_dropout_mask(hidden: int, dropout: float, rng: np.random.Generator,
                      dtype=np.float64) -> np.ndarray:
    """Inverted-dropout mask: entries are 0 or 1/(1-p)."""
    if dropout == 0.0:
        return np.ones(hidden, dtype=dtype)
    keep = 1.0 - dropout
    return ((rng.random(hidden) < keep) / keep).astype(dtype)


def forward(params: AdapterParams, x: np.ndarray, cfg: TrainingConfig,
            train: bool = False,
            dropout_mask: np.ndarray | None = None) -> tuple[np.ndarray, ForwardCache]:
    """Run the stack on one embedding; returns (probs, cache for backward).

    Eval mode applies no dropout; train mode requires an explicit mask.
    """
    x = np.asarray(x, dtype=params.data.dtype)
    if not np.isfinite(x).all():
        raise NumericError("non-finite input embedding")
    if train and dropout_mask is None:
        raise ValueError("train mode requires a dropout mask")

    mu = x.mean()
    var = x.var()
    x_hat = (x - mu) / np.sqrt(var + cfg.ln_eps)
    h0 = params.ln_gamma * x_hat + params.ln_beta
    z1 = params.W1 @ h0 + params.b1
    gelu_cdf = 0.5 * (1.0 + erf(z1 * _INV_SQRT2))
    a = z1 * gelu_cdf
    dropped = a * dropout_mask if train else a
    z2 = params.W2 @ dropped + params.b2

    shifted = z2 - z2.max()
    log_probs = shifted - np.log(np.exp(shifted).sum())
    probs = np.exp(log_probs)
    if not np.isfinite(probs).all():
        raise NumericError("non-finite classifier output")
    cache = ForwardCache(x_hat, h0, z1, gelu_cdf, dropped,
                         dropout_mask if train else None, log_probs, probs)
    return probs, cache


def loss_and_grad(params: AdapterParams, x: np.ndarray, y: int, cfg: TrainingConfig,
                  dropout_mask: np.ndarray) -> tuple[float, AdapterParams]:
    """Label-smoothed cross-entropy and its exact gradients.

    The smoothed target is (1-eps)*onehot(y) + eps/7. Gradients are
    returned in an AdapterParams-shaped flat block.
    """
    probs, cache = forward(params, x, cfg, train=True, dropout_mask=dropout_mask)
    dtype = params.data.dtype
    eps = cfg.label_smoothing
    q = np.full(N_CLASSES, eps / N_CLASSES, dtype=dtype)
    q[int(y)] += 1.0 - eps
    loss = float(-(q * cache.log_probs).sum())
    if not np.isfinite(loss):
        raise NumericError("non-finite loss")

    grads = AdapterParams(params.dim, params.hidden, dtype=dtype)
    dz2 = probs - q
    np.outer(dz2, cache.dropped, out=grads.W2)
    grads.b2[:] = dz2
    dd = params.W2.T @ dz2
    da = dd * cache.mask
    pdf = _INV_SQRT_2PI * np.exp(-0.5 * cache.z1 * cache.z1)
    dz1 = da * (cache.gelu_cdf + cache.z1 * pdf)
    np.outer(dz1, cache.h0, out=grads.W1)
    grads.b1[:] = dz1
    dh0 = params.W1.T @ dz1
    grads.ln_gamma[:] = dh0 * cache.x_hat
    grads.ln_beta[:] = dh0
    return loss, grads


def adamw_step(params: AdapterParams, opt: OptimizerState, grads: AdapterParams,
               cfg: TrainingConfig) -> None:
    """One decoupled-weight-decay Adam update, in place.

    Decay touches only the W1/W2 slices; biases and LayerNorm parameters
    are exempt.
    """
    opt.t += 1
    scalar = params.data.dtype.type
    g = grads.data
    b1 = scalar(cfg.adam_beta1)
    b2 = scalar(cfg.adam_beta2)
    m, v = opt.m, opt.v

    np.multiply(m, b1, out=m)
    buf = g * scalar(1.0 - cfg.adam_beta1)
    np.add(m, buf, out=m)
    np.multiply(v, b2, out=v)
    np.multiply(g, g, out=buf)
    np.multiply(buf, scalar(1.0 - cfg.adam_beta2), out=buf)
    np.add(v, buf, out=v)

    bias1 = 1.0 - cfg.adam_beta1 ** opt.t
    bias2 = 1.0 - cfg.adam_beta2 ** opt.t
    np.divide(v, scalar(bias2), out=buf)
    np.sqrt(buf, out=buf)
    np.add(buf, scalar(cfg.adam_eps), out=buf)
    np.multiply(buf, scalar(bias1), out=buf)
    np.divide(m, buf, out=buf)  # bias-corrected m / (sqrt(v_hat) + eps)
    if cfg.weight_decay != 0.0:
        # decoupled decay, computed from the pre-update weights
        wd = scalar(cfg.weight_decay)
        w1, w2 = params.weight_slices()
        buf[w1] += wd * params.data[w1]
        buf[w2] += wd * params.data[w2]
    np.multiply(buf, scalar(cfg.learning_rate), out=buf)
    np.subtract(params.data, buf, out=params.data)


def predict(params: AdapterParams, x: np.ndarray,
            cfg: TrainingConfig | None = None) -> Prediction:
    """Deterministic eval-mode classification with argmax label and confidence."""
    probs, _ = forward(params, x, cfg or _EVAL_CFG, train=False)
    label = Expression(int(np.argmax(probs)))  # argmax takes the lowest index on ties
    return Prediction(probs=probs, label=label, confidence=float(probs[label]))


_EVAL_CFG = TrainingConfig()


def train_step(params: AdapterParams, opt: OptimizerState, x: np.ndarray, y: int,
               cfg: TrainingConfig, rng: np.random.Generator) -> float:
    """Draw a dropout mask, backprop one sample, apply one AdamW update."""
    mask = draw_dropout_mask(params.hidden, cfg.dropout, rng, dtype=params.data.dtype)
    loss, grads = loss_and_grad(params, x, y, cfg, mask)
    adamw_step(params, opt, grads, cfg)
    return loss
