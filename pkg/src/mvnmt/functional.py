"""Composite differentiable functions built from :mod:`mvnmt.autograd` ops."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import autograd as ag
from .autograd import Tensor
from .errors import InvalidDistributionError, ShapeError

PROB_FLOOR = 1e-9


def _as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def _check_tau(tau: float) -> None:
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError(f"temperature must be positive and finite, got {tau}")


def softmax_with_temperature(z, tau: float = 1.0, axis: int = -1) -> Tensor:
    """``exp(z_i / tau) / sum_j exp(z_j / tau)`` along ``axis``."""
    _check_tau(tau)
    z = _as_tensor(z)
    if not np.all(np.isfinite(z.data)):
        raise ValueError("softmax input contains non-finite values")
    return ag.softmax(z if tau == 1.0 else ag.scale(z, 1.0 / tau), axis=axis)


def log_softmax_with_temperature(z, tau: float = 1.0, axis: int = -1) -> Tensor:
    _check_tau(tau)
    z = _as_tensor(z)
    return ag.log_softmax(z if tau == 1.0 else ag.scale(z, 1.0 / tau), axis=axis)


@dataclass
class LayerNormParams:
    gain: Tensor
    bias: Tensor
    eps: float = 1e-5

    def __post_init__(self):
        self.gain = _as_tensor(self.gain)
        self.bias = _as_tensor(self.bias)
        if self.gain.ndim != 1 or self.gain.shape != self.bias.shape:
            raise ShapeError(f"gain {self.gain.shape} and bias {self.bias.shape} must be equal-length vectors")
        if not self.eps > 0:
            raise ValueError("layer norm epsilon must be positive")

    @property
    def width(self) -> int:
        return self.gain.shape[0]

    @classmethod
    def identity(cls, width: int, eps: float = 1e-5, dtype=None) -> "LayerNormParams":
        return cls(ag.parameter(np.ones(width), dtype), ag.parameter(np.zeros(width), dtype), eps)


def layer_norm_affine(x, params: LayerNormParams, noise: Optional[np.ndarray] = None) -> Tensor:
    """Normalize ``x`` over its last axis, then apply gain and bias."""
    x = _as_tensor(x)
    if x.shape[-1] != params.width:
        raise ShapeError(f"input width {x.shape[-1]} != layer norm width {params.width}")
    return ag.layer_norm(x, params.gain, params.bias, params.eps, noise)


def _check_rows(p: np.ndarray, name: str, tol: float = 1e-5) -> None:
    sums = p.sum(axis=-1)
    if not np.all(np.abs(sums - 1.0) <= tol):
        worst = float(np.max(np.abs(sums - 1.0)))
        raise InvalidDistributionError(f"rows of {name} must sum to 1 (max deviation {worst:.3g})")


def kl_divergence_rows(p, q, floor: float = PROB_FLOOR) -> Tensor:
    """Per-row ``sum_v p(v) log(p(v) / q(v))``.

    Both arguments carry gradient unless the caller detaches one of them.
    Probabilities are clamped to ``floor`` inside the logarithm, which makes
    ``0 log 0`` contribute nothing.
    """
    p, q = _as_tensor(p), _as_tensor(q)
    if p.shape != q.shape:
        raise ShapeError(f"p {p.shape} and q {q.shape} differ in shape")
    _check_rows(p.data, "p")
    _check_rows(q.data, "q")
    log_ratio = ag.log(p, floor) - ag.log(q, floor)
    return ag.sum_(ag.mul(p, log_ratio), axis=-1)


def label_smoothed_nll(logprobs, gold, eps_ls: float = 0.0) -> Tensor:
    """Cross entropy against a target with ``1 - eps_ls`` on the gold label.

    The remaining ``eps_ls`` mass is spread evenly over the ``V - 1`` other
    labels.  ``logprobs`` has shape ``[..., V]`` and ``gold`` the leading
    shape; the result is per-position.
    """
    logprobs = _as_tensor(logprobs)
    gold = np.asarray(gold)
    vocab = logprobs.shape[-1]
    if not 0.0 <= eps_ls < 1.0:
        raise ValueError(f"label smoothing must lie in [0, 1), got {eps_ls}")
    if gold.size and (gold.min() < 0 or gold.max() >= vocab):
        raise IndexError(f"gold label out of range for vocabulary of size {vocab}")
    gold_lp = ag.take_last(logprobs, gold)
    if eps_ls == 0.0:
        return ag.neg(gold_lp)
    if vocab < 2:
        raise ValueError("label smoothing needs at least two labels")
    other = ag.sum_(logprobs, axis=-1) - gold_lp
    return ag.neg(ag.scale(gold_lp, 1.0 - eps_ls) + ag.scale(other, eps_ls / (vocab - 1)))
