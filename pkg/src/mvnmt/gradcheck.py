"""Central finite-difference gradient checking.

Only the forward pass of the function under test is used here, so the
numeric gradient is independent of the tape's backward rules.
"""

from __future__ import annotations

from typing import Callable, Dict, Sequence

import numpy as np

from .autograd import Tensor


def numeric_grad(fn: Callable[[], Tensor], param: Tensor, h: float = 1e-6) -> np.ndarray:
    grad = np.zeros_like(param.data, dtype=np.float64)
    flat = param.data.reshape(-1)
    out = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + h
        up = float(fn().data)
        flat[i] = orig - h
        down = float(fn().data)
        flat[i] = orig
        out[i] = (up - down) / (2 * h)
    return grad


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    """Max-norm relative error, guarded against vanishing gradients."""
    denom = max(np.max(np.abs(analytic)), np.max(np.abs(numeric)), 1e-8)
    return float(np.max(np.abs(analytic - numeric)) / denom)


def check_gradients(
    fn: Callable[[], Tensor],
    params: Sequence[Tensor],
    h: float = 1e-6,
    max_entries: int = None,
    rng: np.random.Generator = None,
) -> Dict[int, float]:
    """Return the relative error of the tape gradient for each parameter.

    With ``max_entries`` set, only a random subset of coordinates per
    parameter is probed (the rest of the gradient is still compared for
    those coordinates only).
    """
    for p in params:
        p.grad = None
    loss = fn()
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]
    errors = {}
    for k, p in enumerate(params):
        if max_entries is None or p.size <= max_entries:
            errors[k] = relative_error(analytic[k], numeric_grad(fn, p, h))
            continue
        rng = rng or np.random.default_rng(0)
        idx = rng.choice(p.size, size=max_entries, replace=False)
        flat = p.data.reshape(-1)
        num = np.empty(len(idx))
        for j, i in enumerate(idx):
            orig = flat[i]
            flat[i] = orig + h
            up = float(fn().data)
            flat[i] = orig - h
            down = float(fn().data)
            flat[i] = orig
            num[j] = (up - down) / (2 * h)
        errors[k] = relative_error(analytic[k].reshape(-1)[idx], num)
    return errors
