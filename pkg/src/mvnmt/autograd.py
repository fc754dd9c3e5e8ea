"""Dense tensors with reverse-mode automatic differentiation.

Every differentiable operation produces a new :class:`Tensor` that remembers
its parents and a closure mapping the output gradient onto them.  Calling
:meth:`Tensor.backward` on a scalar orders the recorded graph topologically
(the :class:`Tape`) and replays the closures in reverse.

The op set is deliberately small: it covers exactly what an attention-based
encoder-decoder and its training losses need.
"""

from __future__ import annotations

import contextlib
import threading
from typing import Callable, Iterable, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import ShapeError

ArrayLike = Union[np.ndarray, float, int, Sequence]

_state = threading.local()


def _get(name, default):
    return getattr(_state, name, default)


def get_default_dtype() -> np.dtype:
    return _get("dtype", np.dtype(np.float32))


def set_default_dtype(dtype) -> None:
    dtype = np.dtype(dtype)
    if dtype not in (np.float32, np.float64):
        raise ValueError(f"unsupported dtype {dtype}")
    _state.dtype = dtype


@contextlib.contextmanager
def precision(dtype):
    """Temporarily change the dtype used for newly created tensors."""
    old = get_default_dtype()
    set_default_dtype(dtype)
    try:
        yield
    finally:
        _state.dtype = old


def is_grad_enabled() -> bool:
    return _get("grad_enabled", True)


@contextlib.contextmanager
def no_grad():
    """Disable graph recording; used for inference."""
    old = is_grad_enabled()
    _state.grad_enabled = False
    try:
        yield
    finally:
        _state.grad_enabled = old


class Tensor:
    """An n-dimensional float array that may take part in differentiation."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward", "op")
    __array_priority__ = 100

    def __init__(self, data: ArrayLike, requires_grad: bool = False, dtype=None):
        if isinstance(data, Tensor):
            data = data.data
        arr = np.asarray(data)
        if dtype is not None:
            arr = arr.astype(dtype, copy=False)
        elif not isinstance(data, np.ndarray) or arr.dtype not in (np.float32, np.float64):
            arr = arr.astype(get_default_dtype())
        self.data: np.ndarray = arr
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = bool(requires_grad)
        self._parents: Tuple[Tensor, ...] = ()
        self._backward: Optional[Callable[[np.ndarray], None]] = None
        self.op = "leaf"

    # ------------------------------------------------------------------ basics
    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self):
        return self.data.dtype

    @property
    def size(self) -> int:
        return self.data.size

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def __repr__(self):
        flag = ", requires_grad=True" if self.requires_grad else ""
        return f"Tensor(shape={self.shape}, dtype={self.dtype}, op={self.op}{flag})"

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.array(g, dtype=self.data.dtype, copy=True)
        else:
            self.grad += g

    # ---------------------------------------------------------------- backward
    def backward(self, grad: Optional[np.ndarray] = None) -> "Tape":
        """Propagate d(self)/d(leaf) into ``.grad`` of every reachable leaf.

        Only scalar tensors may start a backward pass.
        """
        if self.data.size != 1 or grad is not None and np.shape(grad) != self.shape:
            raise ShapeError(f"backward() needs a scalar loss, got shape {self.shape}")
        tape = Tape.from_output(self)
        seed = np.ones_like(self.data) if grad is None else np.asarray(grad, self.dtype)
        self._accumulate(seed)
        for node in reversed(tape.nodes):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)
        # interior gradients are not part of the contract; free them
        for node in tape.nodes:
            if node._backward is not None:
                node.grad = None
        return tape

    # -------------------------------------------------------------- operators
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, neg(_wrap(other, self)))

    def __rsub__(self, other):
        return add(_wrap(other, self), neg(self))

    def __mul__(self, other):
        if not isinstance(other, Tensor):
            return scale(self, other)
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Tensor):
            raise TypeError("division by a Tensor is not part of the op set")
        return scale(self, 1.0 / other)

    def __neg__(self):
        return neg(self)

    def __matmul__(self, other):
        return matmul(self, other)

    def sum(self, axis=None, keepdims=False):
        return sum_(self, axis=axis, keepdims=keepdims)

    def mean(self, axis=None, keepdims=False):
        return mean(self, axis=axis, keepdims=keepdims)

    def reshape(self, *shape):
        if len(shape) == 1 and isinstance(shape[0], (tuple, list)):
            shape = tuple(shape[0])
        return reshape(self, shape)

    def transpose(self, *axes):
        if len(axes) == 1 and isinstance(axes[0], (tuple, list)):
            axes = tuple(axes[0])
        return transpose(self, axes or None)


class Tape:
    """Topologically ordered record of the operations behind an output.

    Every node appears after all the producers of its inputs.
    """

    def __init__(self, nodes: Sequence[Tensor]):
        self.nodes = list(nodes)

    @classmethod
    def from_output(cls, out: Tensor) -> "Tape":
        order = []
        seen = set()
        stack = [(out, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in seen:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                if id(p) not in seen:
                    stack.append((p, False))
        return cls(order)

    def count(self, op: str) -> int:
        return sum(1 for n in self.nodes if n.op == op)

    def __len__(self):
        return len(self.nodes)


def _wrap(x, like: Tensor) -> Tensor:
    if isinstance(x, Tensor):
        return x
    return Tensor(np.asarray(x, dtype=like.dtype))


def _make(data: np.ndarray, parents: Iterable[Tensor], backward, op: str) -> Tensor:
    out = Tensor.__new__(Tensor)
    out.data = data
    out.grad = None
    out.op = op
    parents = tuple(parents)
    if is_grad_enabled() and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(p for p in parents if p.requires_grad)
        out._backward = backward
    else:
        out.requires_grad = False
        out._parents = ()
        out._backward = None
    return out


def unbroadcast(g: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum ``g`` down to ``shape``, undoing numpy broadcasting."""
    if g.shape == shape:
        return g
    while g.ndim > len(shape):
        g = g.sum(axis=0)
    for axis, n in enumerate(shape):
        if n == 1 and g.shape[axis] != 1:
            g = g.sum(axis=axis, keepdims=True)
    return g


# --------------------------------------------------------------------- ops


def add(a: Tensor, b: Tensor) -> Tensor:
    a, b = _wrap(a, b if isinstance(b, Tensor) else a), _wrap(b, a)

    def backward(g):
        if a.requires_grad:
            a._accumulate(unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(unbroadcast(g, b.shape))

    return _make(a.data + b.data, (a, b), backward, "add")


def neg(a: Tensor) -> Tensor:
    return _make(-a.data, (a,), lambda g: a._accumulate(-g), "neg")


def mul(a: Tensor, b: Tensor) -> Tensor:
    def backward(g):
        if a.requires_grad:
            a._accumulate(unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(unbroadcast(g * a.data, b.shape))

    return _make(a.data * b.data, (a, b), backward, "mul")


def scale(a: Tensor, c: float) -> Tensor:
    c = a.dtype.type(c)
    return _make(a.data * c, (a,), lambda g: a._accumulate(g * c), "scale")


def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Batched matrix product over the last two axes, with broadcasting."""
    if a.ndim < 2 or b.ndim < 2:
        raise ShapeError("matmul operands need at least two dimensions")
    if a.shape[-1] != b.shape[-2]:
        raise ShapeError(f"matmul shape mismatch {a.shape} @ {b.shape}")

    def backward(g):
        if a.requires_grad:
            a._accumulate(unbroadcast(g @ np.swapaxes(b.data, -1, -2), a.shape))
        if b.requires_grad:
            b._accumulate(unbroadcast(np.swapaxes(a.data, -1, -2) @ g, b.shape))

    return _make(a.data @ b.data, (a, b), backward, "matmul")


def transpose(a: Tensor, axes: Optional[Sequence[int]] = None) -> Tensor:
    if axes is None:
        axes = tuple(reversed(range(a.ndim)))
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    return _make(
        np.transpose(a.data, axes),
        (a,),
        lambda g: a._accumulate(np.transpose(g, inverse)),
        "transpose",
    )


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    old = a.shape
    return _make(
        a.data.reshape(shape), (a,), lambda g: a._accumulate(g.reshape(old)), "reshape"
    )


def concat(tensors: Sequence[Tensor], axis: int = -1) -> Tensor:
    tensors = list(tensors)
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, bounds[:-1], bounds[1:]):
            if t.requires_grad:
                idx = [slice(None)] * g.ndim
                idx[axis] = slice(lo, hi)
                t._accumulate(g[tuple(idx)])

    return _make(np.concatenate([t.data for t in tensors], axis=axis), tensors, backward, "concat")


def split(a: Tensor, sections: int, axis: int = -1) -> list:
    """Split into ``sections`` equal parts along ``axis`` (inverse of concat)."""
    n = a.shape[axis]
    if n % sections:
        raise ShapeError(f"cannot split axis of size {n} into {sections}")
    step = n // sections
    outs = []
    for i in range(sections):
        idx = [slice(None)] * a.ndim
        idx[axis] = slice(i * step, (i + 1) * step)
        idx = tuple(idx)

        def backward(g, idx=idx):
            full = np.zeros_like(a.data)
            full[idx] = g
            a._accumulate(full)

        outs.append(_make(a.data[idx], (a,), backward, "split"))
    return outs


def embedding(weight: Tensor, ids: np.ndarray) -> Tensor:
    """Gather rows of ``weight`` (shape [V, d]) for integer ``ids``."""
    ids = np.asarray(ids)
    if ids.size and (ids.min() < 0 or ids.max() >= weight.shape[0]):
        raise IndexError(f"token id out of range for vocabulary of size {weight.shape[0]}")

    def backward(g):
        full = np.zeros_like(weight.data)
        np.add.at(full, ids.reshape(-1), g.reshape(-1, weight.shape[1]))
        weight._accumulate(full)

    return _make(weight.data[ids], (weight,), backward, "embedding")


def take_last(a: Tensor, index: np.ndarray) -> Tensor:
    """Select ``a[..., index[...]]``: one entry of the last axis per row."""
    index = np.asarray(index)
    if index.shape != a.shape[:-1]:
        raise ShapeError(f"index shape {index.shape} does not match {a.shape[:-1]}")
    if index.size and (index.min() < 0 or index.max() >= a.shape[-1]):
        raise IndexError(f"index out of range for last axis of size {a.shape[-1]}")
    expanded = index[..., None]

    def backward(g):
        full = np.zeros_like(a.data)
        np.put_along_axis(full, expanded, g[..., None], axis=-1)
        a._accumulate(full)

    return _make(np.take_along_axis(a.data, expanded, axis=-1)[..., 0], (a,), backward, "take")


def dropout(a: Tensor, p: float, rng: Optional[np.random.Generator]) -> Tensor:
    """Inverted dropout; identity when ``rng`` is None or ``p`` is zero."""
    if rng is None or p <= 0.0:
        return a
    if not 0.0 <= p < 1.0:
        raise ValueError(f"dropout probability must be in [0, 1), got {p}")
    keep = (rng.random(a.shape) >= p).astype(a.dtype) * a.dtype.type(1.0 / (1.0 - p))
    return _make(a.data * keep, (a,), lambda g: a._accumulate(g * keep), "dropout")


def relu(a: Tensor) -> Tensor:
    pos = a.data > 0
    return _make(np.where(pos, a.data, 0).astype(a.dtype), (a,), lambda g: a._accumulate(g * pos), "relu")


def exp(a: Tensor) -> Tensor:
    out = np.exp(a.data)
    return _make(out, (a,), lambda g: a._accumulate(g * out), "exp")


def log(a: Tensor, floor: float = 1e-9) -> Tensor:
    """Natural log of ``max(a, floor)``; no gradient below the floor."""
    clipped = np.maximum(a.data, a.dtype.type(floor))
    live = a.data >= floor

    def backward(g):
        a._accumulate(np.where(live, g / clipped, 0).astype(a.dtype))

    return _make(np.log(clipped), (a,), backward, "log")


def softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    out = e / e.sum(axis=axis, keepdims=True)

    def backward(g):
        a._accumulate(out * (g - (g * out).sum(axis=axis, keepdims=True)))

    return _make(out, (a,), backward, "softmax")


def log_softmax(a: Tensor, axis: int = -1) -> Tensor:
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    out = shifted - np.log(np.exp(shifted).sum(axis=axis, keepdims=True))

    def backward(g):
        a._accumulate(g - np.exp(out) * g.sum(axis=axis, keepdims=True))

    return _make(out, (a,), backward, "log_softmax")


def layer_norm(
    x: Tensor,
    gain: Tensor,
    bias: Tensor,
    eps: float = 1e-5,
    noise: Optional[np.ndarray] = None,
) -> Tensor:
    """``gain * (normalize(x) + noise) + bias`` over the last axis.

    ``noise`` is a constant added to the normalized value before the affine
    map; it receives no gradient.
    """
    d = x.shape[-1]
    if gain.shape != (d,) or bias.shape != (d,):
        raise ShapeError(f"layer norm width {d} does not match gain {gain.shape} / bias {bias.shape}")
    mu = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mu
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv = 1.0 / np.sqrt(var + x.dtype.type(eps))
    xhat = centered * inv
    normed = xhat if noise is None else xhat + noise.astype(x.dtype, copy=False)
    out = normed * gain.data + bias.data

    def backward(g):
        if gain.requires_grad:
            gain._accumulate(unbroadcast(g * normed, gain.shape))
        if bias.requires_grad:
            bias._accumulate(unbroadcast(g, bias.shape))
        if x.requires_grad:
            dxhat = g * gain.data
            dx = inv * (
                dxhat
                - dxhat.mean(axis=-1, keepdims=True)
                - xhat * (dxhat * xhat).mean(axis=-1, keepdims=True)
            )
            x._accumulate(dx)

    return _make(out, (x, gain, bias), backward, "layer_norm")


def sum_(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    shape = a.shape

    def backward(g):
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, shape))

    return _make(np.asarray(a.data.sum(axis=axis, keepdims=keepdims)), (a,), backward, "sum")


def mean(a: Tensor, axis=None, keepdims: bool = False) -> Tensor:
    n = a.size if axis is None else int(np.prod([a.shape[i] for i in np.atleast_1d(axis)]))
    return scale(sum_(a, axis=axis, keepdims=keepdims), 1.0 / n)


def masked_fill(a: Tensor, mask: np.ndarray, value: float) -> Tensor:
    """Replace entries where ``mask`` is true; those entries get no gradient."""
    mask = np.broadcast_to(np.asarray(mask, dtype=bool), a.shape)
    out = np.where(mask, a.dtype.type(value), a.data)
    return _make(out, (a,), lambda g: a._accumulate(np.where(mask, 0, g).astype(a.dtype)), "masked_fill")


def detach(a: Tensor) -> Tensor:
    """Same values, no path back to ``a``."""
    out = Tensor(a.data)
    out.op = "detach"
    return out


def parameter(data: ArrayLike, dtype=None) -> Tensor:
    return Tensor(np.array(data, dtype=dtype or get_default_dtype()), requires_grad=True)
