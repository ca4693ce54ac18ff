"""Reverse-mode autodiff over 2-D float64 matrices.

A `Tensor` wraps a row-major numpy array and remembers how it was produced;
calling `backward()` on a 1x1 result accumulates gradients into every
reachable `Parameter`. Ops are deliberately few: dense matmul, elementwise
arithmetic, the activations the encoders need, and row gather/stack for
assembling per-hemisphere blocks. Everything is float64 and deterministic.
"""

from __future__ import annotations

import numpy as np

from ..errors import ConfigError, ShapeError

LOG_FLOOR = 1e-7


def _as_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    elif arr.ndim != 2:
        raise ShapeError(f"tensors are 2-D matrices, got ndim={arr.ndim}")
    return arr


class Tensor:
    """A 2-D float64 matrix node in the computation graph."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad=False, _parents=(), _backward=None):
        self.data = _as_matrix(data)
        self.grad = None
        self.requires_grad = bool(requires_grad) or any(p.requires_grad for p in _parents)
        self._parents = _parents
        self._backward = _backward

    @property
    def shape(self):
        return self.data.shape

    def item(self) -> float:
        if self.data.size != 1:
            raise ShapeError(f"item() needs a 1x1 tensor, got {self.data.shape}")
        return float(self.data[0, 0])

    def _accumulate(self, g: np.ndarray) -> None:
        if self.grad is None:
            self.grad = g.copy()
        else:
            self.grad += g

    def backward(self) -> None:
        """Accumulate d(self)/d(leaf) into .grad for every reachable tensor."""
        if self.data.shape != (1, 1):
            raise ShapeError(f"backward() needs a scalar loss, got shape {self.data.shape}")
        topo: list[Tensor] = []
        seen: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                topo.append(node)
                continue
            if id(node) in seen or not node.requires_grad:
                continue
            seen.add(id(node))
            stack.append((node, True))
            for p in node._parents:
                stack.append((p, False))
        self._accumulate(np.ones((1, 1)))
        for node in reversed(topo):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    def __matmul__(self, other):
        return matmul(self, other)

    def __add__(self, other):
        return add(self, other)

    def __sub__(self, other):
        return add(self, scale(other, -1.0))

    def __mul__(self, other):
        return hadamard(self, other)

    def __repr__(self):
        return f"Tensor(shape={self.data.shape}, requires_grad={self.requires_grad})"


class Parameter(Tensor):
    """A trainable tensor carrying its Adam state."""

    __slots__ = ("name", "adam_m", "adam_v", "adam_step")

    def __init__(self, data, name: str = ""):
        data = _as_matrix(data)
        if not np.all(np.isfinite(data)):
            raise ConfigError(f"parameter {name!r} initialised with non-finite values")
        super().__init__(data, requires_grad=True)
        self.name = name
        self.adam_m = np.zeros_like(self.data)
        self.adam_v = np.zeros_like(self.data)
        self.adam_step = 0

    def zero_grad(self) -> None:
        self.grad = None


def constant(data) -> Tensor:
    """Wrap fixed data (graph structure, features, masks) as a leaf tensor."""
    arr = _as_matrix(data)
    if not np.all(np.isfinite(arr)):
        raise ConfigError("constant tensor contains non-finite values")
    return Tensor(arr)


def _unbroadcast(g: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    if g.shape == shape:
        return g
    out = g
    if shape[0] == 1 and g.shape[0] != 1:
        out = out.sum(axis=0, keepdims=True)
    if shape[1] == 1 and g.shape[1] != 1:
        out = out.sum(axis=1, keepdims=True)
    return out


def matmul(a: Tensor, b: Tensor) -> Tensor:
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shapes do not chain: {a.shape} @ {b.shape}")
    out = Tensor(a.data @ b.data, _parents=(a, b))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g @ b.data.T)
        if b.requires_grad:
            b._accumulate(a.data.T @ g)

    out._backward = backward
    return out


def _broadcastable(sa, sb) -> bool:
    return all(x == y or x == 1 or y == 1 for x, y in zip(sa, sb))


def add(a: Tensor, b: Tensor) -> Tensor:
    if not _broadcastable(a.shape, b.shape):
        raise ShapeError(f"cannot add shapes {a.shape} and {b.shape}")
    out = Tensor(a.data + b.data, _parents=(a, b))

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g, b.shape))

    out._backward = backward
    return out


def hadamard(a: Tensor, b: Tensor) -> Tensor:
    if not _broadcastable(a.shape, b.shape):
        raise ShapeError(f"cannot take elementwise product of shapes {a.shape} and {b.shape}")
    out = Tensor(a.data * b.data, _parents=(a, b))

    def backward(g):
        if a.requires_grad:
            a._accumulate(_unbroadcast(g * b.data, a.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(g * a.data, b.shape))

    out._backward = backward
    return out


def scale(a: Tensor, c: float) -> Tensor:
    c = float(c)
    out = Tensor(a.data * c, _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * c)

    out._backward = backward
    return out


def shift(a: Tensor, c: float) -> Tensor:
    out = Tensor(a.data + float(c), _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g)

    out._backward = backward
    return out


def transpose(a: Tensor) -> Tensor:
    out = Tensor(a.data.T, _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g.T)

    out._backward = backward
    return out


def relu(a: Tensor) -> Tensor:
    mask = a.data > 0
    out = Tensor(np.where(mask, a.data, 0.0), _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * mask)

    out._backward = backward
    return out


def sigmoid(a: Tensor) -> Tensor:
    # split by sign for overflow-free evaluation
    x = a.data
    s = np.empty_like(x)
    pos = x >= 0
    s[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    s[~pos] = ex / (1.0 + ex)
    out = Tensor(s, _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(g * s * (1.0 - s))

    out._backward = backward
    return out


def softmax_rows(a: Tensor) -> Tensor:
    z = a.data - a.data.max(axis=1, keepdims=True)
    e = np.exp(z)
    y = e / e.sum(axis=1, keepdims=True)
    out = Tensor(y, _parents=(a,))

    def backward(g):
        if a.requires_grad:
            dot = (g * y).sum(axis=1, keepdims=True)
            a._accumulate(y * (g - dot))

    out._backward = backward
    return out


def clamped_log(a: Tensor, floor: float = LOG_FLOOR) -> Tensor:
    """log(max(x, floor)); the floor keeps saturated probabilities finite."""
    clamped = np.maximum(a.data, floor)
    out = Tensor(np.log(clamped), _parents=(a,))
    live = a.data > floor

    def backward(g):
        if a.requires_grad:
            a._accumulate(np.where(live, g / clamped, 0.0))

    out._backward = backward
    return out


def sum_all(a: Tensor) -> Tensor:
    out = Tensor(np.array([[a.data.sum()]]), _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(np.full(a.shape, g[0, 0]))

    out._backward = backward
    return out


def mean_all(a: Tensor) -> Tensor:
    n = a.data.size
    out = Tensor(np.array([[a.data.sum() / n]]), _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(np.full(a.shape, g[0, 0] / n))

    out._backward = backward
    return out


def row_sums(a: Tensor) -> Tensor:
    out = Tensor(a.data.sum(axis=1, keepdims=True), _parents=(a,))

    def backward(g):
        if a.requires_grad:
            a._accumulate(np.broadcast_to(g, a.shape).copy())

    out._backward = backward
    return out


def gather_rows(a: Tensor, idx) -> Tensor:
    idx = np.asarray(idx, dtype=np.intp)
    if idx.ndim != 1:
        raise ShapeError(f"gather_rows index must be 1-D, got shape {idx.shape}")
    out = Tensor(a.data[idx], _parents=(a,))

    def backward(g):
        if a.requires_grad:
            ga = np.zeros(a.shape)
            np.add.at(ga, idx, g)
            a._accumulate(ga)

    out._backward = backward
    return out


def vstack(tensors) -> Tensor:
    tensors = tuple(tensors)
    cols = tensors[0].shape[1]
    for t in tensors[1:]:
        if t.shape[1] != cols:
            raise ShapeError(f"vstack column mismatch: {tensors[0].shape} vs {t.shape}")
    out = Tensor(np.concatenate([t.data for t in tensors], axis=0), _parents=tensors)
    offsets = np.cumsum([0] + [t.shape[0] for t in tensors])

    def backward(g):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                t._accumulate(g[lo:hi])

    out._backward = backward
    return out


def dropout(x: Tensor, rate: float, rng: np.random.Generator, training: bool) -> Tensor:
    """Inverted dropout: zero entries w.p. `rate`, scale survivors by 1/(1-rate)."""
    if not 0.0 <= rate < 1.0:
        raise ConfigError(f"dropout rate must lie in [0, 1), got {rate}")
    if not training or rate == 0.0:
        return x
    keep = 1.0 - rate
    mask = (rng.random(x.shape) >= rate) / keep
    return hadamard(x, Tensor(mask))
