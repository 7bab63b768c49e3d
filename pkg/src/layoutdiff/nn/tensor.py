"""Dense float64 tensors with reverse-mode differentiation.

Deliberately small: exactly the operations the matcher architecture is
built from, each with a hand-written backward rule.  Every operation
checks its output for NaN/Inf so numerical trouble surfaces at the op
that produced it instead of corrupting a training run.
"""

from __future__ import annotations

from typing import Callable, Sequence

import numpy as np


class NonFiniteError(FloatingPointError):
    """An operation produced NaN or Inf."""


def _check_finite(data: np.ndarray, where: str) -> None:
    if not np.all(np.isfinite(data)):
        raise NonFiniteError(f"non-finite values produced by {where}")


class Tensor:
    """A float64 array plus an optional gradient and backward closure."""

    __slots__ = ("data", "grad", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False, _where: str = "tensor"):
        arr = np.asarray(data, dtype=np.float64)
        _check_finite(arr, _where)
        self.data = arr
        self.grad: np.ndarray | None = None
        self.requires_grad = requires_grad
        self._parents: tuple[Tensor, ...] = ()
        self._backward: Callable[[np.ndarray], None] | None = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> "Tensor":
        return Tensor(self.data)

    def zero_grad(self) -> None:
        self.grad = None

    def _accumulate(self, grad: np.ndarray) -> None:
        if self.grad is None:
            self.grad = np.zeros_like(self.data)
        self.grad += grad

    def backward(self, grad: np.ndarray | None = None) -> None:
        """Backpropagate from this tensor through every reachable parent."""
        if grad is None:
            if self.data.size != 1:
                raise ValueError("backward() without a gradient requires a scalar output")
            grad = np.ones_like(self.data)
        order: list[Tensor] = []
        visited: set[int] = set()
        stack: list[tuple[Tensor, bool]] = [(self, False)]
        while stack:
            node, expanded = stack.pop()
            if expanded:
                order.append(node)
                continue
            if id(node) in visited:
                continue
            visited.add(id(node))
            stack.append((node, True))
            for parent in node._parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))
        self._accumulate(np.asarray(grad, dtype=np.float64))
        for node in reversed(order):
            if node._backward is not None and node.grad is not None:
                node._backward(node.grad)

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        return add(self, mul(as_tensor(other), -1.0))

    def __rsub__(self, other):
        return add(as_tensor(other), mul(self, -1.0))

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(as_tensor(other), self)

    def __neg__(self):
        return mul(self, -1.0)

    def __matmul__(self, other):
        return matmul(self, other)

    def __getitem__(self, key):
        return take(self, key)

    def __repr__(self) -> str:
        flag = ", grad" if self.requires_grad else ""
        return f"Tensor(shape={self.data.shape}{flag})"


def as_tensor(value) -> Tensor:
    return value if isinstance(value, Tensor) else Tensor(value)


def _link(out: Tensor, parents: Sequence[Tensor], backward: Callable[[np.ndarray], None]) -> Tensor:
    if any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = tuple(parents)
        out._backward = backward
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back down to `shape`."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


# -- elementwise arithmetic ------------------------------------------------


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data + b.data, _where="add")

    def backward(grad: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(grad, b.data.shape))

    return _link(out, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data * b.data, _where="mul")

    def backward(grad: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad * b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(grad * a.data, b.data.shape))

    return _link(out, (a, b), backward)


def div(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = Tensor(a.data / b.data, _where="div")

    def backward(grad: np.ndarray) -> None:
        if a.requires_grad:
            a._accumulate(_unbroadcast(grad / b.data, a.data.shape))
        if b.requires_grad:
            b._accumulate(_unbroadcast(-grad * a.data / (b.data * b.data), b.data.shape))

    return _link(out, (a, b), backward)


def matmul(a, b) -> Tensor:
    """Matrix product for 2D@2D, 2D@1D and 1D@2D operands."""
    a, b = as_tensor(a), as_tensor(b)
    out = Tensor(a.data @ b.data, _where="matmul")

    def backward(grad: np.ndarray) -> None:
        ad, bd = a.data, b.data
        if a.requires_grad:
            if ad.ndim == 2 and bd.ndim == 2:
                a._accumulate(grad @ bd.T)
            elif ad.ndim == 2 and bd.ndim == 1:
                a._accumulate(np.outer(grad, bd))
            else:  # 1D @ 2D
                a._accumulate(grad @ bd.T)
        if b.requires_grad:
            if ad.ndim == 2 and bd.ndim == 2:
                b._accumulate(ad.T @ grad)
            elif ad.ndim == 2 and bd.ndim == 1:
                b._accumulate(ad.T @ grad)
            else:  # 1D @ 2D
                b._accumulate(np.outer(ad, grad))

    return _link(out, (a, b), backward)


def transpose(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.T)

    def backward(grad: np.ndarray) -> None:
        a._accumulate(grad.T)

    return _link(out, (a,), backward)


def reshape(a: Tensor, shape: tuple[int, ...]) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.reshape(shape))

    def backward(grad: np.ndarray) -> None:
        a._accumulate(grad.reshape(a.data.shape))

    return _link(out, (a,), backward)


# -- nonlinearities and reductions ----------------------------------------


def relu(a) -> Tensor:
    a = as_tensor(a)
    out = Tensor(np.maximum(a.data, 0.0), _where="relu")

    def backward(grad: np.ndarray) -> None:
        a._accumulate(grad * (a.data > 0.0))

    return _link(out, (a,), backward)


def exp(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(over="ignore"):
        out = Tensor(np.exp(a.data), _where="exp")

    def backward(grad: np.ndarray) -> None:
        a._accumulate(grad * out.data)

    return _link(out, (a,), backward)


def log(a) -> Tensor:
    a = as_tensor(a)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = Tensor(np.log(a.data), _where="log")

    def backward(grad: np.ndarray) -> None:
        a._accumulate(grad / a.data)

    return _link(out, (a,), backward)


def clip(a, lo: float, hi: float) -> Tensor:
    """Clamp values; gradient is passed through only inside the interval."""
    a = as_tensor(a)
    out = Tensor(np.clip(a.data, lo, hi), _where="clip")

    def backward(grad: np.ndarray) -> None:
        inside = (a.data > lo) & (a.data < hi)
        a._accumulate(grad * inside)

    return _link(out, (a,), backward)


def tsum(a, axis: int | None = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    out = Tensor(a.data.sum(axis=axis, keepdims=keepdims), _where="sum")

    def backward(grad: np.ndarray) -> None:
        g = grad
        if axis is not None and not keepdims:
            g = np.expand_dims(g, axis)
        a._accumulate(np.broadcast_to(g, a.data.shape).copy())

    return _link(out, (a,), backward)


def mean(a, axis: int | None = None, keepdims: bool = False) -> Tensor:
    a = as_tensor(a)
    count = a.data.size if axis is None else a.data.shape[axis]
    return mul(tsum(a, axis=axis, keepdims=keepdims), 1.0 / count)


def softmax(a, axis: int = -1) -> Tensor:
    """Numerically stable softmax along `axis`; rows sum to 1."""
    a = as_tensor(a)
    shifted = a.data - a.data.max(axis=axis, keepdims=True)
    e = np.exp(shifted)
    y = e / e.sum(axis=axis, keepdims=True)
    out = Tensor(y, _where="softmax")

    def backward(grad: np.ndarray) -> None:
        dot = (grad * y).sum(axis=axis, keepdims=True)
        a._accumulate((grad - dot) * y)

    return _link(out, (a,), backward)


# -- structure ops ---------------------------------------------------------


def concat(parts: Sequence[Tensor], axis: int = 0) -> Tensor:
    parts = [as_tensor(p) for p in parts]
    out = Tensor(np.concatenate([p.data for p in parts], axis=axis), _where="concat")
    sizes = [p.data.shape[axis] for p in parts]
    offsets = np.cumsum([0] + sizes)

    def backward(grad: np.ndarray) -> None:
        for p, start, stop in zip(parts, offsets[:-1], offsets[1:]):
            if p.requires_grad:
                index = [slice(None)] * grad.ndim
                index[axis] = slice(start, stop)
                p._accumulate(grad[tuple(index)])

    return _link(out, tuple(parts), backward)


def take(a: Tensor, key) -> Tensor:
    """Basic and integer-array indexing with scatter-add backward."""
    a = as_tensor(a)
    out = Tensor(a.data[key])

    def backward(grad: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        np.add.at(full, key, grad)
        a._accumulate(full)

    return _link(out, (a,), backward)


def gather_rows(a: Tensor, index: np.ndarray) -> Tensor:
    """Select rows by integer index; duplicates allowed."""
    index = np.asarray(index, dtype=np.intp)
    a = as_tensor(a)
    out = Tensor(a.data[index])

    def backward(grad: np.ndarray) -> None:
        full = np.zeros_like(a.data)
        np.add.at(full, index, grad)
        a._accumulate(full)

    return _link(out, (a,), backward)


def segment_sum(a: Tensor, index: np.ndarray, num_segments: int) -> Tensor:
    """Sum rows of `a` into `num_segments` output rows keyed by `index`."""
    index = np.asarray(index, dtype=np.intp)
    a = as_tensor(a)
    data = np.zeros((num_segments,) + a.data.shape[1:], dtype=np.float64)
    np.add.at(data, index, a.data)
    out = Tensor(data, _where="segment_sum")

    def backward(grad: np.ndarray) -> None:
        a._accumulate(grad[index])

    return _link(out, (a,), backward)


def zeros(shape: tuple[int, ...] | int) -> Tensor:
    return Tensor(np.zeros(shape, dtype=np.float64))
