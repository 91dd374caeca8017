"""Reverse-mode automatic differentiation over dense float64 arrays.

A Tensor wraps a numpy array and, when gradients are enabled, records how
it was produced so that `backward` can push gradients to every leaf
parameter. The op set is deliberately small: matmul, elementwise
arithmetic, exp/log, softmax, L2-normalize, layer-norm, GELU, reductions,
gather/concat, and the two losses composed from them. Everything runs in
float64; there is no broadcasting beyond what these ops need.
"""

from __future__ import annotations

import math
from contextlib import contextmanager

import numpy as np
from scipy.special import erf

_DEBUG_CHECKS = False
_GRAD_ENABLED = True

_LOG_FLOOR = -30.0


class ShapeError(ValueError):
    """Raised when an op receives incompatible shapes."""


def set_debug_checks(enabled: bool) -> None:
    """Toggle NaN/Inf validation of every op result (slow; for tests)."""
    global _DEBUG_CHECKS
    _DEBUG_CHECKS = bool(enabled)


@contextmanager
def no_grad():
    """Disable tape recording inside the block (inference fast path)."""
    global _GRAD_ENABLED
    previous = _GRAD_ENABLED
    _GRAD_ENABLED = False
    try:
        yield
    finally:
        _GRAD_ENABLED = previous


class Tensor:
    __slots__ = ("data", "requires_grad", "_parents", "_backward")

    def __init__(self, data, requires_grad: bool = False):
        arr = np.asarray(data, dtype=np.float64)
        if _DEBUG_CHECKS and not np.all(np.isfinite(arr)):
            raise FloatingPointError("non-finite values in tensor")
        self.data = arr
        self.requires_grad = requires_grad and _GRAD_ENABLED
        self._parents: tuple[Tensor, ...] = ()
        self._backward = None

    @property
    def shape(self) -> tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def size(self) -> int:
        return self.data.size

    def item(self) -> float:
        return float(self.data)

    def __repr__(self) -> str:
        return f"Tensor(shape={self.shape}, requires_grad={self.requires_grad})"

    # operator sugar; scalars are accepted on either side
    def __add__(self, other):
        return add(self, other)

    __radd__ = __add__

    def __mul__(self, other):
        return mul(self, other)

    __rmul__ = __mul__

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __neg__(self):
        return mul(self, -1.0)

    def __truediv__(self, scalar):
        return mul(self, 1.0 / float(scalar))

    def __matmul__(self, other):
        return matmul(self, other)


class Parameter(Tensor):
    """Trainable leaf tensor with a stable name for checkpoints."""

    __slots__ = ("name",)

    def __init__(self, data, name: str):
        super().__init__(data, requires_grad=True)
        self.requires_grad = True  # parameters stay trainable under no_grad
        self.name = name

    def __repr__(self) -> str:
        return f"Parameter({self.name}, shape={self.shape})"


def as_tensor(x) -> Tensor:
    return x if isinstance(x, Tensor) else Tensor(x)


def constant(x) -> Tensor:
    return Tensor(x, requires_grad=False)


def _make(data: np.ndarray, parents: tuple[Tensor, ...], backward_fn) -> Tensor:
    out = Tensor(data)
    if _GRAD_ENABLED and any(p.requires_grad for p in parents):
        out.requires_grad = True
        out._parents = parents
        out._backward = backward_fn
    return out


def _unbroadcast(grad: np.ndarray, shape: tuple[int, ...]) -> np.ndarray:
    """Reduce a broadcast gradient back to the original operand shape."""
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, dim in enumerate(shape):
        if dim == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


def add(x, y) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    data = x.data + y.data

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, _unbroadcast(grad, x.shape))
        if y.requires_grad:
            acc(y, _unbroadcast(grad, y.shape))

    return _make(data, (x, y), backward)


def sub(x, y) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    data = x.data - y.data

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, _unbroadcast(grad, x.shape))
        if y.requires_grad:
            acc(y, _unbroadcast(-grad, y.shape))

    return _make(data, (x, y), backward)


def mul(x, y) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    data = x.data * y.data

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, _unbroadcast(grad * y.data, x.shape))
        if y.requires_grad:
            acc(y, _unbroadcast(grad * x.data, y.shape))

    return _make(data, (x, y), backward)


def matmul(x, y) -> Tensor:
    x, y = as_tensor(x), as_tensor(y)
    if x.ndim < 2 or y.ndim < 2:
        raise ShapeError(f"matmul: operands must be >=2-d, got {x.shape} @ {y.shape}")
    if x.shape[-1] != y.shape[-2]:
        raise ShapeError(f"matmul: incompatible shapes {x.shape} @ {y.shape}")
    data = np.matmul(x.data, y.data)

    def backward(grad, acc):
        if x.requires_grad:
            gx = np.matmul(grad, np.swapaxes(y.data, -1, -2))
            acc(x, _unbroadcast(gx, x.shape))
        if y.requires_grad:
            gy = np.matmul(np.swapaxes(x.data, -1, -2), grad)
            acc(y, _unbroadcast(gy, y.shape))

    return _make(data, (x, y), backward)


def transpose(x, axes=None) -> Tensor:
    """Permute axes; default swaps the last two."""
    x = as_tensor(x)
    if axes is None:
        axes = tuple(range(x.ndim - 2)) + (x.ndim - 1, x.ndim - 2)
    axes = tuple(axes)
    inverse = tuple(np.argsort(axes))
    data = np.transpose(x.data, axes)

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, np.transpose(grad, inverse))

    return _make(data, (x,), backward)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)
    data = x.data.reshape(shape)

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, grad.reshape(x.shape))

    return _make(data, (x,), backward)


def exp(x) -> Tensor:
    x = as_tensor(x)
    data = np.exp(x.data)

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, grad * data)

    return _make(data, (x,), backward)


def log(x) -> Tensor:
    x = as_tensor(x)
    data = np.log(x.data)

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, grad / x.data)

    return _make(data, (x,), backward)


def clamped_log(x, floor: float = _LOG_FLOOR) -> Tensor:
    """log with output clamped at `floor`; gradient is zero where clamped."""
    x = as_tensor(x)
    threshold = math.exp(floor)
    clipped = np.maximum(x.data, threshold)
    data = np.log(clipped)
    active = x.data > threshold

    def backward(grad, acc):
        if x.requires_grad:
            acc(x, np.where(active, grad / clipped, 0.0))

    return _make(data, (x,), backward)


def gelu(x) -> Tensor:
    """Exact Gaussian error linear unit, x * Phi(x)."""
    x = as_tensor(x)
    cdf = 0.5 * (1.0 + erf(x.data / math.sqrt(2.0)))
    data = x.data * cdf

    def backward(grad, acc):
        if x.requires_grad:
            pdf = np.exp(-0.5 * x.data * x.data) / math.sqrt(2.0 * math.pi)
            acc(x, grad * (cdf + x.data * pdf))

    return _make(data, (x,), backward)


def softmax(x, temperature: float = 1.0, axis: int = -1) -> Tensor:
    """softmax(x / temperature) along `axis`; shift-invariant and stable."""
    if temperature <= 0:
        raise ValueError(f"softmax temperature must be positive, got {temperature}")
    x = as_tensor(x)
    scaled = x.data / temperature
    shifted = scaled - scaled.max(axis=axis, keepdims=True)
    expo = np.exp(shifted)
    data = expo / expo.sum(axis=axis, keepdims=True)

    def backward(grad, acc):
        if x.requires_grad:
            inner = (grad * data).sum(axis=axis, keepdims=True)
            acc(x, (grad - inner) * data / temperature)

    return _make(data, (x,), backward)


def l2_normalize(x, axis: int = -1) -> Tensor:
    """x / ||x||_2 along `axis`; raises on (near-)zero norm."""
    x = as_tensor(x)
    norm = np.sqrt((x.data * x.data).sum(axis=axis, keepdims=True))
    if np.any(norm < 1e-12):
        raise ValueError("l2_normalize: zero-norm slice")
    data = x.data / norm

    def backward(grad, acc):
        if x.requires_grad:
            inner = (grad * data).sum(axis=axis, keepdims=True)
            acc(x, (grad - data * inner) / norm)

    return _make(data, (x,), backward)


def layer_norm(x, eps: float = 1e-5) -> Tensor:
    """Normalize the last axis to zero mean, unit variance (no affine)."""
    x = as_tensor(x)
    mean = x.data.mean(axis=-1, keepdims=True)
    centered = x.data - mean
    var = (centered * centered).mean(axis=-1, keepdims=True)
    inv_std = 1.0 / np.sqrt(var + eps)
    data = centered * inv_std

    def backward(grad, acc):
        if x.requires_grad:
            g_mean = grad.mean(axis=-1, keepdims=True)
            gy_mean = (grad * data).mean(axis=-1, keepdims=True)
            acc(x, inv_std * (grad - g_mean - data * gy_mean))

    return _make(data, (x,), backward)


def mean(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    data = x.data.mean(axis=axis, keepdims=keepdims)
    count = x.size if axis is None else x.data.size / data.size

    def backward(grad, acc):
        if x.requires_grad:
            g = np.asarray(grad)
            if not keepdims and axis is not None:
                g = np.expand_dims(g, axis)
            acc(x, np.broadcast_to(g, x.shape) / count)

    return _make(data, (x,), backward)


def tsum(x, axis=None, keepdims: bool = False) -> Tensor:
    x = as_tensor(x)
    data = x.data.sum(axis=axis, keepdims=keepdims)

    def backward(grad, acc):
        if x.requires_grad:
            g = np.asarray(grad)
            if not keepdims and axis is not None:
                g = np.expand_dims(g, axis)
            acc(x, np.broadcast_to(g, x.shape).copy())

    return _make(data, (x,), backward)


def concat(tensors, axis: int = 0) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    data = np.concatenate([t.data for t in tensors], axis=axis)
    sizes = [t.shape[axis] for t in tensors]
    offsets = np.cumsum([0] + sizes)

    def backward(grad, acc):
        for t, lo, hi in zip(tensors, offsets[:-1], offsets[1:]):
            if t.requires_grad:
                index = [slice(None)] * grad.ndim
                index[axis] = slice(lo, hi)
                acc(t, grad[tuple(index)])

    return _make(data, tuple(tensors), backward)


def gather(x, indices, axis: int = 0) -> Tensor:
    """Select slices along `axis`; backward scatter-adds."""
    x = as_tensor(x)
    idx = np.asarray(indices, dtype=np.intp)
    data = np.take(x.data, idx, axis=axis)

    def backward(grad, acc):
        if x.requires_grad:
            gx = np.zeros_like(x.data)
            moved = np.moveaxis(gx, axis, 0)
            np.add.at(moved, idx, np.moveaxis(grad, axis, 0))
            acc(x, gx)

    return _make(data, (x,), backward)


def mse(prediction, target) -> Tensor:
    """Mean squared error over every element."""
    diff = sub(prediction, target)
    return mean(mul(diff, diff))


def cross_entropy(probs, targets) -> Tensor:
    """Mean over rows of -sum(targets * log probs); log clamped at -30."""
    probs, targets = as_tensor(probs), as_tensor(targets)
    if probs.shape != targets.shape:
        raise ShapeError(f"cross_entropy: shape mismatch {probs.shape} vs {targets.shape}")
    per_row = tsum(mul(targets, clamped_log(probs)), axis=-1)
    return mul(mean(per_row), -1.0)


def backward(root: Tensor) -> dict[Parameter, np.ndarray]:
    """Accumulate d(root)/d(param) for every Parameter reachable from root.

    The root must be scalar. Returns a map from Parameter to its gradient
    array; non-parameter leaves are ignored.
    """
    if root.size != 1:
        raise ValueError(f"backward: root must be scalar, got shape {root.shape}")

    topo: list[Tensor] = []
    visited: set[int] = set()
    stack: list[tuple[Tensor, bool]] = [(root, False)]
    while stack:
        node, processed = stack.pop()
        if processed:
            topo.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        for parent in node._parents:
            if parent.requires_grad and id(parent) not in visited:
                stack.append((parent, False))

    grads: dict[int, np.ndarray] = {id(root): np.ones_like(root.data)}

    def accumulate(node: Tensor, grad: np.ndarray) -> None:
        key = id(node)
        if key in grads:
            grads[key] = grads[key] + grad
        else:
            grads[key] = np.array(grad, dtype=np.float64, copy=True)

    result: dict[Parameter, np.ndarray] = {}
    for node in reversed(topo):
        grad = grads.pop(id(node), None)
        if grad is None:
            continue
        if isinstance(node, Parameter):
            result[node] = result[node] + grad if node in result else grad
        if node._backward is not None:
            node._backward(grad, accumulate)
    return result
