"""Networks built on the autodiff core: MLPs, a transformer encoder, Adam.

Modules register their Parameters under hierarchical names so checkpoints
can store and restore them without pickling. Initialization draws from a
caller-supplied Generator, keeping construction deterministic per seed.
"""

from __future__ import annotations

import math

import numpy as np

from . import tensor as T
from .tensor import Parameter, Tensor


class Module:
    """Container tracking parameters and submodules by name."""

    def __init__(self):
        self._params: dict[str, Parameter] = {}
        self._modules: dict[str, Module] = {}

    def register(self, name: str, data: np.ndarray) -> Parameter:
        param = Parameter(np.array(data, dtype=np.float64), name=name)
        self._params[name] = param
        return param

    def add_module(self, name: str, module: "Module") -> "Module":
        self._modules[name] = module
        return module

    def named_parameters(self, prefix: str = "") -> dict[str, Parameter]:
        out: dict[str, Parameter] = {}
        for name, p in self._params.items():
            out[f"{prefix}{name}"] = p
        for name, m in self._modules.items():
            out.update(m.named_parameters(prefix=f"{prefix}{name}."))
        return out

    def parameters(self) -> list[Parameter]:
        return list(self.named_parameters().values())

    def state_dict(self) -> dict[str, np.ndarray]:
        return {k: v.data.copy() for k, v in self.named_parameters().items()}

    def load_state_dict(self, state: dict[str, np.ndarray]) -> None:
        params = self.named_parameters()
        missing = set(params) - set(state)
        extra = set(state) - set(params)
        if missing or extra:
            raise KeyError(f"state mismatch: missing={sorted(missing)} extra={sorted(extra)}")
        for key, param in params.items():
            value = np.asarray(state[key], dtype=np.float64)
            if value.shape != param.shape:
                raise T.ShapeError(f"{key}: checkpoint shape {value.shape} != {param.shape}")
            param.data = value.copy()


class Linear(Module):
    def __init__(self, in_dim: int, out_dim: int, rng: np.random.Generator):
        super().__init__()
        scale = 1.0 / math.sqrt(in_dim)
        self.weight = self.register("weight", rng.normal(0.0, scale, size=(in_dim, out_dim)))
        self.bias = self.register("bias", np.zeros(out_dim))

    def __call__(self, x: Tensor) -> Tensor:
        return T.add(T.matmul(x, self.weight), self.bias)


class MLP(Module):
    """GELU MLP over the last axis; `dims` includes input and output."""

    def __init__(self, dims: list[int], rng: np.random.Generator):
        super().__init__()
        self.layers = [
            self.add_module(f"layer{i}", Linear(a, b, rng))
            for i, (a, b) in enumerate(zip(dims[:-1], dims[1:]))
        ]

    def __call__(self, x: Tensor) -> Tensor:
        for i, layer in enumerate(self.layers):
            x = layer(x)
            if i < len(self.layers) - 1:
                x = T.gelu(x)
        return x


class LayerNorm(Module):
    def __init__(self, dim: int):
        super().__init__()
        self.gain = self.register("gain", np.ones(dim))
        self.shift = self.register("shift", np.zeros(dim))

    def __call__(self, x: Tensor) -> Tensor:
        return T.add(T.mul(T.layer_norm(x), self.gain), self.shift)


class SelfAttention(Module):
    def __init__(self, dim: int, heads: int, rng: np.random.Generator):
        super().__init__()
        if dim % heads != 0:
            raise ValueError(f"dim {dim} not divisible by heads {heads}")
        self.dim = dim
        self.heads = heads
        self.head_dim = dim // heads
        self.query = self.add_module("query", Linear(dim, dim, rng))
        self.key = self.add_module("key", Linear(dim, dim, rng))
        self.value = self.add_module("value", Linear(dim, dim, rng))
        self.out = self.add_module("out", Linear(dim, dim, rng))

    def _split(self, x: Tensor, batch: int, length: int) -> Tensor:
        x = T.reshape(x, (batch, length, self.heads, self.head_dim))
        return T.transpose(x, (0, 2, 1, 3))

    def __call__(self, x: Tensor) -> Tensor:
        batch, length, _ = x.shape
        q = self._split(self.query(x), batch, length)
        k = self._split(self.key(x), batch, length)
        v = self._split(self.value(x), batch, length)
        scores = T.mul(T.matmul(q, T.transpose(k)), 1.0 / math.sqrt(self.head_dim))
        attn = T.softmax(scores, axis=-1)
        mixed = T.matmul(attn, v)
        merged = T.reshape(T.transpose(mixed, (0, 2, 1, 3)), (batch, length, self.dim))
        return self.out(merged)


class TransformerBlock(Module):
    """Pre-norm encoder block: x + attn(LN(x)), then x + ff(LN(x))."""

    def __init__(self, dim: int, heads: int, ff_dim: int, rng: np.random.Generator):
        super().__init__()
        self.norm1 = self.add_module("norm1", LayerNorm(dim))
        self.attn = self.add_module("attn", SelfAttention(dim, heads, rng))
        self.norm2 = self.add_module("norm2", LayerNorm(dim))
        self.ff = self.add_module("ff", MLP([dim, ff_dim, dim], rng))

    def __call__(self, x: Tensor) -> Tensor:
        x = T.add(x, self.attn(self.norm1(x)))
        return T.add(x, self.ff(self.norm2(x)))


class TransformerEncoder(Module):
    def __init__(self, dim: int, heads: int, ff_dim: int, layers: int, rng: np.random.Generator):
        super().__init__()
        self.blocks = [
            self.add_module(f"block{i}", TransformerBlock(dim, heads, ff_dim, rng))
            for i in range(layers)
        ]
        self.final_norm = self.add_module("final_norm", LayerNorm(dim))

    def __call__(self, x: Tensor) -> Tensor:
        for block in self.blocks:
            x = block(x)
        return self.final_norm(x)


def sinusoidal_positions(length: int, dim: int) -> np.ndarray:
    """Fixed sin/cos position table, shape (length, dim)."""
    positions = np.arange(length, dtype=np.float64)[:, None]
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half, dtype=np.float64) / max(half, 1))
    angles = positions * freqs[None, :]
    table = np.zeros((length, dim))
    table[:, 0:2 * half:2] = np.sin(angles)
    table[:, 1:2 * half:2] = np.cos(angles)
    return table


def sinusoidal_embedding(values: np.ndarray, dim: int) -> np.ndarray:
    """Sin/cos embedding of arbitrary scalar values, shape (n, dim)."""
    values = np.asarray(values, dtype=np.float64).reshape(-1, 1)
    half = dim // 2
    freqs = np.exp(-math.log(10000.0) * np.arange(half, dtype=np.float64) / max(half, 1))
    angles = values * freqs[None, :]
    out = np.zeros((values.shape[0], dim))
    out[:, 0:2 * half:2] = np.sin(angles)
    out[:, 1:2 * half:2] = np.cos(angles)
    return out


class Adam:
    """Adam with bias correction; update happens between tape passes."""

    def __init__(self, params: list[Parameter], lr: float = 1e-4,
                 beta1: float = 0.9, beta2: float = 0.999, eps: float = 1e-8):
        self.params = list(params)
        self.lr = lr
        self.beta1 = beta1
        self.beta2 = beta2
        self.eps = eps
        self.step_count = 0
        self.first_moment = [np.zeros_like(p.data) for p in self.params]
        self.second_moment = [np.zeros_like(p.data) for p in self.params]

    def step(self, grads: dict[Parameter, np.ndarray]) -> None:
        self.step_count += 1
        correction1 = 1.0 - self.beta1 ** self.step_count
        correction2 = 1.0 - self.beta2 ** self.step_count
        for i, param in enumerate(self.params):
            grad = grads.get(param)
            if grad is None:
                continue
            if grad.shape != param.shape:
                raise T.ShapeError(f"adam: grad shape {grad.shape} != param {param.shape}")
            m = self.first_moment[i]
            v = self.second_moment[i]
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad * grad
            m_hat = m / correction1
            v_hat = v / correction2
            param.data = param.data - self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
