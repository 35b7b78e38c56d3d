"""Layers built on the autodiff engine: linear, conv, MLP, adaptive layer norm,
and sinusoidal feature embeddings."""

from __future__ import annotations

import numpy as np

from .store import ParamStore
from .tensor import Tensor, conv2d, default_dtype


class Linear:
    def __init__(self, store: ParamStore, name: str, d_in: int, d_out: int,
                 bias: bool = True, zero: bool = False, scale: float | None = None):
        self.w = store.param(f"{name}.w", (d_in, d_out), zero=zero, scale=scale)
        self.b = store.param(f"{name}.b", (d_out,), zero=True) if bias else None

    def __call__(self, x: Tensor) -> Tensor:
        out = x @ self.w
        if self.b is not None:
            out = out + self.b
        return out


class Conv2d:
    def __init__(self, store: ParamStore, name: str, c_in: int, c_out: int,
                 kernel: int = 3, stride: int = 1, padding: int = 1, zero: bool = False):
        self.w = store.param(f"{name}.w", (c_out, c_in, kernel, kernel), zero=zero)
        self.b = store.param(f"{name}.b", (c_out,), zero=True)
        self.stride = stride
        self.padding = padding

    def __call__(self, x: Tensor) -> Tensor:
        return conv2d(x, self.w, self.b, stride=self.stride, padding=self.padding)


class MLP:
    """Two-layer SiLU MLP."""

    def __init__(self, store, name, d_in, d_hidden, d_out, zero_out: bool = False):
        self.fc1 = Linear(store, f"{name}.fc1", d_in, d_hidden)
        self.fc2 = Linear(store, f"{name}.fc2", d_hidden, d_out, zero=zero_out)

    def __call__(self, x: Tensor) -> Tensor:
        return self.fc2(self.fc1(x).silu())


class ResidualFF:
    """Pre-norm residual feed-forward block (plan-head building block)."""

    def __init__(self, store, name, dim, hidden_mult=4):
        self.mlp = MLP(store, f"{name}.mlp", dim, dim * hidden_mult, dim, zero_out=True)

    def __call__(self, x: Tensor) -> Tensor:
        return x + self.mlp(x.layer_norm())


class AdaLN:
    """Layer norm modulated per frame by a conditioning vector.

    The projection is zero-initialized, so at init the output is plain layer
    normalization and the returned residual gate is zero (blocks start as
    identity).
    """

    def __init__(self, store, name, dim, cond_dim):
        self.dim = dim
        self.proj = Linear(store, f"{name}.proj", cond_dim, 3 * dim, zero=True)

    def __call__(self, x: Tensor, cond: Tensor):
        """x: [..., F, P, D]; cond: [..., F, C]. Returns (modulated, gate)."""
        mod = self.proj(cond)  # [..., F, 3D]
        mod = mod.reshape(mod.shape[:-1] + (1, 3 * self.dim))  # broadcast over tokens
        scale = mod[..., 0 : self.dim]
        shift = mod[..., self.dim : 2 * self.dim]
        gate = mod[..., 2 * self.dim : 3 * self.dim]
        y = x.layer_norm() * (scale + 1.0) + shift
        return y, gate


def adaln_modulate(x: Tensor, cond: Tensor, adaln: AdaLN) -> Tensor:
    """Per-frame scale/shift modulation of normalized ``x`` (gate dropped)."""
    y, _ = adaln(x, cond)
    return y


def sinusoidal_features(values: np.ndarray, dim: int, max_period: float = 1e4) -> np.ndarray:
    """Classic transformer timestep embedding of a scalar array.

    values: any shape; output shape ``values.shape + (dim,)``.
    """
    half = dim // 2
    freqs = np.exp(-np.log(max_period) * np.arange(half) / max(half - 1, 1))
    args = np.asarray(values, dtype=np.float64)[..., None] * freqs
    emb = np.concatenate([np.sin(args), np.cos(args)], axis=-1)
    if dim % 2:
        emb = np.concatenate([emb, np.zeros_like(emb[..., :1])], axis=-1)
    return emb.astype(default_dtype())
