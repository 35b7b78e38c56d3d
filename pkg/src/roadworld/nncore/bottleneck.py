"""Additive white Gaussian noise channel limiting feature information to a
configured bit budget: D * 0.5 * log2(1 + SNR) = capacity_bits, with features
normalized to unit per-dimension variance by running statistics."""

from __future__ import annotations

import math

import numpy as np

from .store import ParamStore
from .tensor import Tensor


def capacity_noise_sigma(capacity_bits: float, dim: int) -> float:
    """Noise std so that ``dim`` unit-variance channels carry ``capacity_bits``."""
    if capacity_bits <= 0:
        raise ValueError("capacity_bits must be positive")
    if math.isinf(capacity_bits):
        return 0.0
    snr = 2.0 ** (2.0 * capacity_bits / dim) - 1.0
    return math.sqrt(1.0 / snr)


def channel_capacity_bits(noise_sigma: float, dim: int) -> float:
    """Inverse of :func:`capacity_noise_sigma` for unit-variance signals."""
    if noise_sigma == 0.0:
        return math.inf
    return dim * 0.5 * math.log2(1.0 + 1.0 / noise_sigma**2)


class GaussianBottleneck:
    """Normalize-then-noise feature channel.

    Running mean/variance are plain buffers (no gradient flows through them);
    noise is active whenever an rng is supplied with ``add_noise=True`` —
    training and on-policy rollouts keep it on, evaluation may switch it off.
    """

    def __init__(self, store: ParamStore, name: str, dim: int, capacity_bits: float,
                 momentum: float = 0.02, eps: float = 1e-6):
        self.dim = dim
        self.capacity_bits = capacity_bits
        self.noise_sigma = capacity_noise_sigma(capacity_bits, dim)
        self.momentum = momentum
        self.eps = eps
        self.mean = store.buffer(f"{name}.running_mean", np.zeros(dim))
        self.var = store.buffer(f"{name}.running_var", np.ones(dim))
        self.count = store.buffer(f"{name}.count", np.zeros(1))

    def update_stats(self, x: np.ndarray):
        flat = x.reshape(-1, self.dim)
        m = flat.mean(axis=0)
        v = flat.var(axis=0)
        if self.count[0] == 0:
            self.mean[...] = m
            self.var[...] = np.maximum(v, self.eps)
        else:
            self.mean += self.momentum * (m - self.mean)
            self.var += self.momentum * (np.maximum(v, self.eps) - self.var)
        self.count[0] += 1

    def __call__(self, x: Tensor, rng=None, update_stats: bool = False,
                 add_noise: bool = True) -> Tensor:
        if update_stats:
            self.update_stats(x.data)
        inv = (1.0 / np.sqrt(self.var + self.eps)).astype(x.data.dtype)
        xn = (x - Tensor(self.mean.astype(x.data.dtype))) * Tensor(inv)
        if add_noise and self.noise_sigma > 0.0 and rng is not None:
            xn = xn + Tensor(rng.normal(0.0, self.noise_sigma, x.shape).astype(x.data.dtype))
        return xn
