"""Adam with bias correction; optimizer state lives inside the ParamStore so
the functional ``adam_step`` is self-contained."""

from __future__ import annotations

import numpy as np

from .store import ParamStore


def adam_step(store: ParamStore, grads=None, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
    """One Adam update over every parameter in the store.

    ``grads`` maps name -> ndarray; None falls back to each tensor's ``grad``
    slot (missing gradients count as zero). Increments ``store.version``.
    """
    state = store.opt_state.setdefault("adam", {"t": 0, "m": {}, "v": {}})
    state["t"] += 1
    t = state["t"]
    b1, b2 = betas
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for name, p in store.params.items():
        if grads is not None:
            g = grads.get(name)
        else:
            g = p.grad
        if g is None:
            g = np.zeros_like(p.data)
        g = np.asarray(g, dtype=p.data.dtype)
        if g.shape != p.data.shape:
            raise ValueError(f"gradient shape mismatch for {name}: {g.shape} vs {p.data.shape}")
        m = state["m"].get(name)
        v = state["v"].get(name)
        if m is None:
            m = np.zeros_like(p.data)
            v = np.zeros_like(p.data)
            state["m"][name] = m
            state["v"][name] = v
        m += (1.0 - b1) * (g - m)
        v += (1.0 - b2) * (g * g - v)
        p.data -= lr * (m / c1) / (np.sqrt(v / c2) + eps)
    store.version += 1
    return store


class Adam:
    def __init__(self, store: ParamStore, lr=1e-3, betas=(0.9, 0.999), eps=1e-8):
        self.store = store
        self.lr = lr
        self.betas = betas
        self.eps = eps

    def step(self, grads=None, lr=None):
        adam_step(self.store, grads, lr if lr is not None else self.lr, self.betas, self.eps)

    def zero_grad(self):
        self.store.zero_grad()
