"""Named parameter store shared by every model in the package."""

from __future__ import annotations

import hashlib

import numpy as np

from .tensor import Tensor, default_dtype


class ParamStore:
    """Named trainable tensors plus non-trainable buffers.

    ``version`` strictly increases on every optimizer update. The store owns
    an rng (from ``seed``) so parameter initialization is reproducible given
    construction order.
    """

    def __init__(self, seed: int = 0):
        self.params: dict[str, Tensor] = {}
        self.buffers: dict[str, np.ndarray] = {}
        self.version = 0
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.opt_state: dict = {}

    def param(self, name: str, shape, scale: float | None = None, zero: bool = False) -> Tensor:
        """Create and register a trainable tensor; fan-in scaled normal init."""
        if name in self.params or name in self.buffers:
            raise ValueError(f"duplicate parameter name: {name}")
        if zero:
            data = np.zeros(shape, dtype=default_dtype())
        else:
            if scale is None:
                fan_in = shape[0] if len(shape) > 1 else max(1, shape[0])
                if len(shape) == 4:  # conv [Cout, Cin, kh, kw]
                    fan_in = int(np.prod(shape[1:]))
                scale = 1.0 / np.sqrt(fan_in)
            data = (self.rng.standard_normal(shape) * scale).astype(default_dtype())
        t = Tensor(data, requires_grad=True)
        self.params[name] = t
        return t

    def buffer(self, name: str, data: np.ndarray) -> np.ndarray:
        if name in self.params or name in self.buffers:
            raise ValueError(f"duplicate buffer name: {name}")
        self.buffers[name] = np.asarray(data, dtype=np.float32)
        return self.buffers[name]

    def zero_grad(self):
        for p in self.params.values():
            p.grad = None

    def n_parameters(self) -> int:
        return sum(p.size for p in self.params.values())

    def state_dict(self) -> dict[str, np.ndarray]:
        out = {k: np.array(v.data, copy=True) for k, v in self.params.items()}
        out.update({k: np.array(v, copy=True) for k, v in self.buffers.items()})
        return out

    def load_state_dict(self, state: dict[str, np.ndarray], strict: bool = True):
        """In-place load so existing module references stay valid."""
        for name, value in state.items():
            if name in self.params:
                p = self.params[name]
                if p.data.shape != value.shape:
                    raise ValueError(f"shape mismatch for {name}: {p.data.shape} vs {value.shape}")
                p.data[...] = value.astype(p.data.dtype)
            elif name in self.buffers:
                self.buffers[name][...] = value.astype(self.buffers[name].dtype)
            elif strict:
                raise KeyError(f"unknown entry in state dict: {name}")
        missing = (set(self.params) | set(self.buffers)) - set(state)
        if strict and missing:
            raise KeyError(f"state dict missing entries: {sorted(missing)}")

    def checksum(self) -> str:
        h = hashlib.sha1()
        for name in sorted(self.params):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.params[name].data).tobytes())
        for name in sorted(self.buffers):
            h.update(name.encode())
            h.update(np.ascontiguousarray(self.buffers[name]).tobytes())
        return h.hexdigest()
