"""Frame-causal multi-head attention with an inference-time key/value cache.

Tokens are grouped into frames; a query token may attend to every token whose
frame index is less than or equal to its own (block-triangular mask). Cached
incremental computation is an inference fast path on plain numpy arrays and
must match the full-sequence computation to < 1e-5.
"""

from __future__ import annotations

import numpy as np

from .tensor import Tensor

_NEG = -1e9
_MASK_CACHE: dict = {}


def _frame_bias(n_query_frames: int, n_key_frames: int, tokens_per_frame: int, dtype):
    """Additive bias [Fq*P, Fk*P]; query frame i attends key frames <= offset+i
    where offset = n_key_frames - n_query_frames (cached prefix is always
    visible)."""
    key = (n_query_frames, n_key_frames, tokens_per_frame, np.dtype(dtype).str)
    hit = _MASK_CACHE.get(key)
    if hit is not None:
        return hit
    offset = n_key_frames - n_query_frames
    qf = np.arange(n_query_frames).repeat(tokens_per_frame)
    kf = np.arange(n_key_frames).repeat(tokens_per_frame)
    bias = np.where(kf[None, :] <= qf[:, None] + offset, 0.0, _NEG).astype(dtype)
    _MASK_CACHE[key] = bias
    return bias


def _split_heads(x, n_heads):
    b, t, d = x.shape
    return x.reshape(b, t, n_heads, d // n_heads).transpose(0, 2, 1, 3)


def _merge_heads(x):
    b, h, t, dh = x.shape
    return x.transpose(0, 2, 1, 3).reshape(b, t, h * dh)


def _np_softmax(x):
    e = np.exp(x - x.max(axis=-1, keepdims=True))
    return e / e.sum(axis=-1, keepdims=True)


class KVCache:
    """Per-layer cached keys/values in head layout [B, H, T, dh]."""

    def __init__(self, tokens_per_frame: int, n_heads: int):
        self.tokens_per_frame = tokens_per_frame
        self.n_heads = n_heads
        self.k = None
        self.v = None
        self.n_frames = 0

    def append(self, k, v):
        if self.k is None:
            self.k, self.v = k, v
        else:
            if k.shape[:2] != self.k.shape[:2] or k.shape[3] != self.k.shape[3]:
                raise ValueError(
                    f"cache shape mismatch: cached {self.k.shape}, new {k.shape}"
                )
            self.k = np.concatenate([self.k, k], axis=2)
            self.v = np.concatenate([self.v, v], axis=2)
        self.n_frames = self.k.shape[2] // self.tokens_per_frame

    def clone(self) -> "KVCache":
        c = KVCache(self.tokens_per_frame, self.n_heads)
        if self.k is not None:
            c.k = self.k.copy()
            c.v = self.v.copy()
            c.n_frames = self.n_frames
        return c


def frame_causal_attention(q, k, v, tokens_per_frame: int, n_heads: int = 1, cache: KVCache | None = None):
    """Attention over ``[F, P, D]`` or ``[B, F, P, D]`` inputs.

    Without a cache this is a differentiable graph op. With a cache the new
    frames' keys/values are appended and attention runs over cached + new
    tokens; that path is numpy-only (inference) and returns
    ``(output, cache)``.
    """
    if cache is not None:
        return _cached_attention(q, k, v, tokens_per_frame, n_heads, cache)

    squeeze = isinstance(q, Tensor) and q.ndim == 3
    if squeeze:
        q, k, v = (t.reshape((1,) + t.shape) for t in (q, k, v))
    b, f, p, d = q.shape
    if k.shape != q.shape or v.shape != q.shape:
        raise ValueError(f"q/k/v shapes must agree, got {q.shape}, {k.shape}, {v.shape}")
    if p != tokens_per_frame:
        raise ValueError(f"tokens_per_frame={tokens_per_frame} but inputs carry {p}")
    dh = d // n_heads
    qh = q.reshape(b, f * p, n_heads, dh).transpose(0, 2, 1, 3)
    kh = k.reshape(b, f * p, n_heads, dh).transpose(0, 2, 1, 3)
    vh = v.reshape(b, f * p, n_heads, dh).transpose(0, 2, 1, 3)
    bias = Tensor(_frame_bias(f, f, p, qh.data.dtype))
    scores = qh @ kh.transpose(0, 1, 3, 2) * (1.0 / np.sqrt(dh)) + bias
    out = scores.softmax() @ vh
    out = out.transpose(0, 2, 1, 3).reshape(b, f, p, d)
    if squeeze:
        out = out.reshape(f, p, d)
    return out


def _cached_attention(q, k, v, tokens_per_frame, n_heads, cache):
    q = q.data if isinstance(q, Tensor) else np.asarray(q)
    k = k.data if isinstance(k, Tensor) else np.asarray(k)
    v = v.data if isinstance(v, Tensor) else np.asarray(v)
    squeeze = q.ndim == 3
    if squeeze:
        q, k, v = q[None], k[None], v[None]
    b, f, p, d = q.shape
    if p != tokens_per_frame or p != cache.tokens_per_frame:
        raise ValueError("tokens_per_frame mismatch with cache")
    if n_heads != cache.n_heads:
        raise ValueError("n_heads mismatch with cache")
    dh = d // n_heads
    qh = _split_heads(q.reshape(b, f * p, d), n_heads)
    cache.append(
        _split_heads(k.reshape(b, f * p, d), n_heads),
        _split_heads(v.reshape(b, f * p, d), n_heads),
    )
    bias = _frame_bias(f, cache.n_frames, p, q.dtype)
    scores = qh @ cache.k.swapaxes(-1, -2) * (1.0 / np.sqrt(dh)) + bias
    out = _merge_heads(_np_softmax(scores) @ cache.v).reshape(b, f, p, d)
    if squeeze:
        out = out[0]
    return out, cache
