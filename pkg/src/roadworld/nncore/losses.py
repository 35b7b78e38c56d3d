"""Loss functions: heteroscedastic Laplace NLL and the winner-takes-all
multi-hypothesis trajectory loss."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor


def laplace_nll(x, mu, b, reduce: str = "mean") -> Tensor:
    """log(2b) + |x - mu| / b. ``b`` must be positive (use an exp of a
    predicted log-scale). ``reduce`` in {mean, sum, none}."""
    x = x if isinstance(x, Tensor) else Tensor(x)
    nll = (b * 2.0).log() + (x - mu).abs() / b
    if reduce == "mean":
        return nll.mean()
    if reduce == "sum":
        return nll.sum()
    if reduce == "none":
        return nll
    raise ValueError(f"unknown reduce mode {reduce!r}")


def mhp_winner_indices(means, scales, target) -> np.ndarray:
    """Index of the hypothesis with the lowest summed Laplace NLL (ties break
    to the lowest index). Shapes: means/scales [..., K, S, C], target
    [..., S, C]."""
    m = means.data if isinstance(means, Tensor) else np.asarray(means)
    s = scales.data if isinstance(scales, Tensor) else np.asarray(scales)
    t = target.data if isinstance(target, Tensor) else np.asarray(target)
    nll = np.log(2.0 * s) + np.abs(t[..., None, :, :] - m) / s
    per_hyp = nll.sum(axis=(-1, -2))
    return np.argmin(per_hyp, axis=-1)


def mhp_loss(means, scales, logits, target, average_elements: bool = False) -> Tensor:
    """Winner-takes-all multi-hypothesis loss.

    The winner is the hypothesis with the lowest summed Laplace NLL against
    the target; the loss is that hypothesis' NLL plus cross-entropy of the
    selection logits against the winner index. Gradients reach only the
    winner's regression outputs and all selection logits. Leading batch
    dimensions are averaged.

    means/scales: [..., K, S, C]; logits: [..., K]; target: [..., S, C].
    ``average_elements`` divides the regression term by S*C.
    """
    means = means if isinstance(means, Tensor) else Tensor(means)
    scales = scales if isinstance(scales, Tensor) else Tensor(scales)
    logits = logits if isinstance(logits, Tensor) else Tensor(logits)
    target = target if isinstance(target, Tensor) else Tensor(target)

    t = target.reshape(target.shape[:-2] + (1,) + target.shape[-2:])
    nll = laplace_nll(t, means, scales, reduce="none")  # [..., K, S, C]
    per_hyp = nll.sum(axis=(-1, -2))  # [..., K]

    winner = np.argmin(per_hyp.data, axis=-1)
    onehot = np.zeros(per_hyp.shape, dtype=per_hyp.data.dtype)
    np.put_along_axis(onehot, winner[..., None], 1.0, axis=-1)
    onehot = Tensor(onehot)

    winner_nll = (per_hyp * onehot).sum(axis=-1)
    if average_elements:
        winner_nll = winner_nll * (1.0 / (means.shape[-1] * means.shape[-2]))
    ce = -(logits.log_softmax() * onehot).sum(axis=-1)
    return (winner_nll + ce).mean()
