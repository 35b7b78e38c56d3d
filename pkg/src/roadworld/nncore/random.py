"""Sampling helpers."""

from __future__ import annotations

import numpy as np


def sample_logit_normal(mean: float, std: float, rng, size=None):
    """sigmoid(z) with z ~ Normal(mean, std); values lie strictly in (0, 1)."""
    if std <= 0:
        raise ValueError("std must be positive")
    z = rng.normal(mean, std, size)
    return 1.0 / (1.0 + np.exp(-z))
