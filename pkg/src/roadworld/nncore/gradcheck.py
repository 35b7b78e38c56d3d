"""Central finite-difference gradient verification.

Run the graph in float64 (``use_dtype``) when checking against the 1e-4
relative tolerance; float32 roundoff at h=1e-3 is itself about 1e-4.
"""

from __future__ import annotations

import numpy as np


def max_relative_gradient_error(loss_fn, params, h: float = 1e-3,
                                probes_per_param: int = 20, rng=None) -> float:
    """Compare reverse-mode gradients of ``loss_fn()`` against central
    differences on up to ``probes_per_param`` coordinates of each tensor in
    ``params``. ``loss_fn`` must rebuild the graph deterministically."""
    rng = rng or np.random.default_rng(0)
    for p in params:
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = [None if p.grad is None else p.grad.copy() for p in params]

    worst = 0.0
    for p, ad in zip(params, analytic):
        if ad is None:
            ad = np.zeros_like(p.data)
        flat = p.data.reshape(-1)
        n = flat.size
        if n <= probes_per_param:
            idxs = np.arange(n)
        else:
            idxs = rng.choice(n, size=probes_per_param, replace=False)
        for i in idxs:
            orig = flat[i]
            flat[i] = orig + h
            lp = float(loss_fn().data)
            flat[i] = orig - h
            lm = float(loss_fn().data)
            flat[i] = orig
            fd = (lp - lm) / (2.0 * h)
            a = float(ad.reshape(-1)[i])
            rel = abs(a - fd) / (max(abs(a), abs(fd)) + 1e-6)
            worst = max(worst, rel)
    return worst
