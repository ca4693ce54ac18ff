"""Central finite-difference verification of analytic gradients.

This is the contract for every loss surface in the package: whatever the
tape computes must agree with (L(w+eps) - L(w-eps)) / 2eps entrywise.
"""

from __future__ import annotations

import numpy as np

from .tensor import Parameter


def gradient_check(loss_fn, params, eps: float = 1e-5, abs_floor: float = 1e-8) -> float:
    """Return the max relative error between analytic and numeric gradients.

    `loss_fn` must rebuild the loss tensor from scratch (it is called
    repeatedly while parameter entries are perturbed in place) and be
    deterministic: any internal sampling has to replay identically per call.
    Differences below `abs_floor` count as exact so dead branches and
    finite-difference noise on near-zero gradients do not register.
    """
    params: list[Parameter] = list(params)
    for p in params:
        p.zero_grad()
    loss = loss_fn()
    loss.backward()
    analytic = [np.zeros_like(p.data) if p.grad is None else p.grad.copy() for p in params]

    worst = 0.0
    for p, ga in zip(params, analytic):
        flat = p.data.reshape(-1)
        for k in range(flat.size):
            orig = flat[k]
            flat[k] = orig + eps
            up = loss_fn().item()
            flat[k] = orig - eps
            down = loss_fn().item()
            flat[k] = orig
            numeric = (up - down) / (2.0 * eps)
            a = ga.reshape(-1)[k]
            diff = abs(a - numeric)
            if diff > abs_floor:
                worst = max(worst, diff / max(abs(a), abs(numeric)))
    for p in params:
        p.zero_grad()
    return worst
