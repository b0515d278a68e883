"""Central finite-difference check of the analytic gradients."""

from __future__ import annotations

import numpy as np

from yieldseq.models.engine import backward, sequence_forward
from yieldseq.models.network import Network

DENOM_FLOOR = 1e-12


def numeric_gradient(net: Network, window, target: float, epsilon: float) -> dict[str, np.ndarray]:
    """(L(theta+eps) - L(theta-eps)) / 2eps for every parameter entry."""
    probe = net.copy()
    num = {}
    for name, p in probe.params.items():
        g = np.zeros_like(p)
        flat, gflat = p.reshape(-1), g.reshape(-1)
        for j in range(flat.size):
            orig = flat[j]
            flat[j] = orig + epsilon
            up = abs(sequence_forward(probe, window) - target)
            flat[j] = orig - epsilon
            down = abs(sequence_forward(probe, window) - target)
            flat[j] = orig
            gflat[j] = (up - down) / (2.0 * epsilon)
        num[name] = g
    return num


def relative_errors(analytic: dict[str, np.ndarray], numeric: dict[str, np.ndarray]) -> dict[str, float]:
    out = {}
    for name, a in analytic.items():
        n = numeric[name]
        denom = np.maximum(np.maximum(np.abs(a), np.abs(n)), DENOM_FLOOR)
        out[name] = float(np.max(np.abs(a - n) / denom)) if a.size else 0.0
    return out


def gradient_check(net: Network, sample, epsilon: float = 1e-5,
                   analytic: dict[str, np.ndarray] | None = None) -> float:
    """Worst relative error between analytic and numeric gradients.

    ``sample`` is a (window, target) pair. ``analytic`` overrides the
    gradients under test; by default they come from ``backward``.
    """
    if epsilon <= 0:
        raise ValueError("epsilon must be positive")
    window, target = sample
    if analytic is None:
        _, analytic = backward(net, window, target)
    numeric = numeric_gradient(net, window, target, epsilon)
    return max(relative_errors(analytic, numeric).values())
