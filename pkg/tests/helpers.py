"""Shared test oracles: central finite differences for raw partials."""
from __future__ import annotations

import numpy as np

# steps tuned so truncation and roundoff balance near the quoted accuracies
FD_STEPS = {1: 1e-6, 2: 1e-4, 3: 8e-4}


def _diff_1d(f, x, var, k, h):
    """k-th central difference in variable ``var`` of f at point list x."""
    def shifted(m):
        z = list(x)
        z[var] = z[var] + m * h
        return z

    if k == 0:
        return f(x)
    if k == 1:
        return (f(shifted(1)) - f(shifted(-1))) / (2 * h)
    if k == 2:
        return (f(shifted(1)) - 2 * f(shifted(0)) + f(shifted(-1))) / h**2
    if k == 3:
        return (f(shifted(2)) - 2 * f(shifted(1)) + 2 * f(shifted(-1)) - f(shifted(-2))) / (2 * h**3)
    raise ValueError(f"no stencil for order {k}")


def central_partial(f, x, alpha):
    """Raw partial D^alpha f at x by nested central differences.

    ``f`` maps a list of floats to a float; accuracy degrades with
    sum(alpha), roughly 1e-10 / 1e-7 / 1e-5 for total orders 1 / 2 / 3.
    """
    order = sum(alpha)
    h = FD_STEPS[max(order, 1)]
    g = f
    for var, k in enumerate(alpha):
        if k == 0:
            continue
        g = (lambda z, gg=g, vv=var, kk=k: _diff_1d(gg, z, vv, kk, h))
    return g(list(x)) if order > 0 else f(list(x))


def rel_err(a, b, floor=1.0):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    scale = np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)
    return np.max(np.abs(a - b) / scale)
