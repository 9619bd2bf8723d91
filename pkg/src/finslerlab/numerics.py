"""Small deterministic numerical utilities shared across modules.

Everything here is fixed-iteration or fixed-grid: no randomized starts, no
early exits that depend on floating-point noise, so repeated runs (and
parallel workers) reproduce results bit for bit.
"""
from __future__ import annotations

import math
from typing import Callable

import numpy as np

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0
_INVPHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_min(f: Callable[[np.ndarray], np.ndarray],
               a, b, iters: int = 60) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section minimization on per-row brackets [a, b].

    ``f`` maps an array of abscissae to an array of values elementwise.
    Returns (argmin, min). 60 iterations shrink the bracket by ~1e-12.
    """
    a = np.asarray(a, dtype=float).copy()
    b = np.asarray(b, dtype=float).copy()
    h = b - a
    c = a + _INVPHI2 * h
    d = a + _INVPHI * h
    fc = f(c)
    fd = f(d)
    for _ in range(iters):
        take_left = fc < fd
        b = np.where(take_left, d, b)
        a = np.where(take_left, a, c)
        h = b - a
        c = a + _INVPHI2 * h
        d = a + _INVPHI * h
        fc = f(c)
        fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


def pattern_min(f: Callable[[np.ndarray], np.ndarray],
                p0: np.ndarray, step0, tol: float = 1e-9,
                max_iter: int = 200) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized compass pattern search minimizing f over R^d rows.

    ``p0`` has shape (B, d); ``f`` maps (B, d) points to (B,) values.
    Each iteration probes +-step along every axis and moves to the best
    probe, halving the step where the center wins.  Deterministic.
    """
    p = np.array(p0, dtype=float)
    B, d = p.shape
    step = np.broadcast_to(np.asarray(step0, dtype=float), (B,)).copy()
    fp = f(p)
    for _ in range(max_iter):
        if np.all(step < tol):
            break
        best_val = fp.copy()
        best_pt = p.copy()
        for ax in range(d):
            for sgn in (1.0, -1.0):
                q = p.copy()
                q[:, ax] += sgn * step
                fq = f(q)
                better = fq < best_val
                best_val = np.where(better, fq, best_val)
                best_pt = np.where(better[:, None], q, best_pt)
        moved = best_val < fp
        p = np.where(moved[:, None], best_pt, p)
        fp = np.where(moved, best_val, fp)
        step = np.where(moved, step, 0.5 * step)
    return p, fp


def simpson_weights(m: int, h: float) -> np.ndarray:
    """Composite Simpson weights for m+1 uniform nodes spaced h.

    Odd interval counts use the 3/8 rule on the last three intervals.
    """
    if m < 1:
        raise ValueError("need at least one interval")
    w = np.zeros(m + 1)
    if m == 1:
        w[:] = [0.5 * h, 0.5 * h]
        return w
    if m % 2 == 0:
        w[0] = w[m] = h / 3.0
        w[1:m:2] = 4.0 * h / 3.0
        w[2:m:2] = 2.0 * h / 3.0
        return w
    if m == 3:
        return np.array([3, 9, 9, 3], dtype=float) * h / 8.0
    head = simpson_weights(m - 3, h)
    w[: m - 2] += head
    w[m - 3:] += np.array([3, 9, 9, 3], dtype=float) * h / 8.0
    return w


def cumulative_trapezoid(y: np.ndarray, h: float, axis: int = -1) -> np.ndarray:
    """Cumulative trapezoid with a leading zero, uniform spacing."""
    y = np.asarray(y, dtype=float)
    avg = 0.5 * h * (np.take(y, range(1, y.shape[axis]), axis=axis)
                     + np.take(y, range(0, y.shape[axis] - 1), axis=axis))
    out = np.cumsum(avg, axis=axis)
    pad = [(0, 0)] * y.ndim
    pad[axis] = (1, 0)
    return np.pad(out, pad)


def richardson_halving(values) -> float:
    """Extrapolate f(eps) -> f(0) from values at eps, eps/2, eps/4 assuming
    an error expansion c1*eps + c2*eps^2."""
    a1, a2, a3 = (float(v) for v in values)
    b1 = 2.0 * a2 - a1
    b2 = 2.0 * a3 - a2
    return (4.0 * b2 - b1) / 3.0


def sci(x: float) -> str:
    """17-significant-digit scientific notation, the on-disk number format."""
    return "%.16e" % float(x)
