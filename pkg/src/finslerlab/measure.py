"""Measure-weighted geometry of a norm field.

The distortion compares the fiberwise volume of the fundamental tensor with
the reference density; its derivatives along the geodesic flow feed the
weighted Ricci quantities used by the comparison checks.
"""
from __future__ import annotations

import numpy as np

from .catalog import Metric, MeasureDensity
from .curvature import _jet_det, fundamental_tensor, ricci_scalar, spray_jets
from .errors import BadN, SingularMatrix
from .jets import Jet, derivative_jet, jet_space, log as jet_log
from .numerics import golden_min, pattern_min

COARSE_DIRECTIONS = 16
REFINE_ITERS = 24


def _components(v) -> list[np.ndarray]:
    return [np.asarray(c, dtype=float) for c in v]


def distortion(metric: Metric, measure: MeasureDensity, x, y):
    """log(sqrt(det g(x, y)) / sigma(x)); batch transparent."""
    g = fundamental_tensor(metric, x, y)
    sign, logdet = np.linalg.slogdet(g)
    if np.any(sign <= 0):
        raise SingularMatrix("fundamental tensor lost positivity in distortion")
    sig = measure.density(metric, _components(x))
    return 0.5 * logdet - np.log(np.asarray(sig, dtype=float))


def _t_poly(space, t: Jet, coeffs):
    """Polynomial in the jet ``t`` with array coefficients, by Horner."""
    acc = Jet.constant(space, np.asarray(coeffs[-1], dtype=float))
    for c in coeffs[-2::-1]:
        acc = acc * t + np.asarray(c, dtype=float)
    return acc


def _geodesic_coefficients(metric: Metric, x, y, t_order: int):
    """Taylor coefficients of the geodesic through (x, y), up to t^3."""
    xs, ys = _components(x), _components(y)
    n = metric.n
    if t_order >= 2:
        Gj, space = spray_jets(metric, xs, ys, 1, 1)
        z = tuple([0] * (2 * n))
        G = np.stack([gj.extract(z) for gj in Gj], axis=-1)
        Gx = np.stack([np.stack([gj.extract(tuple(int(p == l) for p in range(2 * n)))
                                 for l in range(n)], axis=-1) for gj in Gj], axis=-2)
        Gy = np.stack([np.stack([gj.extract(tuple(int(p == n + l) for p in range(2 * n)))
                                 for l in range(n)], axis=-1) for gj in Gj], axis=-2)
        yv = np.stack([np.broadcast_to(c, G[..., 0].shape) for c in ys], axis=-1)
        third = -2.0 * (np.einsum("...ij,...j->...i", Gx, yv)
                        - 2.0 * np.einsum("...ij,...j->...i", Gy, G))
        a2 = -G
        a3 = third / 6.0
    else:
        from .curvature import spray_coefficients

        G = spray_coefficients(metric, xs, ys)
        a2 = -G
        a3 = np.zeros_like(a2)
    return xs, ys, a2, a3


def _flow_tau_jet(metric: Metric, measure: MeasureDensity, x, y, t_order: int):
    """Distortion along the geodesic through (x, y), as a t-jet.

    The metric tensor is read off a mixed jet in (t, eta): positions follow
    the geodesic expansion, the fiber argument is the velocity plus eta, and
    the second eta-derivatives at eta = 0 give g as univariate t-jets.
    """
    xs, ys, a2, a3 = _geodesic_coefficients(metric, x, y, t_order)
    n = metric.n
    mixed = jet_space(1 + n, t_order + 2, groups=(1, n), caps=(t_order, 2))
    tline = jet_space(1 + n, t_order, groups=(1, n), caps=(t_order, 0))

    t = Jet.variable(mixed, 0, 0.0)
    gam = [_t_poly(mixed, t, [xs[i], ys[i], a2[..., i], a3[..., i]]) for i in range(n)]
    vel = [_t_poly(mixed, t, [ys[i], 2.0 * a2[..., i], 3.0 * a3[..., i]])
           for i in range(n)]
    fiber = [vel[i] + Jet.variable(mixed, 1 + i, 0.0) for i in range(n)]
    H = metric.f_squared(gam, fiber)

    def eta_pair(i: int, j: int) -> tuple[int, ...]:
        mu = [0] * (1 + n)
        mu[1 + i] += 1
        mu[1 + j] += 1
        return tuple(mu)

    g = np.empty((n, n), dtype=object)
    for i in range(n):
        for j in range(i, n):
            gij = derivative_jet(H, eta_pair(i, j), tline) * 0.5
            g[i, j] = g[j, i] = gij
    det = _jet_det(g)
    if np.any(np.asarray(det.value) <= 0.0):
        raise SingularMatrix("fundamental tensor degenerates along the flow")

    ts = Jet.variable(tline, 0, 0.0)
    pos = [_t_poly(tline, ts, [xs[i], ys[i], a2[..., i], a3[..., i]]) for i in range(n)]
    sig = measure.density(metric, pos)
    if isinstance(sig, Jet):
        log_sig = jet_log(sig)
    else:
        log_sig = Jet.constant(tline, np.log(np.asarray(sig, dtype=float)))
    return 0.5 * jet_log(det) - log_sig, tline


def s_curvature(metric: Metric, measure: MeasureDensity, x, y):
    """Derivative of the distortion along the geodesic flow."""
    tau, tline = _flow_tau_jet(metric, measure, x, y, 1)
    mu = (1,) + (0,) * (tline.num_vars - 1)
    return tau.extract(mu)


def s_curvature_rate(metric: Metric, measure: MeasureDensity, x, y):
    """Second flow derivative of the distortion (the rate of S)."""
    tau, tline = _flow_tau_jet(metric, measure, x, y, 2)
    mu2 = (2,) + (0,) * (tline.num_vars - 1)
    return tau.extract(mu2)


def weighted_ricci(metric: Metric, measure: MeasureDensity, x, y, N=np.inf):
    """Ricci plus the flow rate of S, with the S^2/(N - n) correction.

    ``N = inf`` drops the correction; any finite real ``N != n`` is a valid
    effective dimension, including N < n.
    """
    n = metric.n
    ric = ricci_scalar(metric, x, y)
    tau, tline = _flow_tau_jet(metric, measure, x, y, 2)
    mu1 = (1,) + (0,) * (tline.num_vars - 1)
    mu2 = (2,) + (0,) * (tline.num_vars - 1)
    sdot = tau.extract(mu2)
    base = ric + sdot
    if np.isinf(N):
        return base
    if N == n:
        raise BadN(f"effective dimension N={N} coincides with n={n}")
    s = tau.extract(mu1)
    return base - s * s / (float(N) - n)


def _ric_inf_unit(metric: Metric, measure: MeasureDensity, xb, u):
    f2 = np.asarray(metric.f_squared(xb, u), dtype=float)
    return np.asarray(weighted_ricci(metric, measure, xb, u), dtype=float) / f2


def ric_inf_lower(metric: Metric, measure: MeasureDensity, x,
                  coarse: int = COARSE_DIRECTIONS, iters: int = REFINE_ITERS):
    """Infimum of the weighted Ricci over unit directions at each point.

    Coarse sweep over a fixed direction fan, then a fixed-iteration local
    refinement around the best bin; batch transparent over the points.
    """
    xs = _components(x)
    shape = np.broadcast_shapes(*[c.shape for c in xs])
    n = metric.n
    if n == 2:
        angles = np.linspace(0.0, 2.0 * np.pi, coarse, endpoint=False)
        xb = [np.broadcast_to(c, shape)[..., None] for c in xs]
        vals = _ric_inf_unit(metric, measure, xb,
                             [np.cos(angles), np.sin(angles)])
        # position-independent objectives collapse the batch axis; restore it
        vals = np.broadcast_to(vals, shape + (coarse,))
        idx = np.argmin(vals, axis=-1)
        step = 2.0 * np.pi / coarse
        lo = angles[idx] - step
        hi = angles[idx] + step

        def obj(theta):
            xp = [np.broadcast_to(c, theta.shape) for c in xs]
            return _ric_inf_unit(metric, measure, xp,
                                 [np.cos(theta), np.sin(theta)])

        _, best = golden_min(obj, lo, hi, iters=iters)
        return np.minimum(best, np.min(vals, axis=-1))
    # n == 3: polar/azimuth fan plus compass refinement on the flat batch
    na, nb = 6, 12
    alpha = np.arccos(np.linspace(1.0, -1.0, na + 2)[1:-1])
    phi = np.linspace(0.0, 2.0 * np.pi, nb, endpoint=False)
    A, P = np.meshgrid(alpha, phi, indexing="ij")
    pa, pp = A.ravel(), P.ravel()
    flat = [np.broadcast_to(c, shape).reshape(-1) for c in xs]
    u = [np.sin(pa) * np.cos(pp), np.sin(pa) * np.sin(pp), np.cos(pa)]
    vals = _ric_inf_unit(metric, measure, [c[:, None] for c in flat], u)
    vals = np.broadcast_to(vals, (flat[0].shape[0], na * nb))
    idx = np.argmin(vals, axis=-1)
    p0 = np.stack([pa[idx], pp[idx]], axis=-1)

    def obj3(params):
        a, p = params[..., 0], params[..., 1]
        return _ric_inf_unit(metric, measure, flat,
                             [np.sin(a) * np.cos(p), np.sin(a) * np.sin(p),
                              np.cos(a)])

    # step resolution 1e-5 already puts the value error far below 1e-8
    _, best = pattern_min(obj3, p0, step0=np.pi / na, tol=1e-5,
                          max_iter=2 * iters)
    out = np.minimum(best, np.min(vals, axis=-1))
    return out.reshape(shape) if shape else float(out[0])


def ric_excess(metric: Metric, measure: MeasureDensity, x, K: float,
               **kwargs):
    """Shortfall of the pointwise Ricci lower bound against (n-1)K."""
    low = ric_inf_lower(metric, measure, x, **kwargs)
    return np.maximum((metric.n - 1) * K - low, 0.0)
