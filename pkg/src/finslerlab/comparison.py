"""Model comparison functions, integral curvature norms, and checkers.

The checkers turn comparison statements into per-radius rows {r, lhs, rhs,
margin} with an explicit tolerance policy: a row passes when
margin >= -(abs_tol + rel_tol * scale), and rows flagged as sitting on a
kink of the excess mean curvature get ten times the budget since the
quantity is only Lipschitz there.

Pointwise integral-curvature data is expensive (each point takes a
direction search under the weighted Ricci), so fields cache the direction
infimum per radial node and all checkers share the cache; quadratures run
on a subsampled radial grid whose step is still fine enough that halving
it moves the norms below 1e-5 relative.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as _field
from functools import lru_cache

import numpy as np
from scipy.integrate import quad

from .catalog import MeasureDensity, Metric, unit_sphere_area
from .errors import PoleError
from .measure import ric_inf_lower
from .numerics import cumulative_trapezoid, sci, simpson_weights
from .polar import PolarField, ball_volume, hypothesis_S, _node_index

TOL_ABS = 1e-8
TOL_REL = 1e-6
KINK_FACTOR = 10.0

PASS = "pass"
FAIL = "fail"
HYPOTHESIS_UNMET = "hypothesis_unmet"
THRESHOLD_UNMET = "threshold_unmet"
INFORMATIONAL = "informational"

# direction-search effort for the pointwise Ricci infimum on planar grids;
# the objectives are smooth and low-frequency over the catalog families
_SEARCH_COARSE = 32
_SEARCH_ITERS = 40
_SEARCH_CHUNK = 1024

# sign changes of the excess mean curvature below this size are grid noise
# (space forms sit at identically zero), not kinks
_KINK_EPS = 1e-6

__all__ = [
    "ModelFunctions", "model_functions", "mean_curvature_model",
    "IntegralNorms", "integral_norms", "Row", "ComparisonReport",
    "riccati_check", "check_laplacian_comparison", "constant_C_volume",
    "check_volume_comparison", "check_doubling", "check_relative_volume",
    "check_volume_growth", "check_norm_relation", "doubling_threshold",
    "PASS", "FAIL", "HYPOTHESIS_UNMET", "THRESHOLD_UNMET", "INFORMATIONAL",
]


# ---------------------------------------------------------------------------
# model space functions
# ---------------------------------------------------------------------------

def _warp(K: float, t):
    t = np.asarray(t, dtype=float)
    if K > 0.0:
        q = math.sqrt(K)
        return np.sin(q * t) / q
    if K < 0.0:
        q = math.sqrt(-K)
        return np.sinh(q * t) / q
    return t.copy()


def _warp_prime(K: float, t):
    t = np.asarray(t, dtype=float)
    if K > 0.0:
        return np.cos(math.sqrt(K) * t)
    if K < 0.0:
        return np.cosh(math.sqrt(-K) * t)
    return np.ones_like(t)


def mean_curvature_model(n: int, K: float, t):
    """(n-1) * warp'(t)/warp(t), the mean curvature of model spheres."""
    s = _warp(K, t)
    if np.any(np.abs(s) < 1e-14):
        raise PoleError(f"model warp function vanishes in radius range (K={K})")
    return (n - 1) * _warp_prime(K, t) / s


@lru_cache(maxsize=4096)
def _model_volume(n: int, K: float, theta: float, t: float) -> float:
    if t <= 0.0:
        return 0.0
    val, _ = quad(lambda s: math.exp(theta * s) * float(_warp(K, s)) ** (n - 1),
                  0.0, t, epsabs=1e-12, epsrel=1e-10, limit=200)
    return unit_sphere_area(n) * val


@dataclass(frozen=True)
class ModelFunctions:
    """Closed-form radial data of the constant-curvature reference space."""

    n: int
    K: float
    theta: float

    def warp(self, t):
        return _warp(self.K, t)

    def warp_prime(self, t):
        return _warp_prime(self.K, t)

    def mean_curvature(self, t):
        return mean_curvature_model(self.n, self.K, t)

    def volume(self, t):
        t = np.asarray(t, dtype=float)
        if t.ndim == 0:
            return _model_volume(self.n, self.K, self.theta, float(t))
        return np.array([_model_volume(self.n, self.K, self.theta, float(v))
                         for v in t])


def model_functions(n: int, K: float, theta: float) -> ModelFunctions:
    if theta < 0.0:
        raise ValueError(f"theta must be nonnegative, got {theta}")
    return ModelFunctions(int(n), float(K), float(theta))


# ---------------------------------------------------------------------------
# reports
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    r: float
    lhs: float
    rhs: float
    margin: float
    kink: bool = False


@dataclass(eq=False)
class ComparisonReport:
    theorem: str
    status: str
    hypothesis: object
    rows: list
    tol_abs: float = TOL_ABS
    tol_rel: float = TOL_REL
    extra: dict = _field(default_factory=dict)

    @property
    def hypothesis_ok(self) -> bool:
        return self.hypothesis is None or bool(self.hypothesis.ok)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def worst_margin(self) -> float:
        if not self.rows:
            return math.inf
        return min(row.margin for row in self.rows)

    def row_budget(self, row: Row) -> float:
        tol = self.tol_abs + self.tol_rel * max(abs(row.lhs), abs(row.rhs))
        return tol * KINK_FACTOR if row.kink else tol

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "status": self.status,
            "hypothesis_ok": self.hypothesis_ok,
            "worst_margin": self.worst_margin() if self.rows else None,
            "pass": self.passed,
        }

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("r,lhs,rhs,margin\n")
            for row in self.rows:
                fh.write(f"{sci(row.r)},{sci(row.lhs)},{sci(row.rhs)},"
                         f"{sci(row.margin)}\n")


def _finish(theorem, hypothesis, rows, extra, tol_scale,
            status=None) -> ComparisonReport:
    rep = ComparisonReport(theorem, PASS, hypothesis, list(rows),
                           TOL_ABS * tol_scale, TOL_REL * tol_scale,
                           dict(extra))
    if status is not None:
        rep.status = status
    elif any(row.margin < -rep.row_budget(row) for row in rep.rows):
        rep.status = FAIL
    return rep


def _hypothesis_gate(theorem, field, theta, extra=None):
    rep = hypothesis_S(field, theta)
    if rep.ok:
        return rep, None
    out = ComparisonReport(theorem, HYPOTHESIS_UNMET, rep, [],
                           extra=dict(extra or {}))
    return rep, out


def _require_positive_cap(K: float, *radii: float) -> None:
    if K <= 0.0:
        return
    cap = math.pi / (2.0 * math.sqrt(K))
    worst = max(radii)
    if worst > cap + 1e-12:
        raise ValueError(
            f"radius {worst} exceeds the K>0 comparison cap {cap:.6f}")


def _capped_range(field: PolarField, K: float) -> float:
    """Largest grid radius within the K > 0 comparison range."""
    if K <= 0.0:
        return field.r_max
    cap = math.pi / (2.0 * math.sqrt(K))
    k = int(math.floor(cap / field.h + 1e-9))
    if k < 2:
        raise ValueError(f"grid too coarse for the K={K} radius cap {cap:.6f}")
    return float(field.r[min(k, len(field.r)) - 1])


def _check_p(n: int, p: float) -> None:
    if not p > n / 2.0:
        raise ValueError(f"need p > n/2 (= {n / 2}), got p={p}")


# ---------------------------------------------------------------------------
# subsampled radial grid and the cached pointwise curvature infimum
# ---------------------------------------------------------------------------

_SUBGRID_TARGET = 24


def _subgrid(field: PolarField, R: float, stride: int | None = None):
    """Node indices (0-based into field.r) of the quadrature subgrid on
    (0, R]: multiples of stride*h ending exactly at R."""
    kR = _node_index(field, R)
    if stride is None:
        target = max(1, kR // _SUBGRID_TARGET)
        stride = next(s for s in range(target, 0, -1) if kR % s == 0)
    else:
        if stride < 1 or kR % stride:
            raise ValueError(
                f"stride {stride} does not divide the {kR} nodes up to R={R}")
    return np.arange(stride - 1, kR, stride), stride


def _ric_lower_at(field: PolarField, idx) -> np.ndarray:
    """Direction infimum of the weighted Ricci (per unit F-norm squared) at
    the stored grid points of the given radial nodes; cached per node."""
    cache = field.__dict__.setdefault("_ric_lower_nodes", {})
    missing = [int(k) for k in idx if int(k) not in cache]
    if missing:
        n = field.metric.n
        pts = field.x[:, missing, :]
        B = pts.shape[0]
        flat = pts.reshape(-1, n)
        out = np.empty(len(flat))
        kw = {"coarse": _SEARCH_COARSE, "iters": _SEARCH_ITERS} if n == 2 else {}
        for a in range(0, len(flat), _SEARCH_CHUNK):
            b = min(a + _SEARCH_CHUNK, len(flat))
            out[a:b] = ric_inf_lower(field.metric, field.measure,
                                     [flat[a:b, i] for i in range(n)], **kw)
        grid = out.reshape(B, len(missing))
        for j, k in enumerate(missing):
            cache[k] = grid[:, j]
    return np.stack([cache[int(k)] for k in idx], axis=1)


def _excess_at(field: PolarField, idx, K: float) -> np.ndarray:
    low = _ric_lower_at(field, idx)
    return np.maximum((field.metric.n - 1) * K - low, 0.0)


# ---------------------------------------------------------------------------
# integral norms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class IntegralNorms:
    """Normalized curvature-excess norm and its scale-free variant."""

    p: float
    R: float
    theta: float
    K: float
    norm_bar: float
    kbar: float


def _norm_bar(field: PolarField, p: float, R: float, theta: float, K: float,
              stride: int | None = None) -> float:
    idx, stride = _subgrid(field, R, stride)
    hsub = stride * field.h
    exc = _excess_at(field, idx, K)
    sig = field.sigma[:, idx]
    damp = np.exp(-theta * field.r[idx])
    vals = exc ** p * damp[None, :] * sig
    w = simpson_weights(len(idx), hsub)
    per_dir = np.concatenate([np.zeros((vals.shape[0], 1)), vals], axis=1) @ w
    total = float(per_dir @ field.grid.weights)
    return (total / ball_volume(field, R)) ** (1.0 / p)


def integral_norms(metric: Metric, measure: MeasureDensity, field: PolarField,
                   p: float, R: float, theta: float, K: float,
                   stride: int | None = None) -> IntegralNorms:
    """Curvature-excess norms over the forward ball of radius R.

    norm_bar averages (excess below (n-1)K)^p with e^(-theta r) damping
    over the ball and takes the 1/p root; kbar is the K=0 variant scaled
    by R^2, dimensionless under metric scaling.
    """
    _check_p(metric.n, p)
    _require_positive_cap(K, R)
    if metric.to_config() != field.metric.to_config() \
            or measure.to_config() != field.measure.to_config():
        raise ValueError("field was built from a different metric-measure pair")
    nb = _norm_bar(field, p, R, theta, K, stride)
    kb = R * R * (nb if K == 0.0 else _norm_bar(field, p, R, theta, 0.0, stride))
    return IntegralNorms(p, R, theta, K, nb, kb)


# ---------------------------------------------------------------------------
# pointwise differential inequality for the mean-curvature excess
# ---------------------------------------------------------------------------

def _phi_and_slope(field: PolarField, model: ModelFunctions):
    """phi = (excess mean curvature)_+ on the full radial grid with its
    radial derivative: central differences inside, second-order one-sided
    stencils at range ends and on each side of a genuine sign change."""
    h = field.h
    hk = model.mean_curvature(field.r)
    raw = field.delta_r - hk[None, :] - model.theta
    phi = np.maximum(raw, 0.0)
    m = phi.shape[1]
    if m < 3:
        raise ValueError("need at least three radial nodes")
    dphi = np.empty_like(phi)
    dphi[:, 1:-1] = (phi[:, 2:] - phi[:, :-2]) / (2.0 * h)
    dphi[:, 0] = (-3.0 * phi[:, 0] + 4.0 * phi[:, 1] - phi[:, 2]) / (2.0 * h)
    dphi[:, -1] = (3.0 * phi[:, -1] - 4.0 * phi[:, -2] + phi[:, -3]) / (2.0 * h)

    sign = raw > 0.0
    big = np.abs(raw) > _KINK_EPS
    flip = (sign[:, 1:] != sign[:, :-1]) & (big[:, 1:] | big[:, :-1])
    kink = np.zeros_like(sign)
    kink[:, 1:] |= flip
    kink[:, :-1] |= flip

    fwd = np.zeros_like(phi)
    fwd[:, :-2] = (-3.0 * phi[:, :-2] + 4.0 * phi[:, 1:-1]
                   - phi[:, 2:]) / (2.0 * h)
    bwd = np.zeros_like(phi)
    bwd[:, 2:] = (3.0 * phi[:, 2:] - 4.0 * phi[:, 1:-1]
                  + phi[:, :-2]) / (2.0 * h)
    # a node just after a flip takes the forward stencil, just before the
    # next flip the backward one; wedged between two flips, neither applies
    starts = np.zeros_like(sign)
    starts[:, 1:] = flip
    starts[:, -2:] = False
    ends = np.zeros_like(sign)
    ends[:, :-1] = flip
    ends[:, :2] = False
    dphi = np.where(starts & ~ends, fwd, dphi)
    dphi = np.where(ends & ~starts, bwd, dphi)
    dphi = np.where(starts & ends, 0.0, dphi)
    return phi, dphi, kink


def riccati_check(field: PolarField, model: ModelFunctions, p: float,
                  tol_scale: float = 1.0,
                  stride: int | None = None) -> ComparisonReport:
    """Pointwise inequality phi' + phi^2/(n-1) + 2 phi H/(n-1) <= excess,
    reported at evenly strided radii ending at the capped range, plus any
    kink radii."""
    _check_p(field.metric.n, p)
    hyp, bail = _hypothesis_gate("riccati", field, model.theta)
    if bail is not None:
        return bail
    n = field.metric.n
    cap = _capped_range(field, model.K)
    phi, dphi, kinks = _phi_and_slope(field, model)
    hk = model.mean_curvature(field.r)
    # report rows need no quadrature alignment, so the stride is free to
    # skip the pole-adjacent nodes where differentiating delta_r amplifies
    # the integrator tolerance past tol_abs (a capped range can make the
    # node count prime, which would force the aligned subgrid to stride 1)
    kR = _node_index(field, cap)
    if stride is None:
        stride = max(1, kR // _SUBGRID_TARGET)
    elif stride < 1:
        raise ValueError(f"stride must be positive, got {stride}")
    idx = np.arange(stride - 1, kR, stride)
    if idx[-1] != kR - 1:
        idx = np.append(idx, kR - 1)
    kmax = int(idx[-1])
    kink_nodes = np.nonzero(np.any(kinks[:, :kmax + 1], axis=0))[0]
    nodes = np.unique(np.concatenate([idx, kink_nodes]))
    exc = _excess_at(field, nodes, model.K)
    rows = []
    for j, k in enumerate(nodes):
        lhs_all = (dphi[:, k] + phi[:, k] ** 2 / (n - 1)
                   + 2.0 * phi[:, k] * hk[k] / (n - 1))
        marg = exc[:, j] - lhs_all
        b = int(np.argmin(marg))
        rows.append(Row(float(field.r[k]), float(lhs_all[b]), float(exc[b, j]),
                        float(marg[b]), bool(kinks[b, k])))
    return _finish("riccati", hyp, rows, {"K": model.K, "theta": model.theta},
                   tol_scale)


# ---------------------------------------------------------------------------
# cumulative comparison of the excess against the integral curvature
# ---------------------------------------------------------------------------

def check_laplacian_comparison(field: PolarField, p: float, K: float,
                               theta: float, tol_scale: float = 1.0,
                               stride: int | None = None) -> ComparisonReport:
    """Both cumulative inequalities bounding powers of the excess phi by the
    integral of the curvature excess along each ray; the reported margin at
    each subgrid radius is the worst over directions."""
    n = field.metric.n
    _check_p(n, p)
    hyp, bail = _hypothesis_gate("laplacian", field, theta)
    if bail is not None:
        return bail
    cap = _capped_range(field, K)
    model = model_functions(n, K, theta)
    phi, _, _ = _phi_and_slope(field, model)
    damp_full = np.exp(-theta * field.r)

    idx, stride = _subgrid(field, cap, stride)
    hsub = stride * field.h
    exc = _excess_at(field, idx, K)
    B = exc.shape[0]

    # lhs integral on the full grid, rhs integral on the excess subgrid,
    # both with a leading r=0 node where the density vanishes
    c1 = ((n - 1) * (2.0 * p - 1.0) / (2.0 * p - n)) ** p
    c2 = (2.0 * p - 1.0) ** p * ((n - 1) / (2.0 * p - n)) ** (p - 1.0)
    lhs1_full = cumulative_trapezoid(
        np.concatenate([np.zeros((B, 1)),
                        phi ** (2 * p) * damp_full[None, :] * field.sigma],
                       axis=1), field.h, axis=1)
    rhs_int = cumulative_trapezoid(
        np.concatenate([np.zeros((B, 1)),
                        exc ** p * damp_full[idx][None, :]
                        * field.sigma[:, idx]], axis=1),
        hsub, axis=1)[:, 1:]

    rows = []
    for j, k in enumerate(idx):
        lhs1 = lhs1_full[:, k + 1]
        rhs1 = c1 * rhs_int[:, j]
        m1 = rhs1 - lhs1
        b1 = int(np.argmin(m1))
        rows.append(Row(float(field.r[k]), float(lhs1[b1]), float(rhs1[b1]),
                        float(m1[b1])))
    for j, k in enumerate(idx):
        lhs2 = phi[:, k] ** (2 * p - 1) * damp_full[k] * field.sigma[:, k]
        rhs2 = c2 * rhs_int[:, j]
        m2 = rhs2 - lhs2
        b2 = int(np.argmin(m2))
        rows.append(Row(float(field.r[k]), float(lhs2[b2]), float(rhs2[b2]),
                        float(m2[b2])))
    return _finish("laplacian", hyp, rows,
                   {"K": K, "theta": theta, "p": p}, tol_scale)


# ---------------------------------------------------------------------------
# volume comparison chain
# ---------------------------------------------------------------------------

def constant_C_volume(n: int, p: float, theta: float, K: float, R: float,
                      mBR: float) -> float:
    """Explicit constant of the almost-monotonicity volume comparison."""
    _check_p(n, p)
    _require_positive_cap(K, R)
    pref = (1.0 / (2.0 * p)) * math.sqrt((n - 1) * (2.0 * p - 1.0)
                                         / (2.0 * p - n))
    expo = -(2.0 * p + 1.0) / (2.0 * p)

    def integrand(t):
        v = _model_volume(n, K, theta, t)
        return (t * math.exp((1.0 + 1.0 / (2.0 * p)) * theta * t)
                * float(_warp(K, t)) ** (n - 1) * v ** expo)

    val, _ = quad(integrand, 0.0, R, epsabs=1e-12, epsrel=1e-9, limit=200)
    return pref * mBR ** (1.0 / (2.0 * p)) * unit_sphere_area(n) * val


def check_volume_comparison(field: PolarField, p: float, K: float,
                            theta: float, r: float, R: float,
                            tol_scale: float = 1.0,
                            stride: int | None = None) -> ComparisonReport:
    """Almost-monotonicity of ball volume against the model between two
    radii; when the norm vanishes the report also carries the per-node
    monotonicity ladder of the ratio."""
    n = field.metric.n
    _check_p(n, p)
    if not 0.0 < r <= R:
        raise ValueError(f"need 0 < r <= R, got r={r}, R={R}")
    _require_positive_cap(K, R)
    hyp, bail = _hypothesis_gate("volume", field, theta)
    if bail is not None:
        return bail
    model = model_functions(n, K, theta)
    norms = integral_norms(field.metric, field.measure, field, p, R, theta, K,
                           stride)
    mBR = ball_volume(field, R)
    C = constant_C_volume(n, p, theta, K, R, mBR)
    e = 1.0 / (2.0 * p)
    ratio_R = mBR / model.volume(R)
    ratio_r = ball_volume(field, r) / model.volume(r)
    lhs = ratio_R ** e - ratio_r ** e
    rhs = C * math.sqrt(norms.norm_bar)
    rows = [Row(float(R), float(lhs), float(rhs), float(rhs - lhs))]
    if norms.norm_bar < 1e-12:
        idx, _ = _subgrid(field, R, stride)
        keep = [int(k) for k in idx if field.r[k] >= r - 1e-12]
        ratios = [ball_volume(field, float(field.r[k])) /
                  model.volume(float(field.r[k])) for k in keep]
        for j in range(1, len(keep)):
            rows.append(Row(float(field.r[keep[j]]), float(ratios[j]),
                            float(ratios[j - 1]),
                            float(ratios[j - 1] - ratios[j])))
    return _finish("volume", hyp, rows,
                   {"K": K, "theta": theta, "p": p, "C": C,
                    "norm_bar": norms.norm_bar}, tol_scale)


def doubling_threshold(n: int, p: float, theta: float, K: float, R: float,
                       mBR: float, vR: float, slack: float) -> dict:
    """Explicit smallness thresholds for the volume doubling statement.

    eps1 keeps the ball/model ratio at the top radius stable under halving
    (it enters squared since the comparison bounds the square root of the
    norm); eps2 is the literal slack-factor threshold.
    """
    C = constant_C_volume(n, p, theta, K, R, mBR)
    base = (vR / mBR) ** (-1.0 / (2.0 * p)) / (2.0 * C)
    eps1 = base * base
    eps2 = (1.0 - slack ** (-1.0 / (2.0 * p))) * base
    return {"eps": min(eps1, eps2), "eps1": eps1, "eps2": eps2, "C": C}


def check_doubling(field: PolarField, p: float, K: float, theta: float,
                   slack: float, r1: float, r2: float, R: float,
                   tol_scale: float = 1.0,
                   stride: int | None = None) -> ComparisonReport:
    """Volume doubling between r1 <= r2 under the norm-smallness threshold."""
    n = field.metric.n
    _check_p(n, p)
    if not (slack > 1.0 and 0.0 < r1 <= r2 <= R):
        raise ValueError("need slack > 1 and 0 < r1 <= r2 <= R")
    _require_positive_cap(K, R)
    hyp, bail = _hypothesis_gate("doubling", field, theta)
    if bail is not None:
        return bail
    model = model_functions(n, K, theta)
    norms = integral_norms(field.metric, field.measure, field, p, R, theta, K,
                           stride)
    thr = doubling_threshold(n, p, theta, K, R, ball_volume(field, R),
                             model.volume(R), slack)
    extra = {"K": K, "theta": theta, "p": p, "slack": slack,
             "norm_bar": norms.norm_bar, **thr}
    met = norms.norm_bar < thr["eps"]
    lhs = ball_volume(field, r2) / ball_volume(field, r1)
    mid = slack * model.volume(r2) / model.volume(r1)
    rhs = slack * math.exp((theta + (n - 1) * math.sqrt(abs(K))) * r2) \
        * (r2 / r1) ** n
    rows = [Row(float(r2), float(lhs), float(mid), float(mid - lhs)),
            Row(float(r2), float(mid), float(rhs), float(rhs - mid))]
    return _finish("doubling", hyp, rows, extra, tol_scale,
                   status=None if met else THRESHOLD_UNMET)


def _annulus_model_volume(n, K, theta, a, b):
    return _model_volume(n, K, theta, b) - _model_volume(n, K, theta, a)


def check_relative_volume(field: PolarField, p: float, K: float, theta: float,
                          r1: float, r2: float, R1: float, R2: float,
                          tol_scale: float = 1.0,
                          stride: int | None = None) -> ComparisonReport:
    """Almost-monotonicity between the nested annuli (r1, R1) and (r2, R2)."""
    n = field.metric.n
    _check_p(n, p)
    if not (0.0 <= r1 <= r2 < R1 <= R2):
        raise ValueError("need 0 <= r1 <= r2 < R1 <= R2")
    _require_positive_cap(K, R2)
    hyp, bail = _hypothesis_gate("relative_volume", field, theta)
    if bail is not None:
        return bail
    norms = integral_norms(field.metric, field.measure, field, p, R2, theta, K,
                           stride)
    mBR2 = ball_volume(field, R2)

    def ball(rr):
        return 0.0 if rr == 0.0 else ball_volume(field, rr)

    expo = -(2.0 * p + 1.0) / (2.0 * p)
    pref = (1.0 / (2.0 * p)) * math.sqrt((n - 1) * (2.0 * p - 1.0)
                                         / (2.0 * p - n)) \
        * unit_sphere_area(n) * mBR2 ** (1.0 / (2.0 * p))
    term1 = 0.0
    if r2 > r1:
        val1, _ = quad(
            lambda t: _annulus_model_volume(n, K, theta, t, R1) ** expo,
            r1, r2, epsabs=1e-12, epsrel=1e-9, limit=200)
        term1 = (R1 * math.exp((1.0 + 1.0 / (2.0 * p)) * theta * R1)
                 * float(_warp(K, R1)) ** (n - 1) * val1)
    term2 = 0.0
    if R2 > R1:
        term2, _ = quad(
            lambda t: (float(_warp(K, t)) ** (n - 1) * t
                       * math.exp((1.0 + 1.0 / (2.0 * p)) * theta * t)
                       * _annulus_model_volume(n, K, theta, r2, t) ** expo),
            R1, R2, epsabs=1e-12, epsrel=1e-9, limit=200)
    C = pref * (term1 + term2)

    e = 1.0 / (2.0 * p)
    outer = (ball(R2) - ball(r2)) / _annulus_model_volume(n, K, theta, r2, R2)
    inner = (ball(R1) - ball(r1)) / _annulus_model_volume(n, K, theta, r1, R1)
    lhs = outer ** e - inner ** e
    rhs = C * math.sqrt(norms.norm_bar)
    rows = [Row(float(R2), float(lhs), float(rhs), float(rhs - lhs))]
    return _finish("relative_volume", hyp, rows,
                   {"K": K, "theta": theta, "p": p, "C": C,
                    "norm_bar": norms.norm_bar}, tol_scale)


def check_volume_growth(field: PolarField, p: float, R: float,
                        tol_scale: float = 1.0,
                        stride: int | None = None) -> ComparisonReport:
    """Shell-volume smallness at radius R for flat reference, undamped."""
    n = field.metric.n
    _check_p(n, p)
    if R < 1.0:
        raise ValueError(f"growth estimate needs R >= 1, got {R}")
    hyp, bail = _hypothesis_gate("growth", field, 0.0)
    if bail is not None:
        return bail
    norms = integral_norms(field.metric, field.measure, field, p, R + 1.0,
                           0.0, 0.0, stride)
    eps = (R * (R + 1.0) ** ((2.0 * p + 1.0) * n)) ** (-1.0 / p)
    c_growth = (n / p) * math.sqrt((n - 1) * (2.0 * p - 1.0) / (2.0 * p - n))
    c3 = 2.0 ** (2.0 * p - 1.0) * n * 2.0 ** n
    c4 = 2.0 ** (2.0 * p - 1.0) * c_growth ** (2.0 * p)
    c5 = c3 + c4
    m_out = ball_volume(field, R + 1.0)
    m_in = 0.0 if R == 1.0 else ball_volume(field, R - 1.0)
    lhs = (m_out - m_in) / m_out
    rhs = c5 / R
    rows = [Row(float(R), float(lhs), float(rhs), float(rhs - lhs))]
    extra = {"p": p, "eps": eps, "kbar": norms.kbar, "C3": c3, "C4": c4,
             "C5": c5, "linear_growth_witness": ball_volume(field, R) / R}
    met = norms.kbar < eps
    return _finish("growth", hyp, rows, extra, tol_scale,
                   status=None if met else THRESHOLD_UNMET)


def check_norm_relation(field: PolarField, p: float, K: float, theta: float,
                        slack: float, r1: float, r2: float,
                        tol_scale: float = 1.0,
                        stride: int | None = None) -> ComparisonReport:
    """Transfer of the scaled norm from radius r2 down to r1 <= r2."""
    n = field.metric.n
    _check_p(n, p)
    if not (slack > 1.0 and 0.0 < r1 <= r2):
        raise ValueError("need slack > 1 and 0 < r1 <= r2")
    _require_positive_cap(K, r2)
    hyp, bail = _hypothesis_gate("norm_relation", field, theta)
    if bail is not None:
        return bail
    model = model_functions(n, K, theta)
    n1 = integral_norms(field.metric, field.measure, field, p, r1, theta, K,
                        stride)
    n2 = integral_norms(field.metric, field.measure, field, p, r2, theta, K,
                        stride)
    thr = doubling_threshold(n, p, theta, K, r2, ball_volume(field, r2),
                             model.volume(r2), slack)
    met = n2.norm_bar < thr["eps"]
    grow = slack ** (1.0 / p) * math.exp(
        (theta + (n - 1) * math.sqrt(abs(K))) * r2 / p)
    lhs = r1 * r1 * n1.norm_bar
    mid = grow * (r1 / r2) ** (2.0 - n / p) * r2 * r2 * n2.norm_bar
    rhs = grow * r2 * r2 * n2.norm_bar
    rows = [Row(float(r1), float(lhs), float(mid), float(mid - lhs)),
            Row(float(r2), float(mid), float(rhs), float(rhs - mid))]
    extra = {"K": K, "theta": theta, "p": p, "slack": slack,
             "norm_bar_r1": n1.norm_bar, "norm_bar_r2": n2.norm_bar, **thr}
    return _finish("norm_relation", hyp, rows, extra, tol_scale,
                   status=None if met else THRESHOLD_UNMET)
