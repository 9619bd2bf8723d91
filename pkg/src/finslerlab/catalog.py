"""Metric families, volume densities, and fiberwise norm operations.

A metric object exposes its squared norm ``f_squared(x, y)`` written entirely
in jet-dispatch arithmetic, so the same code path serves plain floats,
batched numpy arrays, and :class:`~finslerlab.jets.Jet` coefficients.  ``x``
and ``y`` are sequences of per-coordinate scalars, never packed arrays; that
is what lets position and fiber components carry independent jet seeds.

Direction grids here are the canonical deterministic grids reused everywhere
a fiberwise extremum is taken (dual norms, reversibility, uniformity,
direction-minimized curvature bounds): 64 uniformly spaced angles for n = 2
and a 16-node Gauss-Legendre x 32-node trapezoid product for n = 3.
"""
from __future__ import annotations

import math
from functools import lru_cache

import numpy as np
from scipy.special import roots_legendre

from . import jets as J
from .errors import ConvergenceError, DomainError, QuadratureError
from .jets import Jet, jet_space
from .numerics import golden_min, pattern_min

N2_DIRECTIONS = 64
N3_POLAR_NODES = 16
N3_AZIMUTH_NODES = 32

# fraction of a bounded model chart treated as usable
CHART_GUARD = 0.9


def unit_sphere_area(n: int) -> float:
    """Surface measure of the Euclidean unit sphere S^(n-1)."""
    return 2.0 * math.pi ** (n / 2.0) / math.gamma(n / 2.0)


def unit_ball_volume(n: int) -> float:
    return math.pi ** (n / 2.0) / math.gamma(n / 2.0 + 1.0)


@lru_cache(maxsize=None)
def direction_nodes(n: int, level: int = 0) -> tuple[np.ndarray, np.ndarray]:
    """Deterministic unit-direction quadrature (nodes (M, n), weights (M,)).

    Weights integrate over the unit sphere (total 2*pi for n = 2, 4*pi for
    n = 3).  ``level`` doubles the base resolution level times.
    """
    if n == 2:
        m = N2_DIRECTIONS << level
        phi = 2.0 * math.pi * np.arange(m) / m
        nodes = np.stack([np.cos(phi), np.sin(phi)], axis=1)
        weights = np.full(m, 2.0 * math.pi / m)
        return nodes, weights
    if n == 3:
        mp = N3_POLAR_NODES << level
        ma = N3_AZIMUTH_NODES << level
        u, wu = roots_legendre(mp)          # integrates d(cos alpha)
        phi = 2.0 * math.pi * np.arange(ma) / ma
        sa = np.sqrt(1.0 - u**2)
        nodes = np.empty((mp * ma, 3))
        nodes[:, 0] = np.outer(sa, np.cos(phi)).ravel()
        nodes[:, 1] = np.outer(sa, np.sin(phi)).ravel()
        nodes[:, 2] = np.outer(u, np.ones(ma)).ravel()
        weights = np.outer(wu, np.full(ma, 2.0 * math.pi / ma)).ravel()
        return nodes, weights
    raise DomainError(f"direction grids support n in {{2, 3}}, got n={n}")


# ---------------------------------------------------------------------------
# metric families
# ---------------------------------------------------------------------------

class Metric:
    """Base for positively 1-homogeneous strongly convex norms on a chart."""

    family: str = ""

    def __init__(self, n: int):
        if n not in (2, 3):
            raise ValueError(f"supported dimensions are 2 and 3, got n={n}")
        self.n = n

    # chart data: Euclidean radius of the model chart (None = all of R^n)
    chart_radius: float | None = None

    def f_squared(self, x, y):
        raise NotImplementedError

    def f(self, x, y):
        return J.sqrt(self.f_squared(x, y))

    @property
    def guard_radius(self) -> float | None:
        r = self.chart_radius
        return None if r is None else CHART_GUARD * r

    def injectivity_cap(self) -> float:
        """Conservative radial budget for polar fields from chart-center
        bases; bounded charts are additionally guarded at run time."""
        return math.inf

    def params(self) -> dict:
        return {}

    def to_config(self) -> dict:
        return {"family": self.family, "n": self.n, "params": self.params()}

    def __repr__(self):
        ps = ", ".join(f"{k}={v}" for k, v in self.params().items())
        return f"{type(self).__name__}(n={self.n}{', ' + ps if ps else ''})"


class Euclidean(Metric):
    family = "euclidean"

    def f_squared(self, x, y):
        acc = y[0] * y[0]
        for yi in y[1:]:
            acc = acc + yi * yi
        return acc


class _ConformalSpaceForm(Metric):
    """F^2 = 4|y|^2 / (1 + K|x|^2)^2 on the model chart."""

    def __init__(self, n: int, K: float):
        super().__init__(n)
        self.K = float(K)

    def params(self) -> dict:
        return {"K": self.K}

    def f_squared(self, x, y):
        xx = x[0] * x[0]
        yy = y[0] * y[0]
        for xi in x[1:]:
            xx = xx + xi * xi
        for yi in y[1:]:
            yy = yy + yi * yi
        conf = 1.0 + self.K * xx
        self._check_chart(conf)
        return 4.0 * yy / (conf * conf)

    def _check_chart(self, conf):
        pass


class PoincareBall(_ConformalSpaceForm):
    family = "poincare_ball"

    def __init__(self, n: int, K: float = -1.0):
        if not K < 0:
            raise ValueError(f"poincare_ball requires K < 0, got K={K}")
        super().__init__(n, K)
        self.chart_radius = 1.0 / math.sqrt(-K)

    def injectivity_cap(self) -> float:
        return 2.0 * math.atanh(CHART_GUARD) / math.sqrt(-self.K)

    def _check_chart(self, conf):
        v = conf.value if isinstance(conf, Jet) else conf
        if np.any(np.asarray(v) <= 0.0):
            raise DomainError("point outside the model ball chart")


class StereographicSphere(_ConformalSpaceForm):
    family = "stereographic_sphere"

    def __init__(self, n: int, K: float = 1.0):
        if not K > 0:
            raise ValueError(f"stereographic_sphere requires K > 0, got K={K}")
        super().__init__(n, K)

    def injectivity_cap(self) -> float:
        # stays clear of the first conjugate radius pi/sqrt(K)
        return 2.0 / math.sqrt(self.K)


class MinkowskiQuartic(Metric):
    """Flat anisotropic norm F^2 = |y|^2 + eps * sum y_i^4 / |y|^2."""

    family = "minkowski_quartic"

    def __init__(self, n: int, eps: float = 0.1):
        super().__init__(n)
        if eps < 0:
            raise ValueError(f"minkowski_quartic requires eps >= 0, got {eps}")
        self.eps = float(eps)

    def params(self) -> dict:
        return {"eps": self.eps}

    def f_squared(self, x, y):
        yy = y[0] * y[0]
        for yi in y[1:]:
            yy = yy + yi * yi
        q = (y[0] * y[0]) * (y[0] * y[0])
        for yi in y[1:]:
            q = q + (yi * yi) * (yi * yi)
        return yy + self.eps * q / yy


class Randers(Metric):
    """Euclidean base plus a constant drift one-form: F = |y| + <b, y>."""

    family = "randers"

    def __init__(self, n: int, b):
        super().__init__(n)
        b = tuple(float(v) for v in b)
        if len(b) != n:
            raise ValueError(f"drift must have {n} components, got {len(b)}")
        if sum(v * v for v in b) >= 1.0:
            raise ValueError("drift must have Euclidean norm < 1 for positivity")
        self.b = b

    def params(self) -> dict:
        return {"b": list(self.b)}

    def f_squared(self, x, y):
        yy = y[0] * y[0]
        beta = self.b[0] * y[0]
        for i in range(1, self.n):
            yy = yy + y[i] * y[i]
            beta = beta + self.b[i] * y[i]
        f = J.sqrt(yy) + beta
        return f * f


class Funk(Metric):
    """Projectively flat non-reversible norm on the unit ball."""

    family = "funk"
    chart_radius = 1.0

    def f_squared(self, x, y):
        xx = x[0] * x[0]
        yy = y[0] * y[0]
        xy = x[0] * y[0]
        for i in range(1, self.n):
            xx = xx + x[i] * x[i]
            yy = yy + y[i] * y[i]
            xy = xy + x[i] * y[i]
        w = 1.0 - xx
        v = w.value if isinstance(w, Jet) else w
        if np.any(np.asarray(v) <= 0.0):
            raise DomainError("point outside the unit-ball chart")
        f = (J.sqrt(w * yy + xy * xy) + xy) / w
        return f * f

    def injectivity_cap(self) -> float:
        return -math.log(1.0 - CHART_GUARD)


class Reversed(Metric):
    """Reverse metric: same chart, fiber argument negated."""

    def __init__(self, base: Metric):
        super().__init__(base.n)
        self.base = base
        self.chart_radius = base.chart_radius

    @property
    def family(self) -> str:  # type: ignore[override]
        return f"reverse({self.base.family})"

    def params(self) -> dict:
        return self.base.params()

    def injectivity_cap(self) -> float:
        return self.base.injectivity_cap()

    def f_squared(self, x, y):
        return self.base.f_squared(x, [-yi for yi in y])


def reverse_metric(metric: Metric) -> Metric:
    """Involution: reversing twice hands back the original object."""
    if isinstance(metric, Reversed):
        return metric.base
    return Reversed(metric)


_FAMILIES = {
    "euclidean": lambda n, p: Euclidean(n),
    "poincare_ball": lambda n, p: PoincareBall(n, p.get("K", -1.0)),
    "stereographic_sphere": lambda n, p: StereographicSphere(n, p.get("K", 1.0)),
    "minkowski_quartic": lambda n, p: MinkowskiQuartic(n, p.get("eps", 0.1)),
    "randers": lambda n, p: Randers(n, p["b"]),
    "funk": lambda n, p: Funk(n),
}


def metric_families() -> list[str]:
    return sorted(_FAMILIES)


def make_metric(family: str, n: int, params: dict | None = None) -> Metric:
    if family not in _FAMILIES:
        raise ValueError(f"unknown metric family {family!r}; known: {metric_families()}")
    return _FAMILIES[family](n, dict(params or {}))


# ---------------------------------------------------------------------------
# measures
# ---------------------------------------------------------------------------

class MeasureDensity:
    """Volume density sigma(x) against Lebesgue measure on the chart."""

    kind: str = ""

    def density(self, metric: Metric, x):
        raise NotImplementedError

    def params(self) -> dict:
        return {}

    def to_config(self) -> dict:
        return {"kind": self.kind, "params": self.params()}


class Lebesgue(MeasureDensity):
    kind = "lebesgue"

    def density(self, metric: Metric, x):
        return 1.0


class PolyLogDensity(MeasureDensity):
    """sigma = exp(-P(x)) for a polynomial P given as monomial terms."""

    kind = "poly_log_density"

    def __init__(self, monomials):
        terms = []
        for coef, powers in monomials:
            terms.append((float(coef), tuple(int(p) for p in powers)))
        if not terms:
            raise ValueError("poly_log_density needs at least one monomial")
        self.monomials = terms

    def params(self) -> dict:
        return {"monomials": [[c, list(p)] for c, p in self.monomials]}

    def log_density_neg(self, x):
        """The polynomial P itself, jet-generic."""
        acc = 0.0
        for coef, powers in self.monomials:
            term = coef
            for xi, p in zip(x, powers):
                for _ in range(p):
                    term = term * xi
            acc = acc + term
        return acc

    def density(self, metric: Metric, x):
        return J.exp(-self.log_density_neg(x))


class BusemannHausdorff(MeasureDensity):
    """Density normalizing the metric unit ball to Euclidean ball volume.

    sigma(x) = omega_n / vol{ y : F(x, y) < 1 }, with the fiber volume
    computed as (1/n) * integral of F(x, e)^(-n) over unit directions e.
    The direction quadrature refines (doubling) until two consecutive levels
    agree to 1e-11 relative; jets in x pass straight through, so the density
    is differentiable to the same order as the metric.
    """

    kind = "busemann_hausdorff"

    _MAX_LEVEL = 5
    _RTOL = 1e-11

    def density(self, metric: Metric, x):
        prev = None
        for level in range(self._MAX_LEVEL + 1):
            val = self._fiber_volume(metric, x, level)
            v = val.value if isinstance(val, Jet) else np.asarray(val)
            if prev is not None:
                scale = np.maximum(np.abs(v), 1e-300)
                if np.max(np.abs(v - prev) / scale) <= self._RTOL:
                    return unit_ball_volume(metric.n) / val
            prev = np.asarray(v).copy()
        raise QuadratureError(
            f"unit-ball volume quadrature did not converge for {metric!r}")

    def _fiber_volume(self, metric: Metric, x, level: int):
        nodes, weights = direction_nodes(metric.n, level)
        n = metric.n
        if isinstance(x[0], Jet):
            # broadcast one batch axis for the direction nodes
            xb = [Jet(xi.space, xi.c[..., None, :]) for xi in x]
            f2 = metric.f_squared(xb, [nodes[:, i] for i in range(n)])
            if not isinstance(f2, Jet):
                # metric does not depend on x: constant jet
                integ = np.power(np.asarray(f2), -0.5 * n)
                return Jet.constant(x[0].space, integ @ weights / n)
            integ = f2 ** (-0.5 * n)
            c = np.einsum("...kc,k->...c", integ.c, weights) / n
            return Jet(x[0].space, c)
        xb = [np.asarray(xi)[..., None] for xi in x]
        f2 = metric.f_squared(xb, [nodes[:, i] for i in range(n)])
        integ = np.power(f2, -0.5 * n)
        return integ @ weights / n


_MEASURES = {
    "lebesgue": lambda p: Lebesgue(),
    "poly_log_density": lambda p: PolyLogDensity(p["monomials"]),
    "busemann_hausdorff": lambda p: BusemannHausdorff(),
}


def measure_kinds() -> list[str]:
    return sorted(_MEASURES)


def make_measure(kind: str, params: dict | None = None) -> MeasureDensity:
    if kind not in _MEASURES:
        raise ValueError(f"unknown measure kind {kind!r}; known: {measure_kinds()}")
    return _MEASURES[kind](dict(params or {}))


def measure_density(measure: MeasureDensity, metric: Metric, x) -> float:
    """Scalar density value at a point given as a sequence of floats."""
    val = measure.density(metric, [float(xi) for xi in x])
    return float(np.asarray(val))


# ---------------------------------------------------------------------------
# fiberwise norm operations
# ---------------------------------------------------------------------------

def eval_f(metric: Metric, x, y) -> float:
    """Norm value F(x, y); zero fiber vectors give 0."""
    y = np.asarray(y, dtype=float)
    if not np.any(y):
        return 0.0
    return float(np.sqrt(metric.f_squared(list(map(float, x)), list(y))))


def dual_norm(metric: Metric, x, xi) -> float:
    """Dual norm F*(x, xi) = sup_y <xi, y> / F(x, y), to ~1e-10."""
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        return 0.0
    x = [float(v) for v in x]

    if metric.n == 2:
        def ratio(phi):
            e = [np.cos(phi), np.sin(phi)]
            num = xi[0] * e[0] + xi[1] * e[1]
            f = np.sqrt(np.asarray(metric.f_squared([np.full_like(phi, xv) for xv in x], e)))
            return num / f

        phi0 = 2.0 * math.pi * np.arange(N2_DIRECTIONS) / N2_DIRECTIONS
        vals = ratio(phi0)
        k = int(np.argmax(vals))
        dphi = 2.0 * math.pi / N2_DIRECTIONS
        _, fmin = golden_min(lambda p: -ratio(p),
                             np.array([phi0[k] - dphi]), np.array([phi0[k] + dphi]))
        return float(-fmin[0])

    def neg_ratio(params):
        alpha, phi = params[:, 0], params[:, 1]
        sa = np.sin(alpha)
        e = [sa * np.cos(phi), sa * np.sin(phi), np.cos(alpha)]
        num = xi[0] * e[0] + xi[1] * e[1] + xi[2] * e[2]
        f = np.sqrt(np.asarray(metric.f_squared([np.full_like(alpha, xv) for xv in x], e)))
        return -num / f

    nodes, _ = direction_nodes(3)
    ratios = -neg_ratio(np.stack([np.arccos(np.clip(nodes[:, 2], -1, 1)),
                                  np.arctan2(nodes[:, 1], nodes[:, 0])], axis=1))
    k = int(np.argmax(ratios))
    p0 = np.array([[math.acos(max(-1.0, min(1.0, nodes[k, 2]))),
                    math.atan2(nodes[k, 1], nodes[k, 0])]])
    _, fv = pattern_min(neg_ratio, p0, step0=0.3, tol=1e-10)
    return float(-fv[0])


def legendre_transform(metric: Metric, x, y) -> np.ndarray:
    """Covector with components half the fiber gradient of F^2; maps the
    zero vector to the zero covector."""
    y = np.asarray(y, dtype=float)
    n = metric.n
    if not np.any(y):
        return np.zeros(n)
    space = jet_space(n, 1)
    yj = Jet.variables(space, list(y))
    f2 = metric.f_squared([float(v) for v in x], yj)
    grad = np.array([f2.extract(tuple(1 if j == i else 0 for j in range(n)))
                     for i in range(n)], dtype=float)
    return 0.5 * grad


def _fiber_hessian(metric: Metric, x, y) -> np.ndarray:
    """Half the fiber Hessian of F^2 (the fundamental tensor), raw."""
    n = metric.n
    space = jet_space(n, 2)
    yj = Jet.variables(space, [float(v) for v in y])
    f2 = metric.f_squared([float(v) for v in x], yj)
    g = np.empty((n, n))
    for i in range(n):
        for j in range(i, n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            g[i, j] = g[j, i] = 0.5 * float(f2.extract(tuple(alpha)))
    return g


def legendre_inverse(metric: Metric, x, xi, tol: float = 1e-12,
                     max_iter: int = 60) -> np.ndarray:
    """Invert the fiber gradient map by damped Newton iteration."""
    xi = np.asarray(xi, dtype=float)
    if not np.any(xi):
        return np.zeros(metric.n)
    scale = float(np.max(np.abs(xi)))
    y = xi.copy()

    def residual(z):
        return legendre_transform(metric, x, z) - xi

    r = residual(y)
    rn = float(np.max(np.abs(r)))
    for _ in range(max_iter):
        if rn <= tol * max(1.0, scale):
            return y
        g = _fiber_hessian(metric, x, y)
        step = np.linalg.solve(g, -r)
        lam = 1.0
        while lam > 1e-6:
            cand = y + lam * step
            try:
                rc = residual(cand)
            except DomainError:
                lam *= 0.5
                continue
            rcn = float(np.max(np.abs(rc)))
            if rcn < rn:
                y, r, rn = cand, rc, rcn
                break
            lam *= 0.5
        else:
            break
    if rn <= tol * max(1.0, scale):
        return y
    raise ConvergenceError(
        f"fiber-gradient inversion stalled at residual {rn:.3e} for xi={xi}")


def reversibility_constant(metric: Metric, x) -> float:
    """sup over directions of F(x,-y)/F(x,y); 1 iff reversible at x."""
    x = [float(v) for v in x]

    def neg_ratio_angles(params):
        if metric.n == 2:
            phi = params if params.ndim == 1 else params[:, 0]
            e = [np.cos(phi), np.sin(phi)]
        else:
            alpha, phi = params[:, 0], params[:, 1]
            sa = np.sin(alpha)
            e = [sa * np.cos(phi), sa * np.sin(phi), np.cos(alpha)]
        xs = [np.full_like(e[0], xv) for xv in x]
        f_fwd = np.sqrt(np.asarray(metric.f_squared(xs, e)))
        f_bwd = np.sqrt(np.asarray(metric.f_squared(xs, [-c for c in e])))
        return -f_bwd / f_fwd

    if metric.n == 2:
        phi0 = 2.0 * math.pi * np.arange(N2_DIRECTIONS) / N2_DIRECTIONS
        vals = -neg_ratio_angles(phi0)
        k = int(np.argmax(vals))
        dphi = 2.0 * math.pi / N2_DIRECTIONS
        _, fv = golden_min(lambda p: neg_ratio_angles(p),
                           np.array([phi0[k] - dphi]), np.array([phi0[k] + dphi]))
        return float(-fv[0])
    nodes, _ = direction_nodes(3)
    params = np.stack([np.arccos(np.clip(nodes[:, 2], -1, 1)),
                       np.arctan2(nodes[:, 1], nodes[:, 0])], axis=1)
    vals = -neg_ratio_angles(params)
    k = int(np.argmax(vals))
    _, fv = pattern_min(neg_ratio_angles, params[k:k + 1], step0=0.3, tol=1e-10)
    return float(-fv[0])


def uniformity_constants(metric: Metric, x) -> tuple[float, float]:
    """(kappa, kappa_star): extremes of g_V(W, W) / F(W)^2 over unit V, W.

    Both bound the squared reversibility constant from above:
    1 <= Lambda^2 <= min(kappa, 1/kappa_star).
    """
    x = [float(v) for v in x]
    n = metric.n
    nodes, _ = direction_nodes(n)
    xs = [np.full(len(nodes), xv) for xv in x]
    fsq = np.asarray(metric.f_squared(xs, [nodes[:, i] for i in range(n)]))

    gs = _fiber_hessian_batch(metric, x, nodes)
    # ratio[v, w] = g_V(W, W) / F(W)^2
    quad = np.einsum("vij,wi,wj->vw", gs, nodes, nodes)
    ratio = quad / fsq[None, :]

    def angles_to_dir(params, off):
        if n == 2:
            phi = params[:, off]
            return np.stack([np.cos(phi), np.sin(phi)], axis=1)
        alpha, phi = params[:, off], params[:, off + 1]
        sa = np.sin(alpha)
        return np.stack([sa * np.cos(phi), sa * np.sin(phi), np.cos(alpha)], axis=1)

    def node_params(k):
        if n == 2:
            return [math.atan2(nodes[k, 1], nodes[k, 0])]
        return [math.acos(max(-1.0, min(1.0, nodes[k, 2]))),
                math.atan2(nodes[k, 1], nodes[k, 0])]

    def make_obj(sign):
        def obj(params):
            V = angles_to_dir(params, 0)
            W = angles_to_dir(params, n - 1)
            gV = _fiber_hessian_batch(metric, x, V)
            fw = np.asarray(metric.f_squared([np.full(len(W), xv) for xv in x],
                                             [W[:, i] for i in range(n)]))
            val = np.einsum("bij,bi,bj->b", gV, W, W) / fw
            return sign * val
        return obj

    out = []
    for sign, pick in ((-1.0, np.argmax), (1.0, np.argmin)):
        kv, kw = np.unravel_index(pick(ratio), ratio.shape)
        p0 = np.array([node_params(kv) + node_params(kw)])
        _, fv = pattern_min(make_obj(sign), p0, step0=0.25, tol=1e-10)
        out.append(sign * float(fv[0]))
    kappa, kappa_star = out
    return kappa, kappa_star


def _fiber_hessian_batch(metric: Metric, x, dirs: np.ndarray) -> np.ndarray:
    """Fundamental tensors at one base point for a batch of fiber vectors."""
    n = metric.n
    space = jet_space(n, 2)
    yj = Jet.variables(space, [dirs[:, i] for i in range(n)])
    f2 = metric.f_squared([float(v) for v in x], yj)
    g = np.empty((len(dirs), n, n))
    for i in range(n):
        for j in range(i, n):
            alpha = [0] * n
            alpha[i] += 1
            alpha[j] += 1
            g[:, i, j] = g[:, j, i] = 0.5 * f2.extract(tuple(alpha))
    return g


# ---------------------------------------------------------------------------
# default catalog
# ---------------------------------------------------------------------------

def _bases(n: int, rho: float = 0.15) -> list[list[float]]:
    out = [[0.0] * n]
    for i in range(2):
        for s in (1.0, -1.0):
            p = [0.0] * n
            p[i] = s * rho
            out.append(p)
    return out


def default_entries() -> list[dict]:
    """The six stock metric-measure spaces exercised by the verify suite."""
    return [
        {
            "id": "euclidean-lebesgue",
            "metric": {"family": "euclidean", "n": 2, "params": {}},
            "measure": {"kind": "lebesgue", "params": {}},
            "grid": {"r_max": 2.0, "h": 0.01},
            "base_points": _bases(2),
        },
        {
            "id": "poincare_ball-bh",
            "metric": {"family": "poincare_ball", "n": 2, "params": {"K": -1.0}},
            "measure": {"kind": "busemann_hausdorff", "params": {}},
            "grid": {"r_max": 2.0, "h": 0.01},
            "base_points": _bases(2),
        },
        {
            "id": "stereographic_sphere-bh",
            "metric": {"family": "stereographic_sphere", "n": 2, "params": {"K": 1.0}},
            "measure": {"kind": "busemann_hausdorff", "params": {}},
            "grid": {"r_max": 2.0, "h": 0.01},
            "base_points": _bases(2),
        },
        {
            "id": "minkowski_quartic-bh",
            "metric": {"family": "minkowski_quartic", "n": 2, "params": {"eps": 0.1}},
            "measure": {"kind": "busemann_hausdorff", "params": {}},
            "grid": {"r_max": 2.0, "h": 0.01},
            "base_points": _bases(2),
        },
        {
            "id": "randers-bh",
            "metric": {"family": "randers", "n": 2, "params": {"b": [0.3, 0.0]}},
            "measure": {"kind": "busemann_hausdorff", "params": {}},
            "grid": {"r_max": 2.0, "h": 0.01},
            "base_points": _bases(2),
        },
        {
            "id": "funk-bh",
            "metric": {"family": "funk", "n": 2, "params": {}},
            "measure": {"kind": "busemann_hausdorff", "params": {}},
            "grid": {"r_max": 2.0, "h": 0.01, "r_max_offcenter": 1.5},
            "base_points": _bases(2),
        },
    ]
