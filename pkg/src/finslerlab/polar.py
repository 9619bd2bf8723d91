"""Geodesic polar fields around a base point.

A polar field carries, for every quadrature direction theta and radial node
r, the measure density sigma(r, theta) in polar coordinates, the distance
Laplacian Delta r = d/dr ln sigma, and the S-curvature along the ray.  Ball
volumes, sphere measures nu_+/nu_-, and curvature-hypothesis reports are all
read off the same field.

sigma comes from the variational (Jacobi) system integrated jointly with the
geodesic, never from finite differences of the exponential map; Delta r uses
the trace identity d/dr ln det A = tr(A^-1 A') on the variational state plus
the analytic slope of the density along the ray.

The sphere measures use dnu_+ = sigma dtheta and dnu_- = F*(-dr) sigma
dtheta, obtained by contracting the measure with the unit normals
L^-1(+-dr / F*(+-dr)); for reversible norms F*(-dr) = 1 and the two coincide,
which is the identity the test suite pins.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as _field

import numpy as np
from scipy.integrate import solve_ivp

from .catalog import Metric, MeasureDensity, direction_nodes
from .curvature import spray_coefficients, spray_gradient_values
from .errors import ChartExit, DegenerateJacobian, StepFailure
from .jets import Jet, jet_space
from .measure import s_curvature
from .numerics import golden_min, pattern_min, sci, simpson_weights

DEFAULT_H = 1e-2
DEFAULT_TOLERANCE = 1e-10
SPEED_DRIFT_TOL = 1e-8
GRID_ALIGN_TOL = 1e-9
# sigma dropping below this fraction of its running max along a ray counts
# as a conjugate point even without a sign change (bounded charts cannot
# integrate across the actual zero)
COLLAPSE_RATIO = 1e-3

__all__ = [
    "DirectionGrid", "direction_grid", "GeodesicPath", "integrate_geodesic",
    "PolarField", "polar_field", "ball_volume", "sphere_measures",
    "hypothesis_S", "HypothesisReport", "dual_norm_rows", "write_field_csv",
]


# ---------------------------------------------------------------------------
# direction grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class DirectionGrid:
    """Unit-direction quadrature with the tangent frame of each node.

    ``frames[b, :, a]`` is the a-th reduced parameter derivative of the
    Euclidean direction map at node b (arc-length angle derivative for n=2;
    for n=3 the polar derivative and (1/sin alpha) times the azimuth
    derivative), so det[e, frame cols] = 1 and the stored weights integrate
    over the Euclidean unit sphere.
    """

    n: int
    nodes: np.ndarray
    weights: np.ndarray
    frames: np.ndarray

    def __len__(self) -> int:
        return len(self.nodes)


def direction_grid(n: int, level: int = 0) -> DirectionGrid:
    nodes, weights = direction_nodes(n, level)
    if n == 2:
        frames = np.stack([-nodes[:, 1], nodes[:, 0]], axis=1)[:, :, None]
    else:
        sa = np.hypot(nodes[:, 0], nodes[:, 1])
        ca = nodes[:, 2]
        cp = nodes[:, 0] / sa
        sp = nodes[:, 1] / sa
        e_alpha = np.stack([ca * cp, ca * sp, -sa], axis=1)
        e_azim = np.stack([-sp, cp, np.zeros_like(sp)], axis=1)
        frames = np.stack([e_alpha, e_azim], axis=2)
    return DirectionGrid(n, nodes, weights, frames)


# ---------------------------------------------------------------------------
# single-geodesic integration
# ---------------------------------------------------------------------------

@dataclass(eq=False)
class GeodesicPath:
    """Dense solution of one geodesic with its conserved speed."""

    metric: Metric
    x0: np.ndarray
    y0: np.ndarray
    t_max: float
    speed: float
    drift: float
    _sol: object

    def position(self, t):
        state = self._sol(np.asarray(t, dtype=float))
        return state[: self.metric.n].T

    def velocity(self, t):
        state = self._sol(np.asarray(t, dtype=float))
        return state[self.metric.n:].T


def integrate_geodesic(metric: Metric, x, y, t_max: float,
                       tolerance: float = DEFAULT_TOLERANCE) -> GeodesicPath:
    """Integrate x-ddot = -2 G(x, x-dot) with adaptive Runge-Kutta.

    Raises StepFailure when the integrator stalls or the conserved speed
    F(gamma, gamma-dot) drifts by more than 1e-8 relative, and ChartExit
    when the curve reaches the guarded fraction of a bounded chart.
    """
    n = metric.n
    x0 = np.asarray(x, dtype=float)
    y0 = np.asarray(y, dtype=float)
    f0 = math.sqrt(float(np.asarray(metric.f_squared(list(x0), list(y0)))))

    def rhs(t, state):
        pos, vel = state[:n], state[n:]
        g = spray_coefficients(metric, list(pos), list(vel))
        return np.concatenate([vel, -2.0 * np.asarray(g, dtype=float)])

    events = []
    guard = metric.guard_radius
    if guard is not None:
        def chart_event(t, state):
            return guard - float(np.linalg.norm(state[:n]))
        chart_event.terminal = True
        chart_event.direction = -1.0
        events.append(chart_event)

    sol = solve_ivp(rhs, (0.0, t_max), np.concatenate([x0, y0]),
                    method="RK45", rtol=tolerance, atol=tolerance * 1e-2,
                    dense_output=True, events=events or None)
    if sol.status == -1:
        raise StepFailure(f"geodesic integration stalled: {sol.message}")
    if sol.status == 1:
        raise ChartExit(float(sol.t_events[0][0]) * f0)

    samples = sol.sol(sol.t)
    fs = np.sqrt(np.asarray(metric.f_squared(
        [samples[i] for i in range(n)], [samples[n + i] for i in range(n)]),
        dtype=float))
    drift = float(np.max(np.abs(fs - f0)))
    if drift > SPEED_DRIFT_TOL * f0:
        raise StepFailure(
            f"speed drifted by {drift:.3e} (allowed {SPEED_DRIFT_TOL * f0:.3e})")
    return GeodesicPath(metric, x0, y0, t_max, f0, drift, sol.sol)


# ---------------------------------------------------------------------------
# the polar field
# ---------------------------------------------------------------------------

# row budget for the chunked pointwise sweeps; keeps jet temporaries for the
# widest catalog combination (n=3 fiber-quadrature densities) under ~0.5 GB
CHUNK_ROWS = 2048


def _chunked_rows(fn, cols, out_shape):
    rows = cols[0].shape[0]
    out = np.empty(rows if out_shape is None else (rows,) + out_shape)
    for a in range(0, rows, CHUNK_ROWS):
        b = min(a + CHUNK_ROWS, rows)
        out[a:b] = fn([c[a:b] for c in cols])
    return out


@dataclass(eq=False)
class PolarField:
    """Per-(direction, radius) polar data; arrays are (directions, nodes).

    ``s_along`` and ``minus_dr_dual`` are computed on first access and
    cached; both involve pointwise sweeps that cost more than the
    integration itself on fine three-dimensional grids.
    """

    metric: Metric
    measure: MeasureDensity
    base: np.ndarray
    grid: DirectionGrid
    h: float
    r: np.ndarray
    x: np.ndarray
    v: np.ndarray
    sigma: np.ndarray
    delta_r: np.ndarray
    _s_along: np.ndarray | None = _field(default=None, repr=False)
    _dual_minus: np.ndarray | None = _field(default=None, repr=False)

    @property
    def r_max(self) -> float:
        return float(self.r[-1])

    @property
    def s_along(self) -> np.ndarray:
        """S-curvature evaluated on (gamma(r), gamma-dot(r)) over the grid."""
        if self._s_along is None:
            n = self.metric.n
            xc = [self.x[..., i].ravel() for i in range(n)]
            vc = [self.v[..., i].ravel() for i in range(n)]
            flat = _chunked_rows(
                lambda cols: np.asarray(
                    s_curvature(self.metric, self.measure,
                                cols[:n], cols[n:]), dtype=float),
                xc + vc, None)
            self._s_along = flat.reshape(self.sigma.shape)
        return self._s_along

    def phi(self, K: float, theta: float) -> np.ndarray:
        """Excess (Delta r - H_K - theta)_+ against the model mean curvature."""
        from .comparison import mean_curvature_model
        hk = mean_curvature_model(self.metric.n, K, self.r)
        return np.maximum(self.delta_r - hk[None, :] - theta, 0.0)

    def minus_dr_dual(self) -> np.ndarray:
        """F*(-dr) on the whole grid, with dr the Legendre image of the
        radial velocity; cached after the first call."""
        if self._dual_minus is None:
            B, m = self.sigma.shape
            n = self.metric.n
            xc = [self.x[..., i].ravel() for i in range(n)]
            vc = [self.v[..., i].ravel() for i in range(n)]

            def one(cols):
                xi = _legendre_rows(self.metric, cols[:n], cols[n:])
                return dual_norm_rows(self.metric, cols[:n], -xi)

            self._dual_minus = _chunked_rows(one, xc + vc, None).reshape(B, m)
        return self._dual_minus


def _legendre_rows(metric: Metric, xcols, ycols) -> np.ndarray:
    """Row-wise Legendre transform: half the fiber gradient of F^2."""
    n = metric.n
    space = jet_space(n, 1)
    yj = Jet.variables(space, [np.asarray(c, dtype=float) for c in ycols])
    f2 = metric.f_squared([np.asarray(c, dtype=float) for c in xcols], yj)
    rows = np.shape(f2.value)
    out = np.empty(rows + (n,))
    for i in range(n):
        mu = tuple(1 if j == i else 0 for j in range(n))
        out[..., i] = 0.5 * np.asarray(f2.extract(mu), dtype=float)
    return out


def dual_norm_rows(metric: Metric, xcols, xi: np.ndarray) -> np.ndarray:
    """Batched dual norm F*(x, xi) over rows of base points and covectors.

    Coarse direction sweep plus fixed-iteration local refinement, the same
    deterministic recipe as the scalar ``catalog.dual_norm``.
    """
    xi = np.asarray(xi, dtype=float)
    n = metric.n
    xcols = [np.asarray(c, dtype=float) for c in xcols]
    if n == 2:
        m = 64
        phi0 = 2.0 * math.pi * np.arange(m) / m

        def ratio(phis):
            e0, e1 = np.cos(phis), np.sin(phis)
            f = np.sqrt(np.asarray(metric.f_squared(xcols_b, [e0, e1]), dtype=float))
            return (xi_b[..., 0] * e0 + xi_b[..., 1] * e1) / f

        xcols_b = [c[..., None] for c in xcols]
        xi_b = xi[..., None, :]
        vals = ratio(phi0)
        k = np.argmax(vals, axis=-1)
        coarse = np.max(vals, axis=-1)

        xcols_b = xcols
        xi_b = xi
        step = 2.0 * math.pi / m
        _, neg = golden_min(lambda p: -ratio(p), phi0[k] - step, phi0[k] + step)
        return np.maximum(-neg, coarse)

    na, nb = 8, 16
    alpha = np.arccos(np.linspace(1.0, -1.0, na + 2)[1:-1])
    azim = 2.0 * math.pi * np.arange(nb) / nb
    A, P = np.meshgrid(alpha, azim, indexing="ij")
    pa, pp = A.ravel(), P.ravel()

    def ratio3(a, p, xc, xv):
        sa = np.sin(a)
        e = [sa * np.cos(p), sa * np.sin(p), np.cos(a)]
        f = np.sqrt(np.asarray(metric.f_squared(xc, e), dtype=float))
        return (xv[..., 0] * e[0] + xv[..., 1] * e[1] + xv[..., 2] * e[2]) / f

    shape = xi.shape[:-1]
    flat_x = [np.broadcast_to(c, shape).ravel() for c in xcols]
    flat_xi = xi.reshape(-1, 3)
    vals = ratio3(pa, pp, [c[:, None] for c in flat_x], flat_xi[:, None, :])
    k = np.argmin(-vals, axis=-1)
    coarse = np.max(vals, axis=-1)
    p0 = np.stack([pa[k], pp[k]], axis=-1)

    def neg3(params):
        return -ratio3(params[:, 0], params[:, 1], flat_x, flat_xi)

    _, neg = pattern_min(neg3, p0, step0=math.pi / na, max_iter=60)
    out = np.maximum(-neg, coarse)
    return out.reshape(shape) if shape else float(out[0])


def polar_field(metric: Metric, measure: MeasureDensity, base,
                grid: DirectionGrid | None = None, r_max: float = 2.0,
                h: float = DEFAULT_H,
                tolerance: float = DEFAULT_TOLERANCE) -> PolarField:
    """Integrate the geodesic + variational system over a direction grid.

    Initial directions are F-unit; the variational columns start at J = 0
    with J' equal to the F-unit frame derivatives, so det[gamma-dot, J]
    carries exactly the polar Jacobian of the exponential map.
    """
    base = np.asarray(base, dtype=float)
    n = metric.n
    if grid is None:
        grid = direction_grid(n)
    B = len(grid)
    m = int(math.floor(r_max / h + GRID_ALIGN_TOL))
    if m < 2:
        raise ValueError("r_max must cover at least two radial steps")
    r = h * np.arange(1, m + 1)

    xf = [float(c) for c in base]
    ecols = [grid.nodes[:, i] for i in range(n)]
    f0 = np.sqrt(np.asarray(metric.f_squared(xf, ecols), dtype=float))
    u0 = grid.nodes / f0[:, None]
    xi0 = _legendre_rows(metric, xf, ecols)
    proj = np.einsum("bi,bia->ba", xi0, grid.frames)
    seeds = (grid.frames / f0[:, None, None]
             - grid.nodes[:, :, None] * proj[:, None, :] / (f0**3)[:, None, None])

    # state blocks per direction: x, v, then n-1 Jacobi columns and their rates
    y0 = np.zeros((B, 2 * n, n))
    y0[:, 0] = base
    y0[:, 1] = u0
    y0[:, n + 1:] = seeds.transpose(0, 2, 1)

    def rhs(t, flat):
        st = flat.reshape(B, 2 * n, n)
        pos, vel = st[:, 0], st[:, 1]
        jc, wc = st[:, 2:n + 1], st[:, n + 1:]
        G, Gx, Gy = spray_gradient_values(
            metric, [pos[:, i] for i in range(n)], [vel[:, i] for i in range(n)])
        out = np.empty_like(st)
        out[:, 0] = vel
        out[:, 1] = -2.0 * G
        out[:, 2:n + 1] = wc
        out[:, n + 1:] = -2.0 * (np.einsum("bij,baj->bai", Gx, jc)
                                 + np.einsum("bij,baj->bai", Gy, wc))
        return out.ravel()

    events = []
    guard = metric.guard_radius
    if guard is not None:
        def chart_event(t, flat):
            pos = flat.reshape(B, 2 * n, n)[:, 0]
            return guard - float(np.max(np.linalg.norm(pos, axis=1)))
        chart_event.terminal = True
        chart_event.direction = -1.0
        events.append(chart_event)

    sol = solve_ivp(rhs, (0.0, float(r[-1])), y0.ravel(), method="RK45",
                    rtol=tolerance, atol=tolerance * 1e-2, t_eval=r,
                    events=events or None)
    if sol.status == -1:
        raise StepFailure(f"polar integration stalled: {sol.message}")
    if sol.status == 1:
        te = float(sol.t_events[0][0])
        st = sol.y_events[0][0].reshape(B, 2 * n, n)
        idx = int(np.argmax(np.linalg.norm(st[:, 0], axis=1)))
        raise ChartExit(te, idx)

    Y = sol.y.T.reshape(m, B, 2 * n, n)
    xs, vs = Y[:, :, 0], Y[:, :, 1]
    jc, wc = Y[:, :, 2:n + 1], Y[:, :, n + 1:]

    flat_x = [xs[..., i].ravel() for i in range(n)]
    flat_v = [vs[..., i].ravel() for i in range(n)]
    fv = np.sqrt(np.asarray(metric.f_squared(flat_x, flat_v), dtype=float))
    drift = float(np.max(np.abs(fv - 1.0)))
    if drift > SPEED_DRIFT_TOL:
        raise StepFailure(
            f"speed drifted by {drift:.3e} across the polar field")

    # rows of A are [gamma-dot, J^1, ...]; det and trace are transpose-blind
    A = np.concatenate([vs[:, :, None, :], jc], axis=2)
    detA = np.linalg.det(A)

    dens = _chunked_rows(
        lambda cols: np.stack(
            _density_along(metric, measure, cols[:n], cols[n:]), axis=-1),
        flat_x + flat_v, (2,))
    sig_m = dens[:, 0].reshape(m, B)
    sigma = sig_m * detA
    _raise_degenerate(detA, sigma, r, h)

    G = _chunked_rows(
        lambda cols: np.asarray(
            spray_coefficients(metric, cols[:n], cols[n:]), dtype=float),
        flat_x + flat_v, (n,)).reshape(m, B, n)
    Ap = np.concatenate([-2.0 * G[:, :, None, :], wc], axis=2)
    trace = np.einsum("mbii->mb", np.linalg.solve(A, Ap))
    delta_r = trace + dens[:, 1].reshape(m, B)

    return PolarField(metric, measure, base, grid, h, r,
                      xs.transpose(1, 0, 2), vs.transpose(1, 0, 2),
                      sigma.T.copy(), delta_r.T.copy())


def _density_along(metric, measure, flat_x, flat_v):
    """Density and its logarithmic slope along the rays, by order-1 jets."""
    rows = flat_x[0].shape
    tspace = jet_space(1, 1)
    pos = [Jet(tspace, np.stack([px, pv], axis=-1))
           for px, pv in zip(flat_x, flat_v)]
    val = measure.density(metric, pos)
    if isinstance(val, Jet):
        sig = np.asarray(val.value, dtype=float)
        sig = np.broadcast_to(sig, rows).copy()
        slope = np.broadcast_to(np.asarray(val.extract((1,)), dtype=float),
                                rows) / sig
        return sig, slope
    sig = np.broadcast_to(np.asarray(val, dtype=float), rows).astype(float)
    return sig, np.zeros(rows)


def _raise_degenerate(detA, sigma, r, h):
    m, B = detA.shape
    run_max = np.maximum.accumulate(sigma, axis=0)
    bad = (detA <= 0.0) | (sigma < COLLAPSE_RATIO * run_max)
    if not np.any(bad):
        return
    hits = np.argwhere(bad)
    k = int(hits[:, 0].min())
    b = int(hits[hits[:, 0] == k][:, 1].min())
    if detA[k, b] <= 0.0 and k > 0:
        d0, d1 = detA[k - 1, b], detA[k, b]
        rad = float(r[k - 1] + h * d0 / (d0 - d1))
    else:
        rad = float(r[k])
    raise DegenerateJacobian(rad, b)


# ---------------------------------------------------------------------------
# integrals over the field
# ---------------------------------------------------------------------------

def _node_index(field: PolarField, R: float) -> int:
    k = int(round(R / field.h))
    if abs(k * field.h - R) > GRID_ALIGN_TOL * max(1.0, abs(R)):
        raise ValueError(f"radius {R!r} is not aligned with the grid step {field.h!r}")
    if k < 1 or k > len(field.r):
        raise ValueError(f"radius {R!r} outside the stored field (r_max {field.r_max})")
    return k


def ball_volume(field: PolarField, R: float) -> float:
    """m(B_R) = sum_theta w_theta * Simpson integral of sigma over [0, R]."""
    k = _node_index(field, R)
    w = simpson_weights(k, field.h)
    vals = np.concatenate([np.zeros((field.sigma.shape[0], 1)),
                           field.sigma[:, :k]], axis=1)
    return float((vals @ w) @ field.grid.weights)


def sphere_measures(field: PolarField, metric: Metric, r: float) -> tuple[float, float]:
    """(nu_plus, nu_minus) of the forward sphere of radius r."""
    k = _node_index(field, r) - 1
    sig = field.sigma[:, k]
    dual = field.minus_dr_dual()[:, k]
    nu_plus = float(field.grid.weights @ sig)
    nu_minus = float(field.grid.weights @ (dual * sig))
    return nu_plus, nu_minus


@dataclass(frozen=True)
class HypothesisReport:
    """Outcome of a pointwise hypothesis scan over a polar field."""

    ok: bool
    theta: float
    worst_margin: float
    radius: float
    direction_index: int


def hypothesis_S(field: PolarField, theta: float,
                 tol: float = 1e-10) -> HypothesisReport:
    """Check S(grad r) >= -theta over the whole (direction, radius) grid."""
    marg = field.s_along + theta
    b, k = np.unravel_index(int(np.argmin(marg)), marg.shape)
    worst = float(marg[b, k])
    return HypothesisReport(worst >= -tol, theta, worst,
                            float(field.r[k]), int(b))


def write_field_csv(field: PolarField, path) -> None:
    """CSV dump, direction-major: theta_index, r, sigma, delta_r, s_along."""
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("theta_index,r,sigma,delta_r,s_along\n")
        for b in range(field.sigma.shape[0]):
            for k in range(field.sigma.shape[1]):
                fh.write(f"{b},{sci(field.r[k])},{sci(field.sigma[b, k])},"
                         f"{sci(field.delta_r[b, k])},{sci(field.s_along[b, k])}\n")
