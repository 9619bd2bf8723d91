"""Fundamental tensor, spray, and curvature assemblies.

All quantities are exact algebraic reads of the jet of the squared norm: the
fundamental tensor is half its fiber Hessian, the spray comes from the
standard quarter-inverse contraction of position derivatives of the tensor,
and the curvature endomorphism is assembled from first and second spray
derivatives.  Every public function is batch-transparent: pass floats for a
single point or equal-shape arrays for many, and outputs grow matching
leading axes.
"""
from __future__ import annotations

import numpy as np

from .catalog import Metric
from .errors import DegenerateFlag, DomainError, SingularMatrix
from .jets import Jet, derivative_jet, jet_space

DET_RTOL = 1e-12
EULER_RTOL = 1e-9
FLAG_RTOL = 1e-12


def _unit(nv: int, *positions: int) -> tuple[int, ...]:
    alpha = [0] * nv
    for p in positions:
        alpha[p] += 1
    return tuple(alpha)


def h_jet(metric: Metric, x, y, ox: int, oy: int):
    """Jet of F^2 in 2n variables, position degree <= ox, fiber <= oy."""
    n = metric.n
    space = jet_space(2 * n, ox + oy, groups=(n, n), caps=(ox, oy))
    seeds = [np.asarray(v, dtype=float) for v in list(x) + list(y)]
    vs = [Jet.constant(space, s) if (i < n and ox == 0) or (i >= n and oy == 0)
          else Jet.variable(space, i, s)
          for i, s in enumerate(seeds)]
    out = metric.f_squared(vs[:n], vs[n:])
    if not isinstance(out, Jet):
        out = Jet.constant(space, out)
    return out, space


def _positive_definite_or_raise(g: np.ndarray, n: int):
    scale = np.max(np.abs(g), axis=(-2, -1))
    det = np.linalg.det(g)
    if np.any(det <= DET_RTOL * scale**n):
        raise SingularMatrix(
            "fundamental tensor is numerically singular or not positive "
            f"definite (min det {np.min(det):.3e})")
    if n == 3:
        # det > 0 alone does not give definiteness in odd dimensions
        m1 = g[..., 0, 0]
        m2 = g[..., 0, 0] * g[..., 1, 1] - g[..., 0, 1] ** 2
        if np.any(m1 <= 0) or np.any(m2 <= 0):
            raise SingularMatrix("fundamental tensor has a non-positive leading minor")


def fundamental_tensor(metric: Metric, x, y) -> np.ndarray:
    """g_ij(x, y): half the fiber Hessian of the squared norm.

    Validates the homogeneity contraction g_ij y^i y^j = F^2 to 1e-9
    relative and positive definiteness to a 1e-12 determinant floor.
    """
    n = metric.n
    H, space = h_jet(metric, x, y, 0, 2)
    nv = space.num_vars
    lead = np.shape(H.value)
    g = np.empty(lead + (n, n))
    for i in range(n):
        for j in range(i, n):
            val = 0.5 * H.extract(_unit(nv, n + i, n + j))
            g[..., i, j] = g[..., j, i] = val
    yarr = np.broadcast_to(np.stack(np.broadcast_arrays(
        *[np.asarray(v, dtype=float) for v in y]), axis=-1), lead + (n,))
    contracted = np.einsum("...ij,...i,...j->...", g, yarr, yarr)
    f2 = np.asarray(H.value)
    if np.max(np.abs(contracted - f2)) > EULER_RTOL * max(np.max(np.abs(f2)), 1e-30):
        raise DomainError("squared norm is not positively 2-homogeneous in the fiber")
    _positive_definite_or_raise(g, n)
    return g


def cartan_tensor(metric: Metric, x, y) -> np.ndarray:
    """Totally symmetric fiber derivative of the fundamental tensor,
    C_ijk = quarter third fiber derivative of F^2; contracts to zero
    against y in every slot."""
    n = metric.n
    H, space = h_jet(metric, x, y, 0, 3)
    nv = space.num_vars
    lead = np.shape(H.value)
    c = np.empty(lead + (n, n, n))
    for i in range(n):
        for j in range(i, n):
            for k in range(j, n):
                val = 0.25 * H.extract(_unit(nv, n + i, n + j, n + k))
                for perm in ((i, j, k), (i, k, j), (j, i, k), (j, k, i), (k, i, j), (k, j, i)):
                    c[..., perm[0], perm[1], perm[2]] = val
    return c


def _spray_from_h(H: Jet, space, n: int, y_forms):
    """Spray values from an h-jet with position degree >= 1, fiber >= 2."""
    nv = space.num_vars
    lead = np.shape(H.value)
    g = np.empty(lead + (n, n))
    dg = np.empty(lead + (n, n, n))  # dg[l, j, k] = d g_jk / d x_l
    for j in range(n):
        for k in range(j, n):
            g[..., j, k] = g[..., k, j] = 0.5 * H.extract(_unit(nv, n + j, n + k))
            for l in range(n):
                v = 0.5 * H.extract(_unit(nv, l, n + j, n + k))
                dg[..., l, j, k] = dg[..., l, k, j] = v
    yarr = np.stack(np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in y_forms]), axis=-1)
    yarr = np.broadcast_to(yarr, lead + (n,))
    # N_l = (2 dg[k,j,l] - dg[l,j,k]) y^j y^k
    N = (2.0 * np.einsum("...kjl,...j,...k->...l", dg, yarr, yarr)
         - np.einsum("...ljk,...j,...k->...l", dg, yarr, yarr))
    scale = np.max(np.abs(g), axis=(-2, -1))
    det = np.linalg.det(g)
    if np.any(np.abs(det) <= DET_RTOL * scale**n):
        raise SingularMatrix("fundamental tensor singular while forming the spray")
    G = 0.25 * np.linalg.solve(g, N[..., None])[..., 0]
    return G, g


def spray_coefficients(metric: Metric, x, y) -> np.ndarray:
    """Spray coefficients G^i(x, y); geodesics satisfy x-ddot = -2 G."""
    H, space = h_jet(metric, x, y, 1, 2)
    G, _ = _spray_from_h(H, space, metric.n, y)
    return G


def _jet_mat_inverse(mat, det):
    """Adjugate inverse for 2x2 / 3x3 matrices of jets."""
    n = len(mat)
    inv_det = 1.0 / det
    if n == 2:
        return [[mat[1][1] * inv_det, -mat[0][1] * inv_det],
                [-mat[1][0] * inv_det, mat[0][0] * inv_det]]
    cof = [[None] * 3 for _ in range(3)]
    for i in range(3):
        i1, i2 = [a for a in range(3) if a != i]
        for j in range(3):
            j1, j2 = [a for a in range(3) if a != j]
            minor = mat[i1][j1] * mat[i2][j2] - mat[i1][j2] * mat[i2][j1]
            sign = 1.0 if (i + j) % 2 == 0 else -1.0
            cof[j][i] = minor * sign * inv_det  # transposed in place
    return cof


def _jet_det(mat):
    n = len(mat)
    if n == 2:
        return mat[0][0] * mat[1][1] - mat[0][1] * mat[1][0]
    return (mat[0][0] * (mat[1][1] * mat[2][2] - mat[1][2] * mat[2][1])
            - mat[0][1] * (mat[1][0] * mat[2][2] - mat[1][2] * mat[2][0])
            + mat[0][2] * (mat[1][0] * mat[2][1] - mat[1][1] * mat[2][0]))


def spray_jets(metric: Metric, x, y, ox: int, oy: int):
    """Jets of the spray coefficients, position degree <= ox, fiber <= oy.

    Returns (list of n jets, their space).  The underlying h-jet is taken
    one position order and two fiber orders higher.
    """
    n = metric.n
    H, hspace = h_jet(metric, x, y, ox + 1, oy + 2)
    space = jet_space(2 * n, ox + oy, groups=(n, n), caps=(ox, oy))
    nv = 2 * n

    g = [[None] * n for _ in range(n)]
    dg = [[[None] * n for _ in range(n)] for _ in range(n)]  # [l][j][k]
    for j in range(n):
        for k in range(j, n):
            gj = derivative_jet(H, _unit(nv, n + j, n + k), space) * 0.5
            g[j][k] = g[k][j] = gj
            for l in range(n):
                d = derivative_jet(H, _unit(nv, l, n + j, n + k), space) * 0.5
                dg[l][j][k] = dg[l][k][j] = d

    yj = [Jet.variable(space, n + i, np.asarray(y[i], dtype=float)) for i in range(n)]
    N = []
    for l in range(n):
        acc = None
        for j in range(n):
            for k in range(n):
                term = (2.0 * dg[k][j][l] - dg[l][j][k]) * yj[j] * yj[k]
                acc = term if acc is None else acc + term
        N.append(acc)

    det = _jet_det(g)
    dv = np.asarray(det.value)
    scale = max(float(np.max(np.abs(np.stack([gj.value for row in g for gj in row])))), 1e-300)
    if np.any(np.abs(dv) <= DET_RTOL * scale**n):
        raise SingularMatrix("fundamental tensor singular while forming spray jets")
    ginv = _jet_mat_inverse(g, det)
    G = []
    for i in range(n):
        acc = None
        for l in range(n):
            term = ginv[i][l] * N[l]
            acc = term if acc is None else acc + term
        G.append(acc * 0.25)
    return G, space


def spray_with_gradients(metric: Metric, x, y):
    """(G, dG/dx, dG/dy) values, the linearization used by variational
    systems: dGx[..., i, j] = d G^i / d x^j."""
    n = metric.n
    G, space = spray_jets(metric, x, y, 1, 1)
    nv = 2 * n
    lead = np.shape(G[0].value)
    Gv = np.empty(lead + (n,))
    Gx = np.empty(lead + (n, n))
    Gy = np.empty(lead + (n, n))
    for i in range(n):
        Gv[..., i] = G[i].value
        for j in range(n):
            Gx[..., i, j] = G[i].extract(_unit(nv, j))
            Gy[..., i, j] = G[i].extract(_unit(nv, n + j))
    return Gv, Gx, Gy


def spray_gradient_values(metric: Metric, x, y):
    """Same (G, dG/dx, dG/dy) triple as ``spray_with_gradients``, assembled
    by tensor algebra on partials extracted from a single jet of F^2.

    One h-jet evaluation per call instead of a full jet-valued spray; meant
    for ODE right-hand sides where ``spray_with_gradients`` is too slow.
    The two routes are cross-checked in the test suite.
    """
    n = metric.n
    H, space = h_jet(metric, x, y, 2, 3)
    nv = 2 * n
    lead = np.shape(H.value)

    def part(*positions):
        out = np.asarray(H.extract(_unit(nv, *positions)), dtype=float)
        return np.broadcast_to(out, lead)

    g = np.empty(lead + (n, n))
    dg = np.empty(lead + (n, n, n))      # [k, j, l] = d g_jl / d x_k
    d2g = np.empty(lead + (n, n, n, n))  # [m, k, j, l] = d2 g_jl / dx_m dx_k
    cg = np.empty(lead + (n, n, n))      # [p, j, l] = d g_jl / d y_p
    dcg = np.empty(lead + (n, n, n, n))  # [p, k, j, l] = d2 g_jl / dy_p dx_k
    for j in range(n):
        for l in range(j, n):
            v = 0.5 * part(n + j, n + l)
            g[..., j, l] = g[..., l, j] = v
            for k in range(n):
                v = 0.5 * part(k, n + j, n + l)
                dg[..., k, j, l] = dg[..., k, l, j] = v
                for m in range(k, n):
                    v = 0.5 * part(m, k, n + j, n + l)
                    d2g[..., m, k, j, l] = d2g[..., m, k, l, j] = v
                    d2g[..., k, m, j, l] = d2g[..., k, m, l, j] = v
            for p in range(n):
                v = 0.5 * part(n + p, n + j, n + l)
                cg[..., p, j, l] = cg[..., p, l, j] = v
                for k in range(n):
                    v = 0.5 * part(n + p, k, n + j, n + l)
                    dcg[..., p, k, j, l] = dcg[..., p, k, l, j] = v

    yarr = np.stack(np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in y]), axis=-1)
    yarr = np.broadcast_to(yarr, lead + (n,))

    N = (2.0 * np.einsum("...kjl,...j,...k->...l", dg, yarr, yarr)
         - np.einsum("...ljk,...j,...k->...l", dg, yarr, yarr))
    scale = np.max(np.abs(g), axis=(-2, -1))
    det = np.linalg.det(g)
    if np.any(np.abs(det) <= DET_RTOL * scale**n):
        raise SingularMatrix("fundamental tensor singular while forming the spray")
    G = 0.25 * np.linalg.solve(g, N[..., None])[..., 0]

    # dN[m, l] = (2 d2g[m,k,j,l] - d2g[m,l,j,k]) y^j y^k
    dN = (2.0 * np.einsum("...mkjl,...j,...k->...ml", d2g, yarr, yarr)
          - np.einsum("...mljk,...j,...k->...ml", d2g, yarr, yarr))
    # dyN[p, l]: product-rule contraction of N over y plus the Cartan part
    dyN = (2.0 * np.einsum("...kpl,...k->...pl", dg, yarr)
           - np.einsum("...lpk,...k->...pl", dg, yarr)
           + 2.0 * np.einsum("...pjl,...j->...pl", dg, yarr)
           - np.einsum("...ljp,...j->...pl", dg, yarr)
           + 2.0 * np.einsum("...pkjl,...j,...k->...pl", dcg, yarr, yarr)
           - np.einsum("...pljk,...j,...k->...pl", dcg, yarr, yarr))

    # d(g^-1 N) = g^-1 (dN - dg * (g^-1 N)); the bracket is 4G
    rx = dN - 4.0 * np.einsum("...mjl,...l->...mj", dg, G)
    ry = dyN - 4.0 * np.einsum("...pjl,...l->...pj", cg, G)
    Gx = 0.25 * np.linalg.solve(g, rx.swapaxes(-1, -2))
    Gy = 0.25 * np.linalg.solve(g, ry.swapaxes(-1, -2))
    return G, Gx, Gy


def riemann_endomorphism(metric: Metric, x, y) -> np.ndarray:
    """Curvature endomorphism R^i_k(x, y) from spray derivatives:

        R^i_k = 2 dG^i/dx^k - y^j d2G^i/dx^j dy^k
                + 2 G^j d2G^i/dy^j dy^k - dG^i/dy^j dG^j/dy^k
    """
    n = metric.n
    G, space = spray_jets(metric, x, y, 1, 2)
    nv = 2 * n
    lead = np.shape(G[0].value)
    Gv = np.empty(lead + (n,))
    Gx = np.empty(lead + (n, n))
    Gy = np.empty(lead + (n, n))
    Gxy = np.empty(lead + (n, n, n))   # [i, j, k] = d2 G^i / dx^j dy^k
    Gyy = np.empty(lead + (n, n, n))   # [i, j, k] = d2 G^i / dy^j dy^k
    for i in range(n):
        Gv[..., i] = G[i].value
        for j in range(n):
            Gx[..., i, j] = G[i].extract(_unit(nv, j))
            Gy[..., i, j] = G[i].extract(_unit(nv, n + j))
            for k in range(n):
                Gxy[..., i, j, k] = G[i].extract(_unit(nv, j, n + k))
                Gyy[..., i, j, k] = G[i].extract(_unit(nv, n + j, n + k))
    yarr = np.stack(np.broadcast_arrays(*[np.asarray(v, dtype=float) for v in y]), axis=-1)
    yarr = np.broadcast_to(yarr, lead + (n,))
    R = (2.0 * Gx
         - np.einsum("...j,...ijk->...ik", yarr, Gxy)
         + 2.0 * np.einsum("...j,...ijk->...ik", Gv, Gyy)
         - np.einsum("...ij,...jk->...ik", Gy, Gy))
    return R


def ricci_scalar(metric: Metric, x, y) -> np.ndarray:
    """Trace of the curvature endomorphism (unnormalized: scales as F^2)."""
    R = riemann_endomorphism(metric, x, y)
    return np.einsum("...ii->...", R)


def flag_curvature(metric: Metric, x, y, w) -> np.ndarray:
    """Sectional curvature of the flag with pole y and transverse edge w."""
    n = metric.n
    g = fundamental_tensor(metric, x, y)
    R = riemann_endomorphism(metric, x, y)
    lead = np.shape(np.asarray(g)[..., 0, 0])
    yarr = np.broadcast_to(np.stack(np.broadcast_arrays(
        *[np.asarray(v, dtype=float) for v in y]), axis=-1), lead + (n,))
    warr = np.broadcast_to(np.stack(np.broadcast_arrays(
        *[np.asarray(v, dtype=float) for v in w]), axis=-1), lead + (n,))
    Rw = np.einsum("...ik,...k->...i", R, warr)
    num = np.einsum("...ij,...i,...j->...", g, Rw, warr)
    gyy = np.einsum("...ij,...i,...j->...", g, yarr, yarr)
    gww = np.einsum("...ij,...i,...j->...", g, warr, warr)
    gyw = np.einsum("...ij,...i,...j->...", g, yarr, warr)
    den = gyy * gww - gyw**2
    if np.any(den <= FLAG_RTOL * np.abs(gyy * gww)):
        raise DegenerateFlag("transverse edge is parallel to the flagpole")
    return num / den
