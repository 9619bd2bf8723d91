"""Curvature assemblies against closed forms and FD cross-routes."""
from __future__ import annotations

import numpy as np
import pytest

from finslerlab import catalog as C
from finslerlab import curvature as K
from finslerlab.errors import DegenerateFlag, DomainError, SingularMatrix

from helpers import rel_err

POINTS = [
    ([0.3, -0.2], [0.7, 0.4]),
    ([0.1, 0.25], [-0.5, 0.8]),
    ([-0.2, 0.15], [0.9, -0.1]),
]


def metrics():
    return {
        "euclidean": C.make_metric("euclidean", 2),
        "poincare": C.make_metric("poincare_ball", 2, {"K": -1.0}),
        "sphere": C.make_metric("stereographic_sphere", 2, {"K": 1.0}),
        "minkowski": C.make_metric("minkowski_quartic", 2, {"eps": 0.1}),
        "randers": C.make_metric("randers", 2, {"b": [0.3, 0.0]}),
        "funk": C.make_metric("funk", 2),
    }


def test_euclidean_is_flat_with_identity_tensor():
    m = metrics()["euclidean"]
    for x, y in POINTS:
        np.testing.assert_allclose(K.fundamental_tensor(m, x, y), np.eye(2), atol=1e-14)
        np.testing.assert_allclose(K.cartan_tensor(m, x, y), 0.0, atol=1e-14)
        np.testing.assert_allclose(K.spray_coefficients(m, x, y), 0.0, atol=1e-14)
        np.testing.assert_allclose(K.riemann_endomorphism(m, x, y), 0.0, atol=1e-14)


@pytest.mark.parametrize("name", ["minkowski", "randers"])
def test_locally_minkowski_families_are_flat(name):
    m = metrics()[name]
    for x, y in POINTS:
        assert np.max(np.abs(K.riemann_endomorphism(m, x, y))) < 1e-10
        assert abs(float(K.ricci_scalar(m, x, y))) < 1e-10


@pytest.mark.parametrize("name,expected", [("sphere", 1.0), ("poincare", -1.0)])
def test_space_form_curvatures(name, expected):
    m = metrics()[name]
    for x, y in POINTS:
        f2 = float(m.f_squared(x, y))
        assert K.ricci_scalar(m, x, y) / f2 == pytest.approx(expected, rel=1e-10)
        assert K.flag_curvature(m, x, y, [y[1], -y[0] + 0.3]) == pytest.approx(expected, rel=1e-10)


def test_space_form_curvatures_n3():
    for fam, Kval, expected in [("stereographic_sphere", 1.0, 2.0),
                                ("poincare_ball", -1.0, -2.0)]:
        m = C.make_metric(fam, 3, {"K": Kval})
        x, y = [0.2, -0.1, 0.3], [0.5, 0.4, -0.2]
        f2 = float(m.f_squared(x, y))
        assert K.ricci_scalar(m, x, y) / f2 == pytest.approx(expected, rel=1e-9)
        assert K.flag_curvature(m, x, y, [0.1, -0.7, 0.2]) == pytest.approx(
            expected / 2.0, rel=1e-9)


def test_funk_spray_and_flag():
    m = metrics()["funk"]
    for x, y in POINTS:
        f = C.eval_f(m, x, y)
        np.testing.assert_allclose(K.spray_coefficients(m, x, y),
                                   0.5 * f * np.asarray(y), rtol=1e-10, atol=1e-12)
        assert K.flag_curvature(m, x, y, [y[1] + 0.2, -y[0]]) == pytest.approx(-0.25, abs=1e-10)
        assert K.ricci_scalar(m, x, y) / f**2 == pytest.approx(-0.25, abs=1e-10)


@pytest.mark.parametrize("name", list(metrics()))
def test_fundamental_tensor_euler_contraction(name):
    m = metrics()[name]
    for x, y in POINTS:
        g = K.fundamental_tensor(m, x, y)
        f2 = float(m.f_squared(x, y))
        assert np.einsum("ij,i,j->", g, y, y) == pytest.approx(f2, rel=1e-12)
        np.testing.assert_allclose(g, g.T, rtol=0, atol=1e-13)


@pytest.mark.parametrize("name", list(metrics()))
def test_cartan_symmetry_and_null_contraction(name):
    m = metrics()[name]
    for x, y in POINTS:
        c = K.cartan_tensor(m, x, y)
        scale = max(float(np.max(np.abs(c))), 1.0)
        for perm in [(0, 2, 1), (1, 0, 2), (2, 1, 0)]:
            np.testing.assert_allclose(c, np.transpose(c, perm), atol=1e-12 * scale)
        contracted = np.einsum("ijk,k->ij", c, np.asarray(y, dtype=float))
        assert np.max(np.abs(contracted)) < 1e-9 * scale


@pytest.mark.parametrize("name", list(metrics()))
def test_fundamental_tensor_matches_fd_hessian(name):
    m = metrics()[name]
    x, y = POINTS[0]
    g = K.fundamental_tensor(m, x, y)
    h = 1e-5
    fd = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            def f2(dy_i, dy_j, i=i, j=j):
                z = list(y)
                z[i] += dy_i
                z[j] += dy_j
                return float(m.f_squared(x, z))
            fd[i, j] = 0.5 * (f2(h, h) - f2(h, -h) - f2(-h, h) + f2(-h, -h)) / (4 * h * h)
    assert rel_err(g, fd) < 1e-5


@pytest.mark.parametrize("name", ["poincare", "sphere", "funk"])
def test_spray_matches_fd_assembly(name):
    """Independent route: metric tensor at FD-shifted base points."""
    m = metrics()[name]
    x, y = POINTS[1]
    n = 2
    h = 1e-6
    dg = np.empty((n, n, n))  # [l, j, k] = d g_jk / d x_l
    for l in range(n):
        xp, xm = list(x), list(x)
        xp[l] += h
        xm[l] -= h
        dg[l] = (K.fundamental_tensor(m, xp, y) - K.fundamental_tensor(m, xm, y)) / (2 * h)
    yv = np.asarray(y)
    N = (2.0 * np.einsum("kjl,j,k->l", dg, yv, yv)
         - np.einsum("ljk,j,k->l", dg, yv, yv))
    G_fd = 0.25 * np.linalg.solve(K.fundamental_tensor(m, x, y), N)
    assert rel_err(K.spray_coefficients(m, x, y), G_fd, floor=1e-6) < 1e-6


@pytest.mark.parametrize("name", ["poincare", "sphere", "funk"])
def test_riemann_matches_fd_of_spray(name):
    """Assemble the endomorphism from FD derivatives of spray values."""
    m = metrics()[name]
    x, y = POINTS[0]
    n = 2
    h = 1e-4

    def G(xv, yv):
        return K.spray_coefficients(m, list(xv), list(yv))

    x0, y0 = np.asarray(x), np.asarray(y)
    Gx = np.empty((n, n))
    Gy = np.empty((n, n))
    Gxy = np.empty((n, n, n))
    Gyy = np.empty((n, n, n))
    for j in range(n):
        ej = np.eye(n)[j]
        Gx[:, j] = (G(x0 + h * ej, y0) - G(x0 - h * ej, y0)) / (2 * h)
        Gy[:, j] = (G(x0, y0 + h * ej) - G(x0, y0 - h * ej)) / (2 * h)
        for k in range(n):
            ek = np.eye(n)[k]
            Gxy[:, j, k] = (G(x0 + h * ej, y0 + h * ek) - G(x0 + h * ej, y0 - h * ek)
                            - G(x0 - h * ej, y0 + h * ek) + G(x0 - h * ej, y0 - h * ek)) / (4 * h * h)
            Gyy[:, j, k] = (G(x0, y0 + h * (ej + ek)) - G(x0, y0 + h * (ej - ek))
                            - G(x0, y0 - h * (ej - ek)) + G(x0, y0 - h * (ej + ek))) / (4 * h * h)
    Gv = G(x0, y0)
    R_fd = (2.0 * Gx - np.einsum("j,ijk->ik", y0, Gxy)
            + 2.0 * np.einsum("j,ijk->ik", Gv, Gyy)
            - np.einsum("ij,jk->ik", Gy, Gy))
    assert rel_err(K.riemann_endomorphism(m, x, y), R_fd, floor=1.0) < 1e-5


def test_flag_invariant_under_edge_shear():
    """Adding multiples of the pole to the edge leaves the flag unchanged."""
    m = metrics()["sphere"]
    x, y = POINTS[2]
    w = [0.4, 0.55]
    k0 = K.flag_curvature(m, x, y, w)
    for t in (0.5, -2.0):
        w2 = [w[0] + t * y[0], w[1] + t * y[1]]
        assert K.flag_curvature(m, x, y, w2) == pytest.approx(float(k0), rel=1e-9)


def test_degenerate_flag_raises():
    m = metrics()["sphere"]
    x, y = POINTS[0]
    with pytest.raises(DegenerateFlag):
        K.flag_curvature(m, x, y, [2.0 * y[0], 2.0 * y[1]])


def test_non_homogeneous_energy_rejected():
    class Bad(C.Euclidean):
        def f_squared(self, x, y):
            e = super().f_squared(x, y)
            return e + 0.3 * e * e

    with pytest.raises(DomainError):
        K.fundamental_tensor(Bad(2), [0.0, 0.0], [1.0, 2.0])


def test_singular_matrix_on_nonconvex_norm():
    # a quartic perturbation this large destroys fiber convexity near axes
    m = C.make_metric("minkowski_quartic", 2, {"eps": 5.0})
    with pytest.raises(SingularMatrix):
        K.fundamental_tensor(m, [0.0, 0.0], [1.0, 0.0])


def test_batched_matches_scalar():
    m = metrics()["sphere"]
    xs = np.array([x for x, _ in POINTS]).T
    ys = np.array([y for _, y in POINTS]).T
    Rb = K.riemann_endomorphism(m, [xs[0], xs[1]], [ys[0], ys[1]])
    for i, (x, y) in enumerate(POINTS):
        np.testing.assert_allclose(Rb[i], K.riemann_endomorphism(m, x, y),
                                   rtol=1e-12, atol=1e-12)
