"""Jet algebra: enumeration order, arithmetic exactness, FD cross-checks."""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from finslerlab import jets
from finslerlab.errors import DomainError, OrderError
from finslerlab.jets import Jet, MultiIndex, derivative_jet, jet_eval, jet_space

from helpers import central_partial, rel_err


def test_graded_lex_enumeration_frozen():
    space = jet_space(2, 2)
    assert space.indices == [(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]
    assert space.size == 6


def test_simplex_size_matches_binomial():
    for n, d in [(1, 4), (2, 3), (3, 5), (4, 2)]:
        assert jet_space(n, d).size == math.comb(n + d, d)


def test_box_caps_restrict_enumeration():
    space = jet_space(2, 3, groups=(1, 1), caps=(1, 2))
    assert all(a[0] <= 1 and a[1] <= 2 for a in space.indices)
    assert (1, 2) in space.index_of and (2, 0) not in space.index_of


def test_multi_index_validation():
    m = MultiIndex((2, 0, 1))
    assert m.degree == 3 and len(m) == 3
    with pytest.raises(ValueError):
        MultiIndex((1, -1))


def test_sinh_jet_frozen_values():
    j = jet_eval(lambda v: v[0].sinh(), [1.0], 3)
    assert j.value == pytest.approx(math.sinh(1.0), rel=1e-15)
    # raw first derivative of sinh at 1
    assert j.extract((1,)) == pytest.approx(1.5430806348152437, rel=1e-15)
    assert j.extract((2,)) == pytest.approx(math.sinh(1.0), rel=1e-14)
    assert j.extract((3,)) == pytest.approx(math.cosh(1.0), rel=1e-14)


def test_polynomial_jets_are_exact():
    # f = x^2 y + 3y^3: all raw partials are integers, matched exactly
    def f(v):
        x, y = v
        return x * x * y + 3.0 * (y ** 3)

    j = jet_eval(f, [2.0, -1.0], 3)
    assert j.value == 2.0 * 2.0 * -1.0 + 3.0 * -1.0
    assert j.extract((1, 0)) == 2 * 2.0 * -1.0
    assert j.extract((0, 1)) == 4.0 + 9.0
    assert j.extract((2, 0)) == -2.0
    assert j.extract((1, 1)) == 4.0
    assert j.extract((0, 3)) == 18.0
    assert j.extract((3, 0)) == 0.0


@given(st.floats(-2.0, 2.0), st.floats(-2.0, 2.0),
       st.floats(-3.0, 3.0), st.floats(-3.0, 3.0))
@settings(max_examples=60, deadline=None)
def test_linearity(a, b, x, y):
    space = jet_space(2, 3)

    def fj(v):
        return (v[0] * v[1]).sin() + v[0]

    def gj(v):
        return (v[0] + v[1] * v[1]).cos()

    vs = Jet.variables(space, [x, y])
    lhs = a * fj(vs) + b * gj(vs)
    rhs_vs = Jet.variables(space, [x, y])
    rhs = a * fj(rhs_vs) + b * gj(rhs_vs)
    combined = fj(vs) * a + gj(vs) * b
    np.testing.assert_allclose(lhs.c, rhs.c, rtol=0, atol=0)
    np.testing.assert_allclose(combined.c, lhs.c, rtol=1e-15, atol=1e-15)


@given(st.floats(0.3, 2.0), st.floats(-1.5, 1.5))
@settings(max_examples=60, deadline=None)
def test_chain_rule_identities(x, y):
    space = jet_space(2, 4)
    u, v = Jet.variables(space, [x, y])
    f = u * u + v.sin() * u + 1.5

    np.testing.assert_allclose(f.log().exp().c, f.c, rtol=1e-12, atol=1e-12)
    np.testing.assert_allclose((f.sqrt() * f.sqrt()).c, f.c, rtol=1e-12, atol=1e-12)
    one = f.sin() * f.sin() + f.cos() * f.cos()
    expected = np.zeros_like(one.c)
    expected[..., 0] = 1.0
    np.testing.assert_allclose(one.c, expected, rtol=0, atol=1e-10)
    # cosh^2 - sinh^2 = 1, with cancellation scaled by the squared terms
    big = f.cosh() * f.cosh()
    hyp = big - f.sinh() * f.sinh()
    scale = float(np.max(np.abs(big.c)))
    np.testing.assert_allclose(hyp.c, expected, rtol=0, atol=1e-12 * max(scale, 1.0))


def test_division_and_pow_consistency():
    space = jet_space(2, 3)
    x, y = Jet.variables(space, [0.7, -0.4])
    f = x * x + y * y + 0.5
    np.testing.assert_allclose((f / f).c, Jet.constant(space, 1.0).c, atol=1e-14)
    np.testing.assert_allclose((f ** 3).c, (f * f * f).c, rtol=1e-14)
    np.testing.assert_allclose((f ** 0.5).c, f.sqrt().c, rtol=1e-13)
    np.testing.assert_allclose((f ** -2).c, (1.0 / (f * f)).c, rtol=1e-13)


def _smooth(v):
    x, y = v
    return jets.exp(jets.sin(x * y) * 0.5 + x * 0.25) + jets.log(2.0 + jets.cos(x + y))


def test_against_central_differences_orders_1_to_3():
    pt = [0.6, -0.8]
    j = jet_eval(_smooth, pt, 3)

    def plain(z):
        return float(_smooth(z))

    tols = {1: 1e-8, 2: 1e-6, 3: 1e-4}
    space = j.space
    for alpha in space.indices:
        if sum(alpha) == 0:
            continue
        fd = central_partial(plain, pt, alpha)
        assert rel_err(j.extract(alpha), fd) < tols[sum(alpha)], alpha


def test_batched_coefficients_match_scalar():
    xs = np.array([0.2, 0.6, 1.1])
    ys = np.array([-0.5, 0.1, 0.9])
    jb = jet_eval(_smooth, [xs, ys], 3)
    for i in range(len(xs)):
        js = jet_eval(_smooth, [float(xs[i]), float(ys[i])], 3)
        np.testing.assert_allclose(jb.c[i], js.c, rtol=1e-14, atol=1e-15)


def test_derivative_jet_gather():
    src = jet_space(2, 4)
    tgt = jet_space(2, 2)
    x, y = Jet.variables(src, [0.3, 0.7])
    f = (x * y).exp()
    dfx = derivative_jet(f, (1, 0), tgt)
    ref = jet_eval(lambda v: (v[0] * v[1]).exp() * v[1], [0.3, 0.7], 2)
    np.testing.assert_allclose(dfx.c, ref.c, rtol=1e-12)


def test_domain_errors():
    space = jet_space(1, 2)
    (x,) = Jet.variables(space, [-1.0])
    with pytest.raises(DomainError):
        x.sqrt()
    with pytest.raises(DomainError):
        x.log()
    zero = Jet.constant(space, 0.0)
    with pytest.raises(DomainError):
        x / zero
    with pytest.raises(DomainError):
        x ** 0.5


def test_order_and_index_errors():
    a = Jet.variables(jet_space(2, 2), [1.0, 2.0])[0]
    b = Jet.variables(jet_space(2, 3), [1.0, 2.0])[0]
    with pytest.raises(OrderError):
        a + b
    with pytest.raises(IndexError):
        a.extract((1,))
    with pytest.raises(IndexError):
        a.extract((3, 0))
    with pytest.raises(IndexError):
        a.extract((-1, 1))


def test_numpy_arrays_do_not_capture_jets():
    space = jet_space(1, 1)
    (x,) = Jet.variables(space, [2.0])
    out = np.float64(3.0) + x
    assert isinstance(out, Jet)
    assert out.value == 5.0
    out2 = np.array(1.5) * x
    assert isinstance(out2, Jet)
