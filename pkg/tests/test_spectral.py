"""Isoperimetric profiles, the constant chain, ramp cutoffs, the radial
Dirichlet spectrum, and harmonic annulus profiles."""
import math

import numpy as np
import pytest
from scipy.special import jn_zeros

from finslerlab.catalog import (BusemannHausdorff, Euclidean, Funk, Lebesgue,
                                Randers, reverse_metric)
from finslerlab.comparison import FAIL, INFORMATIONAL, PASS
from finslerlab.errors import BadDimension, GridTooCoarse
from finslerlab.polar import polar_field, sphere_measures
from finslerlab.spectral import (RADIAL_SEMANTICS, ConstantsTable, IsoProfile,
                                 RadialFunction, check_iso_bound,
                                 coarea_consistency, iso_profile,
                                 lambda1_radial, r0_and_constants,
                                 radial_harmonic)


@pytest.fixture(scope="module")
def f2():
    return polar_field(Euclidean(2), Lebesgue(), [0.0, 0.0], r_max=2.0, h=0.01)


@pytest.fixture(scope="module")
def f2_half():
    return polar_field(Euclidean(2), Lebesgue(), [0.0, 0.0], r_max=2.0,
                       h=0.005)


@pytest.fixture(scope="module")
def f3():
    return polar_field(Euclidean(3), Lebesgue(), [0.0, 0.0, 0.0], r_max=1.2,
                       h=0.01)


@pytest.fixture(scope="module")
def randers_pair():
    met = Randers(2, [0.3, 0.0])
    kw = dict(r_max=1.5, h=0.01)
    return (polar_field(met, BusemannHausdorff(), [0.0, 0.0], **kw),
            polar_field(reverse_metric(met), BusemannHausdorff(), [0.0, 0.0],
                        **kw))


@pytest.fixture(scope="module")
def funk_field():
    return polar_field(Funk(2), BusemannHausdorff(), [0.3, 0.0], r_max=1.0,
                       h=0.01)


@pytest.fixture(scope="module")
def funk_pair_fine():
    # the reverse Funk metric reaches the chart rim at finite distance from
    # [0.3, 0] (near radius 0.38), so the shared polar range stays below that
    kw = dict(r_max=0.25, h=0.005)
    return (polar_field(Funk(2), BusemannHausdorff(), [0.3, 0.0], **kw),
            polar_field(reverse_metric(Funk(2)), BusemannHausdorff(),
                        [0.3, 0.0], **kw))


@pytest.fixture(scope="module")
def f_coarse():
    return polar_field(Euclidean(2), Lebesgue(), [0.0, 0.0], r_max=0.5, h=0.1)


# -- the constant chain ------------------------------------------------------

def test_shrink_factor_closed_form():
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    root = math.sqrt(0.75)
    assert tab["a0"] == pytest.approx((1 - root) / (1 + root), rel=1e-15)
    assert tab["a0"] == pytest.approx(0.07179676972449085, rel=1e-14)


def test_zero_slack_halving_count_is_two():
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    assert tab["k"] == 2
    assert tab["fixed_point_converged"] is True
    # one halving round at reversibility 1: shrink a0/3, prefactor 1/30
    assert tab["r0"] == pytest.approx(tab["a0"] / 90.0, rel=1e-15)


def test_constant_values_dimension_two():
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    assert tab["C_iso"] == pytest.approx(1218439218.584502, rel=1e-12)
    assert tab["C_SD"] == tab["C_iso"]


def test_constant_values_dimension_three():
    tab = r0_and_constants(3, 1.0, 0.0, 2.0)
    assert tab["a0"] == pytest.approx(0.04791030378009924, rel=1e-14)
    assert tab["r0"] == pytest.approx(0.0005323367086677694, rel=1e-14)
    assert tab["C_iso"] == pytest.approx(328664165275.8768, rel=1e-12)
    assert tab["C_tilde_sobolev"] == pytest.approx(1.728322136583822e24,
                                                  rel=1e-12)
    # dimension three squares the constant against the factor (2*2/1)^2
    assert tab["C_tilde_sobolev"] == pytest.approx(16.0 * tab["C_SD"] ** 2,
                                                  rel=1e-12)


def test_squared_constant_needs_dimension_three():
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    with pytest.raises(BadDimension):
        tab["C_tilde_sobolev"]
    with pytest.raises(KeyError):
        tab["no_such_constant"]


def test_constant_chain_validation():
    with pytest.raises(ValueError):
        r0_and_constants(1, 1.0, 0.0, 2.0)
    with pytest.raises(ValueError):
        r0_and_constants(2, 0.9, 0.0, 2.0)
    with pytest.raises(ValueError):
        r0_and_constants(2, 1.0, -0.1, 2.0)
    with pytest.raises(ValueError):
        r0_and_constants(2, 1.0, 0.0, 1.0)


def test_positive_slack_diverges_and_is_reported():
    tab = r0_and_constants(2, 1.0, 0.001, 2.0)
    assert tab["fixed_point_converged"] is False
    assert tab["k"] == 6
    assert tab["r0"] == pytest.approx(2.616959468588385e-10, rel=1e-9)
    assert math.isinf(tab["C_iso"])


def test_constants_monotone_in_inputs():
    c1 = r0_and_constants(2, 1.0, 0.0, 2.0)
    c2 = r0_and_constants(2, 1.5, 0.0, 2.0)
    c3 = r0_and_constants(2, 2.0, 0.0, 2.0)
    assert c1["C_iso"] < c2["C_iso"] < c3["C_iso"]
    assert c1["r0"] > c2["r0"] > c3["r0"]
    # the volume-ratio bound enters linearly
    c4 = r0_and_constants(2, 1.0, 0.0, 4.0)
    assert c4["C_iso"] == pytest.approx(2.0 * c1["C_iso"], rel=1e-12)


def test_constants_table_is_plain_mapping():
    tab = r0_and_constants(3, 1.0, 0.0, 2.0)
    assert isinstance(tab, dict)
    assert set(tab) >= {"a0", "k", "r0", "C_iso", "C_SD",
                        "fixed_point_converged", "C_tilde_sobolev"}


# -- isoperimetric profiles --------------------------------------------------

def test_flat_disc_ratio_is_two_root_pi(f2):
    prof = iso_profile(f2, 1.0)
    flat = 2.0 * math.sqrt(math.pi)
    assert np.max(np.abs(prof.ratio - flat)) < 1e-6 * flat
    assert prof.euclidean_limit_error() < 1e-12
    assert prof.infimum() == pytest.approx(flat / math.sqrt(math.pi), rel=1e-9)


def test_flat_ball_ratio_dimension_three(f3):
    prof = iso_profile(f3, 1.0)
    flat = 3.0 * (4.0 * math.pi / 3.0) ** (1.0 / 3.0)
    assert prof.ratio[0] == pytest.approx(flat, rel=1e-6)
    assert prof.euclidean_limit_error() < 1e-6


def test_flat_norm_boundary_measures_coincide(randers_pair):
    # translation-invariant norm with constant density: the direction
    # average of the inward dual equals the plain area, so both boundary
    # measures agree even though the integrand is far from 1 pointwise
    prof = iso_profile(randers_pair[0], 1.0)
    assert np.max(np.abs(prof.nu_plus - prof.nu_minus)) < 1e-10
    assert prof.ratio[0] == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-12)


def test_funk_profile_is_genuinely_asymmetric(funk_field):
    prof = iso_profile(funk_field, 0.8)
    assert prof.nu_plus[-1] == pytest.approx(1.5546639099960577, rel=1e-8)
    assert prof.nu_minus[-1] == pytest.approx(5.365272413514905, rel=1e-8)
    assert prof.nu_minus[-1] > 3.0 * prof.nu_plus[-1]
    assert prof.infimum() == pytest.approx(1.6319324453146489, rel=1e-8)
    # small balls still look flat
    assert prof.euclidean_limit_error() < 0.05


def test_iso_profile_validation():
    t = np.array([0.5, 1.0])
    good = dict(volume=np.array([1.0, 2.0]), nu_plus=np.array([1.0, 1.0]),
                nu_minus=np.array([1.0, 1.0]), ratio=np.array([1.0, 1.0]),
                normalized=np.array([1.0, 1.0]))
    with pytest.raises(ValueError, match="positive"):
        IsoProfile(2, 1.0, t, **{**good, "volume": np.array([-1.0, 2.0])})
    with pytest.raises(ValueError, match="mismatched"):
        IsoProfile(2, 1.0, t, **{**good, "ratio": np.array([1.0])})


def test_iso_profile_csv(tmp_path, f2):
    prof = iso_profile(f2, 0.1)
    path = tmp_path / "profile.csv"
    prof.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "t,volume,nu_plus,nu_minus,ratio,normalized"
    assert len(lines) == len(prof.t) + 1
    first = [float(x) for x in lines[1].split(",")]
    assert first[0] == pytest.approx(0.01)
    assert first[4] == pytest.approx(2.0 * math.sqrt(math.pi), rel=1e-9)


# -- the ratio lower bound ---------------------------------------------------

def test_iso_bound_flat_disc(f2):
    prof = iso_profile(f2, 0.5)
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    rep = check_iso_bound(prof, tab, 0.5)
    assert rep.status == PASS
    # normalized flat rows sit at 4, the threshold is ~1e-9
    assert rep.worst_margin() == pytest.approx(4.0, rel=1e-6)
    assert rep.extra["C_iso"] == tab["C_iso"]
    assert rep.extra["threshold"] == INFORMATIONAL
    assert rep.extra["semantics"] == RADIAL_SEMANTICS


def test_iso_bound_randers(randers_pair):
    prof = iso_profile(randers_pair[0], 0.5)
    lam = 1.3 / 0.7
    tab = r0_and_constants(2, lam, 0.0, 2.0)
    assert tab["C_iso"] == pytest.approx(77560063842.58273, rel=1e-12)
    rep = check_iso_bound(prof, tab, 0.5)
    assert rep.status == PASS


def test_iso_bound_fails_against_doctored_constant(f2):
    prof = iso_profile(f2, 0.5)
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    doctored = ConstantsTable({**tab, "C_iso": 1e-3})
    rep = check_iso_bound(prof, doctored, 0.5)
    assert rep.status == FAIL
    assert rep.worst_margin() < 0.0


def test_iso_bound_threshold_tag_passthrough(f2):
    prof = iso_profile(f2, 0.5)
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    rep = check_iso_bound(prof, tab, 0.5, threshold_status=PASS)
    assert rep.extra["threshold"] == PASS


def test_iso_bound_validation(f2):
    prof = iso_profile(f2, 0.5)
    tab = r0_and_constants(2, 1.0, 0.0, 2.0)
    with pytest.raises(ValueError, match="at most 1"):
        check_iso_bound(prof, tab, 1.5)
    with pytest.raises(ValueError, match="exactly"):
        check_iso_bound(prof, tab, 0.75)


# -- ramp cutoffs vs sphere measures -----------------------------------------

def test_coarea_flat_disc(f2):
    rep = coarea_consistency(f2, 1.0)
    assert rep.status == PASS
    # flat geometry reproduces both measures to rounding
    assert all(abs(row.margin) < 1e-10 for row in rep.rows)
    nu_p, nu_m = sphere_measures(f2, f2.metric, 1.0)
    assert rep.extra["nu_plus"] == pytest.approx(nu_p, rel=1e-14)
    assert rep.extra["nu_minus"] == pytest.approx(nu_m, rel=1e-14)
    assert len(rep.extra["ramps_minus"]) == 3


def test_coarea_randers(randers_pair):
    rep = coarea_consistency(randers_pair[0], 1.0)
    assert rep.status == PASS
    assert all(abs(row.margin) < 1e-10 for row in rep.rows)


def test_coarea_funk(funk_field):
    rep = coarea_consistency(funk_field, 0.8, (0.08, 0.04, 0.02))
    assert rep.status == PASS
    for row in rep.rows:
        assert abs(row.margin) < 1e-4 * max(1.0, abs(row.rhs))
    # the inward limit converges to the larger measure
    assert rep.rows[0].rhs == pytest.approx(5.365272413514905, rel=1e-8)


def test_coarea_tight_tolerance_fails(funk_field):
    rep = coarea_consistency(funk_field, 0.8, (0.08, 0.04, 0.02),
                             tol_scale=1e-4)
    assert rep.status == FAIL


def test_coarea_validation(f2):
    with pytest.raises(ValueError, match="three"):
        coarea_consistency(f2, 1.0, (0.08, 0.04))
    with pytest.raises(ValueError, match="halve"):
        coarea_consistency(f2, 1.0, (0.12, 0.06, 0.02))
    with pytest.raises(ValueError, match="multiple"):
        coarea_consistency(f2, 1.0, (0.1, 0.05, 0.025))
    with pytest.raises(ValueError, match="inside"):
        coarea_consistency(f2, 0.1, (0.16, 0.08, 0.04))
    with pytest.raises(ValueError, match="outside"):
        coarea_consistency(f2, 2.0)


# -- the radial Dirichlet eigenvalue -----------------------------------------

def test_flat_disc_ground_state(f2):
    out = lambda1_radial(f2, None, 1.0)
    bessel = float(jn_zeros(0, 1)[0]) ** 2
    assert out["lambda1"] == pytest.approx(bessel, rel=5e-3)
    assert out["lambda1"] == pytest.approx(5.782322517808008, rel=1e-9)
    assert out["lambda1_reverse"] == out["lambda1"]


def test_flat_ball_ground_state_dimension_three(f3):
    out = lambda1_radial(f3, None, 1.0)
    assert out["lambda1"] == pytest.approx(math.pi ** 2, rel=5e-3)
    assert out["lambda1"] == pytest.approx(9.865533266374648, rel=1e-9)


def test_eigenvalue_scales_as_inverse_square(f2):
    lams = {R: lambda1_radial(f2, None, R)["lambda1"]
            for R in (0.5, 1.0, 2.0)}
    assert lams[0.5] > lams[1.0] > lams[2.0]
    scaled = [lams[R] * R * R for R in (0.5, 1.0, 2.0)]
    assert max(scaled) / min(scaled) - 1.0 < 5e-3
    assert lams[0.5] == pytest.approx(23.118925841643915, rel=1e-9)


def test_eigenvalue_halving_invariance(f2, f2_half):
    a = lambda1_radial(f2, None, 0.5)["lambda1"]
    b = lambda1_radial(f2_half, None, 0.5)["lambda1"]
    assert abs(a - b) / a < 1e-3


def test_eigenprofile_shape(f2):
    out = lambda1_radial(f2, None, 1.0)
    u = out["eigenprofile"]
    assert isinstance(u, RadialFunction)
    assert u.dirichlet_outer and u.monotone == "decreasing"
    assert u.values[0] == pytest.approx(1.0, abs=1e-12)
    assert u.values[-1] == 0.0
    assert len(u.r) == 101
    # flat inward dual is 1, so the priced rows are just the squared slope
    rows = u.dual_sq_rows(f2)
    expect = u.derivative[1:] ** 2
    assert np.max(np.abs(rows - expect[None, :])) < 1e-12


def test_reversible_entry_shares_both_eigenvalues(randers_pair):
    out = lambda1_radial(randers_pair[0], randers_pair[1], 1.0)
    assert out["lambda1"] == pytest.approx(6.899116512418907, rel=1e-8)
    # constant-coefficient norm: reversing the metric reflects the
    # directions, the direction sums agree, the spectra coincide
    assert out["lambda1_reverse"] == pytest.approx(out["lambda1"], rel=1e-9)
    # the inward dual exceeds 1 on average, so the value sits above flat
    assert out["lambda1"] > 5.79
    assert out["bound_check"].extra["Lambda_F"] == pytest.approx(13.0 / 7.0,
                                                                rel=1e-12)


def test_funk_forward_and_reverse_split(funk_pair_fine):
    out = lambda1_radial(funk_pair_fine[0], funk_pair_fine[1], 0.25)
    assert out["lambda1"] == pytest.approx(181.39194637842715, rel=1e-8)
    assert out["lambda1_reverse"] == pytest.approx(58.398510803344514,
                                                  rel=1e-8)
    assert out["lambda1"] > 3.0 * out["lambda1_reverse"]


def test_bound_check_dimension_three(f3):
    out = lambda1_radial(f3, None, 1.0)
    rep = out["bound_check"]
    assert rep.status == PASS
    assert len(rep.rows) == 2
    assert all(row.margin > 0.0 for row in rep.rows)
    assert rep.rows[0].rhs == pytest.approx(
        1.0 / out["bound_check"].extra["C_tilde_sobolev"], rel=1e-12)
    assert rep.extra["threshold"] == INFORMATIONAL
    assert rep.extra["radius_within_stated_range"] is True


def test_bound_check_dimension_three_beyond_unit_radius(f3):
    out = lambda1_radial(f3, None, 1.2)
    rep = out["bound_check"]
    assert rep.status == INFORMATIONAL
    assert rep.extra["radius_within_stated_range"] is False


def test_bound_check_dimension_two_is_informational(f2):
    rep = lambda1_radial(f2, None, 1.0)["bound_check"]
    assert rep.status == INFORMATIONAL
    assert rep.rows == []
    assert "dimension" in rep.extra["note"]
    assert rep.to_json()["theorem"] == "eigenvalue_lower_bound"


def test_eigenvalue_refuses_coarse_grids(f_coarse):
    with pytest.raises(GridTooCoarse, match="four radial cells"):
        lambda1_radial(f_coarse, None, 0.3)
    with pytest.raises(GridTooCoarse, match="halving"):
        lambda1_radial(f_coarse, None, 0.5)


# -- radial profile container ------------------------------------------------

def test_radial_function_validation():
    r = np.array([0.0, 0.5, 1.0])
    up = np.array([0.0, 0.5, 1.0])
    with pytest.raises(ValueError, match="lengths"):
        RadialFunction(r, up, np.array([1.0, 1.0]), False, "none")
    with pytest.raises(ValueError, match="negative slope"):
        RadialFunction(r, up, np.array([-1.0, -1.0, -1.0]), False,
                       "increasing")
    with pytest.raises(ValueError, match="vanish"):
        RadialFunction(r, up, np.array([1.0, 1.0, 1.0]), True, "increasing")
    with pytest.raises(ValueError, match="monotonicity"):
        RadialFunction(r, up, np.array([1.0, 1.0, 1.0]), False, "sideways")


def test_radial_function_csv(tmp_path, f2):
    u = lambda1_radial(f2, None, 0.5)["eigenprofile"]
    path = tmp_path / "eigen.csv"
    u.to_csv(path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "r,value,derivative"
    assert len(lines) == len(u.r) + 1
    assert float(lines[1].split(",")[1]) == pytest.approx(1.0, abs=1e-12)


# -- harmonic annulus profiles -----------------------------------------------

def test_harmonic_flat_disc_is_logarithmic(f2):
    u, rep = radial_harmonic(f2, 0.5, 1.5)
    exact = np.log(u.r / 0.5) / math.log(3.0)
    assert np.max(np.abs(u.values - exact)) < 1e-8
    assert rep.flux == pytest.approx(2.0 * math.pi / math.log(3.0), rel=1e-7)
    assert rep.residual < 1e-8
    assert rep.semantics == RADIAL_SEMANTICS


def test_harmonic_flat_ball_dimension_three(f3):
    a, b = 0.4, 1.0
    u, rep = radial_harmonic(f3, a, b)
    exact = (1.0 / a - 1.0 / u.r) / (1.0 / a - 1.0 / b)
    assert np.max(np.abs(u.values - exact)) < 1e-6
    assert rep.flux == pytest.approx(4.0 * math.pi / (1.0 / a - 1.0 / b),
                                     rel=1e-6)
    assert rep.residual < 1e-8


def test_harmonic_gradient_ratio_is_scale_invariant(f2):
    qs = [radial_harmonic(f2, R / 5.0, R)[1].q_value for R in (0.5, 1.0, 2.0)]
    assert qs[0] == pytest.approx(4.277167842853128, rel=1e-6)
    assert qs[1] == pytest.approx(4.278038931814368, rel=1e-6)
    assert qs[2] == pytest.approx(4.278252869019062, rel=1e-6)
    assert max(qs) / min(qs) - 1.0 < 0.05


def test_harmonic_halving_invariance(f2, f2_half):
    ua, _ = radial_harmonic(f2, 0.5, 1.5)
    ub, _ = radial_harmonic(f2_half, 0.5, 1.5)
    assert np.max(np.abs(ua.values - ub.values[::2])) < 1e-6


def test_harmonic_report_json(f2):
    _, rep = radial_harmonic(f2, 0.5, 1.5)
    blob = rep.to_json()
    assert blob["r_inner"] == 0.5 and blob["r_outer"] == 1.5
    assert blob["q_value"] > 0.0
    assert blob["semantics"] == RADIAL_SEMANTICS


def test_harmonic_validation(f2):
    with pytest.raises(ValueError, match="pole"):
        radial_harmonic(f2, 0.0, 1.0)
    with pytest.raises(ValueError, match="two radial cells"):
        radial_harmonic(f2, 0.5, 0.51)
