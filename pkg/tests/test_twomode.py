import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qphase import phasedist as pd
from qphase import states
from qphase import twomode as tm

TWO_PI = 2 * math.pi


def _tmsv(r=0.6, phi=0.0):
    return states.two_mode_squeezed_vacuum(r, phi, eps=1e-14)


# joint distributions


@pytest.mark.parametrize("make", [lambda: _tmsv(0.6, 0.3), lambda: states.pair_coherent(1.3 + 0.4j, 0)])
def test_joint_closed_vs_fock(make):
    s = make()
    a = tm.joint_pb(s, M=64)
    b = tm.joint_pb(s, M=64, method="fock")
    # the Fock route sees the state truncated at tail mass 1e-14
    assert a.max_abs_diff(b) < 1e-7 * np.max(a.values)
    assert a.integral() == pytest.approx(1.0, abs=1e-10)


def test_product_state_factorizes():
    a, b = states.coherent(1.2 + 0.3j), states.squeezed(0.5, 0.3, 0.1)
    joint = tm.joint_pb(states.product_state(a, b), windows=(-math.pi, -math.pi), M=128)
    pa = pd.pb_distribution(a, theta0=-math.pi, M=128).values
    pb = pd.pb_distribution(b, theta0=-math.pi, M=128).values
    np.testing.assert_allclose(joint.values, np.outer(pa, pb), atol=1e-13)
    mom = tm.joint_moments(joint)
    assert mom["cov"] == pytest.approx(0.0, abs=1e-12)


def test_joint_point_evaluation_matches_grid():
    s = tm.kerr_two_mode(1.0, 0.8j, 0.5, 0.4)
    g = tm.joint_pb(s, M=64)
    i, j = 5, 41
    assert tm.joint_function(s, g.axis1[i], g.axis2[j]) == pytest.approx(g.values[i, j], abs=1e-13)


# casting


@pytest.mark.parametrize("make", [
    lambda: _tmsv(0.8, 0.2),
    lambda: states.pair_coherent(1.1, 1),
    lambda: tm.kerr_two_mode(1.0, 0.7, 0.5, 0.9),
])
def test_cast_recipes_agree_and_normalize(make):
    s = make()
    raw = tm.raw_4pi(s, M=64)
    assert raw.integral() == pytest.approx(1.0, abs=1e-10)
    cast = tm.cast_2pi(raw)
    assert cast.integral() == pytest.approx(1.0, abs=1e-10)
    simp = tm.cast_2pi_simplified(s, M=64)
    assert cast.max_abs_diff(simp) < 1e-12
    np.testing.assert_allclose(cast.axis1, simp.axis1, atol=1e-13)


@pytest.mark.parametrize("shift", [(0.0, TWO_PI), (-TWO_PI, 0.0), (3 * TWO_PI, 0.0)])
def test_equivalent_shifts(shift):
    s = tm.kerr_two_mode(1.0, 0.7, 0.5, 0.9)
    ref = tm.cast_2pi_simplified(s, M=32)
    assert tm.cast_2pi_simplified(s, M=32, shift=shift).max_abs_diff(ref) < 1e-13


@pytest.mark.parametrize("shift", [(math.pi, math.pi), (TWO_PI, TWO_PI), (0.0, 0.0)])
def test_invalid_shifts_rejected(shift):
    with pytest.raises(ValueError):
        tm.cast_2pi_simplified(_tmsv(), M=32, shift=shift)


def test_cast_requires_raw_input():
    cast = tm.cast_2pi(tm.raw_4pi(_tmsv(), M=32))
    with pytest.raises(ValueError):
        tm.cast_2pi(cast)
    with pytest.raises(ValueError):
        tm.raw_4pi(_tmsv(), M=33)


def test_cast_then_integrate_equals_integrate_then_cast():
    s = tm.kerr_two_mode(1.0, 0.7, 0.5, 0.9)
    raw = tm.raw_4pi(s, M=64)
    p_cast, m_cast = tm.marginals(tm.cast_2pi(raw))
    p_raw, m_raw = tm.marginals(raw)
    np.testing.assert_allclose(tm.cast_marginal(p_raw).values, p_cast.values, atol=1e-13)
    np.testing.assert_allclose(tm.cast_marginal(m_raw).values, m_cast.values, atol=1e-13)


def test_cast_marginals_match_series():
    s = states.pair_coherent(1.1 + 0.5j, 1)
    p, m = tm.marginals(tm.cast_2pi_simplified(s, M=64))
    np.testing.assert_allclose(p.values, tm.sum_marginal(s, M=64).values, atol=1e-12)
    np.testing.assert_allclose(m.values, tm.difference_marginal(s, M=64).values, atol=1e-12)


@given(st.floats(0.05, 2.0), st.floats(-1.5, 1.5))
@settings(max_examples=20)
def test_tmsv_marginals(r, phi):
    s = states.two_mode_squeezed_vacuum(r, phi, eps=1e-14)
    p = tm.sum_marginal(s, M=256)
    np.testing.assert_allclose(p.values, tm.tmsv_sum_marginal(p.theta, r, phi), atol=1e-9 * np.max(p.values))
    np.testing.assert_allclose(tm.difference_marginal(s, M=64).values, 1 / TWO_PI, atol=1e-13)


# correlations


@given(st.floats(0.05, 2.5))
@settings(max_examples=20)
def test_tmsv_c12_series_vs_dilog(r):
    assert tm.tmsv_c12_series(r) == pytest.approx(tm.tmsv_closed_forms(r)["C12"], rel=1e-12, abs=1e-15)


def test_tmsv_report_matches_closed_forms():
    r = 0.9
    rep = tm.correlation_report(_tmsv(r), M=256)
    cf = tm.tmsv_closed_forms(r)
    assert rep.C12 == pytest.approx(cf["C12"], abs=1e-9)
    assert rep.var1 == pytest.approx(math.pi ** 2 / 3, abs=1e-9)
    assert rep.var_sum_4pi == pytest.approx(cf["var_sum_4pi"], abs=1e-9)
    assert rep.var_sum_2pi == pytest.approx(cf["var_sum_2pi"], abs=1e-9)
    assert rep.var_diff_2pi == pytest.approx(cf["var_diff_2pi"], abs=1e-9)
    assert rep.identity_residual() < 1e-12


def test_tmsv_sum_variance_vanishes_for_strong_squeezing():
    cf = tm.tmsv_closed_forms(6.0)
    assert cf["var_sum_2pi"] < 1e-3
    # the approach is slow: C12 + pi^2/3 ~ 2 eps (1 - ln eps) with eps = 1 - tanh r
    eps = 1 - math.tanh(6.0)
    assert cf["C12"] + math.pi ** 2 / 3 == pytest.approx(2 * eps * (1 - math.log(eps)), rel=0.05)


@pytest.mark.parametrize("make", [
    lambda: states.pair_coherent(1.4, 0),
    lambda: states.pair_coherent(0.9 + 0.9j, 2),
    lambda: tm.kerr_two_mode(1.0, 0.7j, 0.5, 0.9),
])
def test_series_vs_grid_moments(make):
    s = make()
    grid = tm.joint_moments(tm.joint_pb(s, M=128))
    ser = tm.series_correlation(s)
    for k in ("mean1", "mean2", "var1", "var2", "cov"):
        assert ser[k] == pytest.approx(grid[k], abs=1e-10)


def test_pair_coherent_c12():
    s = states.pair_coherent(1.4, 0)
    assert tm.pair_coherent_c12(1.4, 0) == pytest.approx(tm.series_correlation(s)["cov"], abs=1e-10)


def test_pair_coherent_sum_marginal_q0():
    z = 1.2
    s = states.pair_coherent(z, 0)
    p = tm.sum_marginal(s, M=128)
    # q = 0: P(theta_+) = exp(2|z| cos theta_+) / (2 pi I_0(2|z|))
    ref = np.exp(2 * z * np.cos(p.theta)) / (TWO_PI * np.i0(2 * z))
    np.testing.assert_allclose(p.values, ref, atol=1e-9)
    np.testing.assert_allclose(tm.pair_coherent_sum_marginal(p.theta, z, 0), ref, atol=1e-9)


def test_sg_expectations():
    r, phi = 0.7, 0.25
    s = _tmsv(r, phi)
    table = tm.sg_exponential_expectations(r, phi)["table"]
    for (m1, m2), val in table.items():
        assert tm.sg_expectation(s, m1, m2) == pytest.approx(val, abs=1e-12)


# s-parametrized phase difference


def test_difference_distribution_pb_weights_match_marginal():
    s = states.pair_coherent(1.0 + 0.3j, 1)
    a = tm.sparam_difference_distribution(s, 0.0, theta0=-math.pi, M=128, weights="one")
    b = tm.difference_marginal(s, windows=(-math.pi / 2, -math.pi / 2), M=128)
    np.testing.assert_allclose(a.values, b.values, atol=1e-13)


def test_difference_distribution_density_matrix_route():
    s = tm.kerr_two_mode(0.8, 0.6, 0.5, 0.4)
    c = s.dense()
    rho = np.einsum("ab,cd->abcd", c, c.conj())
    a = tm.sparam_difference_distribution(s, -0.5, M=64)
    b = tm.sparam_difference_distribution(rho, -0.5, M=64)
    np.testing.assert_allclose(a.values, b.values, atol=1e-14)
    assert a.integral() == pytest.approx(1.0, abs=1e-10)


# Kerr two-mode


def test_kerr_series_correlation():
    a1, a2, d, tau = 1.0, 0.7, 0.5, 0.9
    s = tm.kerr_two_mode(a1, a2, d, tau)
    assert tm.kerr_correlation(a1, a2, d, tau) == pytest.approx(tm.series_correlation(s)["cov"], abs=1e-10)


@given(st.floats(0.0, TWO_PI))
@settings(max_examples=10)
def test_kerr_uncoupled_has_no_correlation(tau):
    assert abs(tm.kerr_correlation(1.0, 0.7, 0.0, tau)) < 1e-12


def test_kerr_trajectory_starts_uncorrelated():
    out = tm.kerr_trajectory(1.0, 1.0, 0.5, [0.0, 0.5])
    assert abs(out["C12"][0]) < 1e-12 and out["C12"][1] != 0


def test_count_peaks():
    x = np.linspace(0, TWO_PI, 64, endpoint=False)
    v = np.cos(2 * x)[:, None] + np.cos(3 * x)[None, :]
    assert tm.count_peaks(v) == 6


def test_min_variance_window_not_worse():
    s = tm.kerr_two_mode(1.0, 1.0, 0.5, 2.0)
    _, best = tm.min_variance_window(s, M=32)
    mom = tm.series_correlation(s)
    assert best <= mom["var1"] + mom["var2"] + 2 * mom["cov"] + 1e-12
