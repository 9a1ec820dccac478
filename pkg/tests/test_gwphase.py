import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qphase import gwphase as gw
from qphase import states
from qphase.specfun import DomainError

TWO_PI = 2 * math.pi


@pytest.mark.parametrize("n", [1, 2, 3, 5, 8])
@pytest.mark.parametrize("theta0, x", [(0.0, 0.4), (0.0, math.pi), (-1.0, 5.9), (2.5, 2.0)])
def test_gamma_closed_form_vs_quadrature(n, theta0, x):
    th = theta0 + x
    assert gw.gw_gamma(n, th, theta0) == pytest.approx(gw.gw_gamma_quad(n, th, theta0), abs=1e-11)


def test_gamma0_midpoint_value():
    # at x = pi the n = 0 function reduces to ln(pi)/2 - 1/2
    assert gw.gw_gamma(0, math.pi) == pytest.approx(0.5 * math.log(math.pi) - 0.5, rel=1e-14)
    assert gw.gw_gamma(0, math.pi) == pytest.approx(0.0723649, abs=1e-7)


@given(st.floats(0.05, TWO_PI - 0.05))
def test_gamma0_symmetric_about_midpoint(x):
    assert gw.gw_gamma(0, x) == pytest.approx(gw.gw_gamma(0, TWO_PI - x), abs=1e-13)


def test_gamma_vectorized():
    th = np.array([0.3, 1.0, 4.0])
    np.testing.assert_allclose(gw.gw_gamma(3, th), [gw.gw_gamma(3, t) for t in th], rtol=1e-15)


@pytest.mark.parametrize("theta", [0.0, TWO_PI, -0.1, 7.0])
def test_gamma_outside_window(theta):
    with pytest.raises(DomainError):
        gw.gw_gamma(1, theta)


def test_quadrature_oracle_domain():
    with pytest.raises(ValueError):
        gw.gw_gamma_quad(0, 1.0)


def test_partition_counts():
    assert [len(gw.partitions(n)) for n in range(11)] == [1, 1, 2, 3, 5, 7, 11, 15, 22, 30, 42]
    for n in range(1, 9):
        for p in gw.partitions(n):
            assert sum(k * m for k, m in p) == n


def test_phi_first_terms():
    th = 1.7
    g0, g1 = gw.gw_gamma(0, th), gw.gw_gamma(1, th)
    assert gw.gw_phi(0, th) == pytest.approx(math.exp(-g0), rel=1e-15)
    assert gw.gw_phi(1, th) == pytest.approx(-g1 * math.exp(-g0), rel=1e-14)


@given(st.integers(0, 9), st.floats(0.05, TWO_PI - 0.05), st.floats(-3, 3))
@settings(max_examples=30)
def test_recursion_equals_partition_sum(n, x, theta0):
    a = gw.gw_phi(n, theta0 + x, method="recursion", theta0=theta0)
    b = gw.gw_phi(n, theta0 + x, method="partition", theta0=theta0)
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))


def test_recursion_equals_partition_at_midpoint():
    assert gw.gw_phi(4, math.pi, method="recursion") == pytest.approx(
        gw.gw_phi(4, math.pi, method="partition"), abs=1e-15)


# cached basis


def test_cache_consistent_and_read_only():
    c = gw.GWBasisCache.build(6, 0.3, 256)
    assert c.M == 256 and c.theta[0] == pytest.approx(0.3 + math.pi / 256)
    np.testing.assert_allclose(gw.gw_phi(5, cache=c), gw.gw_phi(5, c.theta, theta0=0.3), rtol=1e-13)
    np.testing.assert_allclose(gw.gw_phi(5, cache=c, method="partition"), c.phi[5], rtol=1e-12)
    with pytest.raises(ValueError):
        c.phi[0, 0] = 0


def test_cache_exhausted():
    c = gw.GWBasisCache.build(3, 0.0, 64)
    with pytest.raises(gw.CacheExhaustedError):
        gw.gw_phi(4, cache=c)
    with pytest.raises(gw.CacheExhaustedError):
        c.overlaps(4)
    with pytest.raises(gw.CacheExhaustedError):
        gw.gw_distribution(states.coherent(2.0), 0.0, 64, cache=c)


def test_cache_grid_mismatch():
    c = gw.GWBasisCache.build(20, 0.0, 64)
    with pytest.raises(ValueError):
        gw.gw_distribution(states.coherent(1.0), 0.1, 64, cache=c)


def test_overlaps_orthonormal():
    c = gw.GWBasisCache.build(6, 0.3, 4096)
    ov = c.overlaps()
    gram = ov.conj() @ ov.T * TWO_PI / c.M
    np.testing.assert_allclose(gram, np.eye(7), atol=1e-6)


# distributions


def test_vacuum_is_not_flat():
    d = gw.gw_distribution(states.number(0), 0.0, 1024)
    assert d.meta["raw_integral"] == pytest.approx(1.0, abs=1e-5)
    assert d.integral() == pytest.approx(1.0, abs=1e-14)
    assert gw.interior_ratio(d) > 10
    assert gw.pb_vacuum_flatness(0.0, 1024) < 1e-15


def test_coherent_peak_location():
    d = gw.gw_distribution(states.coherent(2.5 * np.exp(1j * math.pi)), 0.0, 1024)
    assert d.theta[np.argmax(d.values)] == pytest.approx(math.pi, abs=0.05)


def test_interior_ratio_uniform():
    from qphase.phasedist import pb_distribution

    assert gw.interior_ratio(pb_distribution(states.number(3), M=64)) == pytest.approx(1.0)


# operator


def test_operator_hermitian_and_diagonal():
    P = gw.gw_operator_matrix(8, 0.4)
    np.testing.assert_allclose(P, P.conj().T, atol=1e-15)
    np.testing.assert_allclose(np.diag(P), 0.4 + math.pi)
    with pytest.raises(ValueError):
        gw.gw_operator_matrix(0)


@given(st.lists(st.complex_numbers(max_magnitude=1, allow_nan=False, allow_infinity=False), min_size=2, max_size=12)
       .filter(lambda v: sum(abs(x) ** 2 for x in v) > 1e-6), st.floats(-3, 3))
def test_commutator_identity(amps, theta0):
    lhs, rhs = gw.gw_commutator_check(states.from_amplitudes(amps), theta0)
    assert lhs == pytest.approx(rhs, abs=1e-12)
