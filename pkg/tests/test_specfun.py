import math
from fractions import Fraction

import mpmath
import numpy as np
import pytest
import scipy.special as sp
from hypothesis import given
from hypothesis import strategies as st

from qphase import specfun
from qphase.specfun import DomainError


# oracles


@pytest.mark.parametrize("k2", range(1, 40))
def test_gamma_half_matches_math_gamma(k2):
    assert specfun.gamma_half(k2) == pytest.approx(math.gamma(k2 / 2), rel=1e-14)
    assert specfun.log_gamma_half(k2) == pytest.approx(math.lgamma(k2 / 2), rel=1e-13, abs=1e-15)


def test_gamma_half_known_values():
    assert specfun.gamma_half(1) == pytest.approx(math.sqrt(math.pi), rel=1e-15)
    assert specfun.gamma_half(2) == 1.0
    assert specfun.gamma_half(5) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-15)


@pytest.mark.parametrize("n", [0, 1, 2, 7, 20, 50])
@pytest.mark.parametrize("a", [0.0, 0.5, 3.0, -0.5])
@pytest.mark.parametrize("x", [0.0, 0.3, 5.0, 30.0])
def test_laguerre_vs_scipy(n, a, x):
    ref = sp.eval_genlaguerre(n, a, x)
    assert specfun.laguerre_assoc(n, a, x) == pytest.approx(ref, rel=1e-10, abs=1e-10)


def test_laguerre_negative_integer_parameter_vs_mpmath():
    # L_sigma^{-sigma-1}(-x) appears in the finite-dimensional coherent-state norm
    for sigma in (1, 3, 8):
        for x in (0.5, 4.0):
            ref = float(mpmath.laguerre(sigma, -sigma - 1, -x))
            assert specfun.laguerre_assoc(sigma, -sigma - 1, -x) == pytest.approx(ref, rel=1e-12)


@pytest.mark.parametrize("n", range(0, 12))
def test_hermite_he_vs_scipy(n):
    x = np.linspace(-4, 4, 17)
    np.testing.assert_allclose(specfun.hermite_he(n, x), sp.eval_hermitenorm(n, x), rtol=1e-12, atol=1e-12)


@pytest.mark.parametrize("n", range(0, 9))
def test_jacobi_vs_mpmath(n):
    for nu, mu, x in ((0.5, -2.5, 0.3), (2.0, 1.0, -0.7), (-0.5, 0.25, 0.9)):
        ref = float(mpmath.jacobi(n, nu, mu, x))
        assert specfun.jacobi(n, nu, mu, x) == pytest.approx(ref, rel=1e-11, abs=1e-13)


def test_jacobi_exact_rational():
    val = specfun.jacobi(3, Fraction(1, 2), Fraction(-5, 2), Fraction(1, 3))
    assert isinstance(val, Fraction)
    assert float(val) == pytest.approx(float(mpmath.jacobi(3, 0.5, -2.5, mpmath.mpf(1) / 3)), rel=1e-15)


def test_jacobi_homogeneous_scaling():
    p, q = Fraction(2, 7), Fraction(5, 3)
    lhs = specfun.jacobi_homogeneous(4, Fraction(1, 2), Fraction(-3), p, q)
    rhs = q ** 4 * specfun.jacobi(4, Fraction(1, 2), Fraction(-3), p / q)
    assert lhs == rhs


def test_gen_binomial():
    assert specfun.gen_binomial(7, 3) == 35
    assert specfun.gen_binomial(Fraction(1, 2), 2) == Fraction(-1, 8)
    assert specfun.gen_binomial(-3, 2) == 6


def _hyp_oracle(n, b, c, x):
    tot, term = Fraction(0), Fraction(1)
    for k in range(n + 1):
        tot += term
        term = term * (k - n) * (b + k) / ((c + k) * (k + 1)) * x
    return tot


@given(st.integers(0, 10), st.fractions(-5, 5, max_denominator=9), st.fractions(Fraction(1, 9), 6, max_denominator=9),
       st.fractions(-2, 2, max_denominator=9))
def test_hyp2f1_rational_oracle(n, b, c, x):
    assert specfun.hyp2f1_terminating(n, b, c, x) == _hyp_oracle(n, b, c, x)


def test_hyp2f1_vs_scipy_float():
    for n in range(8):
        assert specfun.hyp2f1_terminating(n, 1.5, 2.25, 0.4) == pytest.approx(sp.hyp2f1(-n, 1.5, 2.25, 0.4), rel=1e-13)


def test_hyp2f1_pole_rejected():
    with pytest.raises(DomainError):
        specfun.hyp2f1_terminating(5, 1, -2, 0.5)


# erf


def test_erf_vs_math():
    for x in np.linspace(-5, 5, 41):
        assert specfun.erf(x) == pytest.approx(math.erf(x), abs=1e-16)


def test_erf_complex_vs_mpmath():
    for z in (0.5 + 0.5j, -1.2 + 0.3j, 2j):
        assert complex(specfun.erf(np.array([z]))[0]) == pytest.approx(complex(mpmath.erf(z)), rel=1e-13)


@given(st.floats(-8, 8), st.floats(0, 4))
def test_erf_monotone_odd_bounded(x, h):
    assert specfun.erf(x + h) >= specfun.erf(x)
    assert specfun.erf(-x) == -specfun.erf(x)
    assert abs(specfun.erf(x)) <= 1.0


# dilogarithm


def test_dilog_anchors():
    assert specfun.dilog(1.0) == 0.0
    assert specfun.dilog(0.0) == pytest.approx(math.pi ** 2 / 6, rel=1e-16)
    assert specfun.dilog(2.0) == pytest.approx(-math.pi ** 2 / 12, rel=1e-15)
    assert specfun.dilog(0.5) == pytest.approx(math.pi ** 2 / 12 - 0.5 * math.log(2) ** 2, rel=1e-15)


@pytest.mark.parametrize("x", np.linspace(0, 2, 21))
def test_dilog_vs_scipy_spence(x):
    # scipy's spence(x) is exactly int_1^x ln t / (1 - t) dt
    assert specfun.dilog(x) == pytest.approx(float(sp.spence(x)), rel=1e-13, abs=1e-15)


@pytest.mark.parametrize("x", np.round(np.arange(0.1, 1.95, 0.1), 10))
def test_dilog_reflection_vs_quadrature(x):
    from scipy.integrate import quad

    direct = sum(-quad(lambda u: math.log1p(u) / u if u else 1.0, 0.0, y - 1.0, epsabs=1e-15)[0] for y in (x, 2 - x))
    assert specfun.dilog(x) + specfun.dilog(2 - x) == pytest.approx(direct, abs=1e-10)


@given(st.floats(0.0, 1.0))
def test_dilog_euler_reflection(x):
    # Li2(z) + Li2(1 - z) = pi^2/6 - ln z ln(1 - z), with Li2(z) = dilog(1 - z)
    z = x
    lhs = specfun.dilog(1 - z) + specfun.dilog(z)
    rhs = math.pi ** 2 / 6 - (math.log(z) * math.log1p(-z) if 0 < z < 1 else 0.0)
    assert lhs == pytest.approx(rhs, abs=1e-13)


def test_dilog_domain():
    with pytest.raises(DomainError):
        specfun.dilog(2.5)
    with pytest.raises(DomainError):
        specfun.dilog(-0.1)


def test_polylog2():
    assert specfun.polylog2(-1.0) == pytest.approx(-math.pi ** 2 / 12, rel=1e-15)
    assert specfun.polylog2(0.3) == pytest.approx(float(mpmath.polylog(2, 0.3)), rel=1e-14)


# Bessel, sine/cosine integrals, Ei


@pytest.mark.parametrize("x", [0.0, 0.1, 1.0, 7.5, 19.9, 20.1, 50.0, 700.0])
def test_bessel_i0e_vs_scipy(x):
    assert specfun.bessel_i0e(x) == pytest.approx(sp.i0e(x), rel=1e-13)


def test_bessel_i0():
    assert specfun.bessel_i0(2.5) == pytest.approx(sp.i0(2.5), rel=1e-13)


@pytest.mark.parametrize("x", [0.01, 0.5, 1.0, 3.0, 10.0, 40.0, 200.0])
def test_sici_vs_scipy(x):
    si, ci = specfun.sici(x)
    ref_si, ref_ci = sp.sici(x)
    assert si == pytest.approx(ref_si, rel=1e-12, abs=1e-15)
    assert ci == pytest.approx(ref_ci, rel=1e-12, abs=1e-15)


@pytest.mark.parametrize("x", [-30.0, -2.0, -0.1, 0.1, 2.0, 30.0])
def test_ei_imaginary_vs_mpmath(x):
    assert specfun.expint_ei_imag(x) == pytest.approx(complex(mpmath.ei(1j * x)), rel=1e-12)


def test_ei_singular_at_zero():
    with pytest.raises(DomainError):
        specfun.expint_ei_imag(0.0)


# recurrences as properties


@given(st.integers(1, 49), st.floats(0, 4), st.floats(-50, 50))
def test_laguerre_recurrence(n, a, x):
    L = [specfun.laguerre_assoc(k, a, x) for k in (n - 1, n, n + 1)]
    lhs = (n + 1) * L[2]
    rhs = (2 * n + 1 + a - x) * L[1] - (n + a) * L[0]
    assert abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1.0)


@given(st.integers(1, 15), st.floats(-5, 5))
def test_hermite_recurrence(n, x):
    h = [specfun.hermite_he(k, x) for k in (n - 1, n, n + 1)]
    assert h[2] == pytest.approx(x * h[1] - n * h[0], rel=1e-12, abs=1e-9)


def test_as_fraction():
    assert specfun.as_fraction(-0.5) == Fraction(-1, 2)
    assert specfun.as_fraction(Fraction(2, 3)) == Fraction(2, 3)
