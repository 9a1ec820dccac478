"""Special functions used throughout the package.

Most routines are written against plain Python arithmetic so that they accept
floats, numpy arrays and ``fractions.Fraction`` values alike.  The rational
mode is what makes the finite alternating sums behind the phase-distribution
weights usable: those sums cancel catastrophically in double precision once
the index reaches a few dozen.
"""
from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

PI2_6 = math.pi ** 2 / 6.0
EULER_GAMMA = 0.57721566490153286061


class DomainError(ValueError):
    """Argument outside the domain a routine supports."""


def _one_like(x):
    if isinstance(x, np.ndarray):
        return np.ones_like(x)
    return x * 0 + 1


# ---------------------------------------------------------------------------
# gamma at half-integers

def gamma_half(k2: int) -> float:
    """Return Gamma(k2/2) for a positive integer ``k2`` by upward recurrence."""
    k2 = int(k2)
    if k2 <= 0:
        raise DomainError(f"gamma_half needs a positive argument, got {k2}")
    if k2 % 2:
        x, g = 0.5, math.sqrt(math.pi)
    else:
        x, g = 1.0, 1.0
    while 2 * x < k2:
        g *= x
        x += 1.0
    return g


def log_gamma_half(k2: int) -> float:
    """Natural log of Gamma(k2/2); safe where :func:`gamma_half` overflows."""
    k2 = int(k2)
    if k2 <= 0:
        raise DomainError(f"log_gamma_half needs a positive argument, got {k2}")
    return math.lgamma(k2 / 2.0)


# ---------------------------------------------------------------------------
# orthogonal polynomials

def laguerre_assoc(n: int, a, x):
    """Associated Laguerre polynomial L_n^a(x) by the three-term recurrence."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    l0 = _one_like(x)
    if n == 0:
        return l0
    l1 = 1 + a - x
    for k in range(1, n):
        l0, l1 = l1, ((2 * k + 1 + a - x) * l1 - (k + a) * l0) / (k + 1)
    return l1


def laguerre_homogeneous(n: int, a, p, q):
    """Return q**n * L_n^a(p/q), finite also at q = 0.

    Uses the recurrence obtained by scaling the ordinary one, so no division
    by q ever happens.
    """
    if n < 0:
        raise DomainError("degree must be non-negative")
    l0 = _one_like(p) * _one_like(q)
    if n == 0:
        return l0
    l1 = (1 + a) * q - p
    for k in range(1, n):
        l0, l1 = l1, (((2 * k + 1 + a) * q - p) * l1 - (k + a) * q * q * l0) / (k + 1)
    return l1


def hermite_he(n: int, x):
    """Probabilists' Hermite polynomial He_n(x)."""
    h0 = _one_like(x)
    if n == 0:
        return h0
    h1 = x * h0
    for k in range(1, n):
        h0, h1 = h1, x * h1 - k * h0
    return h1


def gen_binomial(z, j: int):
    """Binomial coefficient C(z, j) for arbitrary (rational or float) upper index."""
    out = z * 0 + 1
    for i in range(j):
        out = out * (z - i)
    if isinstance(out, int):
        return out // math.factorial(j)
    return out / math.factorial(j)


def jacobi_homogeneous(n: int, nu, mu, p, q):
    """Return q**n * P_n^(nu,mu)(p/q) from the explicit binomial sum.

    The three-term recurrence in the degree breaks down for the parameter
    combinations needed here (its leading coefficient can vanish when
    nu + mu is a negative integer), so the explicit form is used instead.
    """
    if n < 0:
        raise DomainError("degree must be non-negative")
    minus = (p - q) / 2
    plus = (p + q) / 2
    a = _binomial_row(n + nu, n)
    b = _binomial_row(n + mu, n)
    total = 0
    for k in range(n + 1):
        total = total + a[n - k] * b[k] * minus ** k * plus ** (n - k)
    return total


def _binomial_row(z, n: int) -> list:
    """[C(z, 0), ..., C(z, n)] by the upward ratio C(z, j+1) = C(z, j) (z - j) / (j + 1)."""
    row = [z * 0 + 1]
    for j in range(n):
        nxt = row[-1] * (z - j)
        row.append(nxt // (j + 1) if isinstance(nxt, int) else nxt / (j + 1))
    return row


def jacobi(n: int, nu, mu, x):
    """Jacobi polynomial P_n^(nu,mu)(x)."""
    return jacobi_homogeneous(n, nu, mu, x, 1)


def _check_hyp_c(n: int, c) -> None:
    if float(c) == int(float(c)) and float(c) <= 0 and -float(c) < n:
        raise DomainError(f"2F1 lower parameter c={c} hits a pole before the series terminates")


def hyp2f1_terminating(n: int, b, c, x):
    """Terminating Gauss series 2F1(-n, b; c; x)."""
    return hyp2f1_terminating_homogeneous(n, b, c, x, 1)


def hyp2f1_terminating_homogeneous(n: int, b, c, p, q):
    """Return q**n * 2F1(-n, b; c; p/q) as a polynomial in (p, q)."""
    if n < 0:
        raise DomainError("degree must be non-negative")
    _check_hyp_c(n, c)
    coef = 1
    total = 0
    for k in range(n + 1):
        total = total + coef * p ** k * q ** (n - k)
        coef = coef * (k - n) * (b + k) / ((c + k) * (k + 1))
    return total


# ---------------------------------------------------------------------------
# error function

_erf_u = np.frompyfunc(math.erf, 1, 1)


def erf(x):
    """Error function, real or complex, scalar or array."""
    arr = np.asarray(x)
    if np.iscomplexobj(arr):
        from scipy.special import erf as cerf

        return cerf(arr)
    out = np.asarray(_erf_u(arr.astype(float)), dtype=float)
    return out if arr.ndim else float(out)


# ---------------------------------------------------------------------------
# dilogarithm

def _li2_series(z: float) -> float:
    total, zk, k = 0.0, z, 1
    while True:
        term = zk / (k * k)
        total += term
        if abs(term) < 1e-18 * max(abs(total), 1e-300):
            return total
        k += 1
        zk *= z


def _li2(z: float) -> float:
    if z == 1.0:
        return PI2_6
    if abs(z) <= 0.5:
        return _li2_series(z)
    if z > 0.5:
        return PI2_6 - math.log(z) * math.log1p(-z) - _li2_series(1.0 - z)
    w = z / (z - 1.0)
    return -_li2_series(w) - 0.5 * math.log1p(-z) ** 2


def dilog(x):
    """dilog(x) = -int_1^x ln(t)/(t-1) dt = Li2(1-x), defined on [0, 2].

    Anchors: dilog(1) = 0, dilog(0) = pi^2/6, dilog(2) = -pi^2/12.
    """
    arr = np.asarray(x, dtype=float)
    if np.any((arr < 0.0) | (arr > 2.0)) or np.any(np.isnan(arr)):
        raise DomainError("dilog is implemented on [0, 2]")
    out = np.array([_li2(1.0 - v) for v in arr.ravel()]).reshape(arr.shape)
    return out if arr.ndim else float(out)


def polylog2(z):
    """Li2(z) for real z in [-1, 1]."""
    return dilog(1.0 - np.asarray(z, dtype=float))


# ---------------------------------------------------------------------------
# modified Bessel function of order zero

def _i0e_scalar(x: float) -> float:
    x = abs(x)
    if x <= 20.0:
        q = x * x / 4.0
        term, total, k = 1.0, 1.0, 0
        while term > 1e-17 * total:
            k += 1
            term *= q / (k * k)
            total += term
        return total * math.exp(-x)
    term, total, k = 1.0, 1.0, 0
    while True:
        k += 1
        nxt = term * (2 * k - 1) ** 2 / (8.0 * k * x)
        if nxt > term or nxt < 1e-17:
            break
        term = nxt
        total += term
    return total / math.sqrt(2.0 * math.pi * x)


def bessel_i0e(x):
    """Exponentially scaled I0: exp(-|x|) * I0(x)."""
    arr = np.asarray(x, dtype=float)
    out = np.array([_i0e_scalar(v) for v in arr.ravel()]).reshape(arr.shape)
    return out if arr.ndim else float(out)


def bessel_i0(x):
    """Modified Bessel function I0(x)."""
    arr = np.asarray(x, dtype=float)
    out = bessel_i0e(arr) * np.exp(np.abs(arr))
    return out if arr.ndim else float(out)


# ---------------------------------------------------------------------------
# sine/cosine integrals and Ei on the imaginary axis

def _cisi_scalar(t: float) -> tuple[float, float]:
    if t <= 0:
        raise DomainError("cosine integral needs a positive argument")
    if t > 2.0:
        # modified Lentz evaluation of the continued fraction for E1(i t)
        b = complex(1.0, t)
        c = 1.0 / 1e-300
        d = h = 1.0 / b
        for i in range(2, 100000):
            a = -float((i - 1) ** 2)
            b += 2.0
            d = 1.0 / (a * d + b)
            c = b + a / c
            delta = c * d
            h *= delta
            if abs(delta.real - 1.0) + abs(delta.imag) < 1e-16:
                break
        h *= complex(math.cos(t), -math.sin(t))
        return -h.real, 0.5 * math.pi + h.imag
    t2 = t * t
    si, ci = 0.0, 0.0
    term = t
    k = 0
    while True:
        si_term = term / (2 * k + 1)
        si += si_term
        term *= -t2 / ((2 * k + 2) * (2 * k + 3))
        k += 1
        if abs(si_term) < 1e-18:
            break
    term = 1.0
    k = 1
    while True:
        term *= -t2 / ((2 * k - 1) * (2 * k))
        c_term = term / (2 * k)
        ci += c_term
        k += 1
        if abs(c_term) < 1e-18:
            break
    return EULER_GAMMA + math.log(t) + ci, si


def sici(x):
    """Return (Si(x), Ci(x)) for positive x (arrays allowed)."""
    arr = np.asarray(x, dtype=float)
    pairs = [_cisi_scalar(v) for v in arr.ravel()]
    ci = np.array([p[0] for p in pairs]).reshape(arr.shape)
    si = np.array([p[1] for p in pairs]).reshape(arr.shape)
    if not arr.ndim:
        return float(si), float(ci)
    return si, ci


def expint_ei_imag(x):
    """Exponential integral Ei(i x) for real nonzero x.

    Ei(ix) = Ci(|x|) + i sign(x) (Si(|x|) + pi/2).
    """
    arr = np.asarray(x, dtype=float)
    if np.any(arr == 0) or np.any(~np.isfinite(arr)):
        raise DomainError("Ei(ix) is singular at x = 0")
    si, ci = sici(np.abs(arr))
    out = ci + 1j * np.sign(arr) * (si + 0.5 * math.pi)
    return out if arr.ndim else complex(out)


def as_fraction(s) -> Fraction:
    """Exact rational value of a float or rational input."""
    return s if isinstance(s, Fraction) else Fraction(s)
