"""Single-mode phase distributions.

Three families live here:

* the Pegg-Barnett distribution, built from the Fock-basis density matrix;
* s-parametrized distributions obtained by integrating a quasiprobability
  over the radial variable, either through the weights G^(s)(m, n) or
  through explicit closed forms for the common states;
* the s -> 1 limit of the weights, which gives a delta-like distribution.

All of them are returned as :class:`PhaseDistribution` samples on a uniform
grid over a 2 pi window starting at ``theta0``.
"""
from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy.signal import fftconvolve
from scipy.special import gammaln

from . import specfun
from .states import DensityMatrix, FockState

DEFAULT_M = 2048
NORM_TOL = 1e-8


class GridResolutionWarning(UserWarning):
    """The sampling grid is too coarse for the structure being sampled."""


class ConvergenceWarning(UserWarning):
    """A weighted Fourier series did not settle within the truncation."""


class ExtrapolationError(ArithmeticError):
    """The s -> 1 extrapolation of the phase coefficients did not stabilise."""


class CoverageError(ValueError):
    """The radial grid stops while the quasiprobability is still significant."""


# ---------------------------------------------------------------------------
# distribution container and moments

@dataclass
class PhaseDistribution:
    theta: np.ndarray
    values: np.ndarray
    theta0: float
    formalism: str
    s: float | None = None
    coefficients: np.ndarray | None = None
    offset: float = 0.0
    meta: dict = field(default_factory=dict)

    @property
    def step(self) -> float:
        return 2.0 * math.pi / self.values.size

    def integral(self) -> float:
        return float(np.sum(self.values) * self.step)

    def check_normalization(self, tol: float = NORM_TOL) -> bool:
        return abs(self.integral() - 1.0) <= tol

    def moments(self) -> tuple[float, float]:
        """Return (int theta P, int theta^2 P) over the window.

        The samples are turned into their trigonometric interpolant, whose
        products with theta and theta^2 are integrated exactly.  For smooth
        periodic densities this is spectrally accurate, unlike a plain
        trapezoid on the non-periodic integrand.
        """
        p = self.values
        m = p.size
        h = self.step
        a = np.fft.rfft(p) / m
        k = np.arange(a.size)
        # samples sit at u_j = (j + offset) h
        a = a * np.exp(-1j * k * self.offset * h)
        i1 = np.zeros(a.size, dtype=complex)
        i2 = np.zeros(a.size, dtype=complex)
        i1[0] = 2 * math.pi ** 2
        i2[0] = 8 * math.pi ** 3 / 3
        kk = k[1:].astype(float)
        i1[1:] = -2j * math.pi / kk
        i2[1:] = -4j * math.pi ** 2 / kk + 4 * math.pi / kk ** 2
        weight = np.full(a.size, 2.0)
        weight[0] = 1.0
        if m % 2 == 0:
            weight[-1] = 1.0
            # the Nyquist term is a pure cosine
            i1[-1] = i1[-1].real
            i2[-1] = i2[-1].real
        first = float(np.real(np.sum(weight * a * i1)))
        second = float(np.real(np.sum(weight * a * i2)))
        t0 = self.theta0
        norm = float(np.real(a[0])) * 2 * math.pi
        return t0 * norm + first, t0 * t0 * norm + 2 * t0 * first + second

    def mean_variance(self) -> tuple[float, float]:
        m1, m2 = self.moments()
        return m1, m2 - m1 * m1

    def max_abs_diff(self, other: "PhaseDistribution") -> float:
        return float(np.max(np.abs(self.values - other.values)))


def theta_grid(theta0: float, M: int, offset: float = 0.0) -> np.ndarray:
    return theta0 + (np.arange(M) + offset) * (2.0 * math.pi / M)


def reference_phase(state) -> float:
    """Natural phase reference of a state (argument of its displacement)."""
    params = getattr(state, "params", {}) or {}
    for key in ("alpha0", "alpha", "beta0"):
        if key in params:
            val = complex(params[key])
            return cmath.phase(val) if val != 0 else 0.0
    return 0.0


def default_theta0(state) -> float:
    return reference_phase(state) - math.pi


# ---------------------------------------------------------------------------
# Fourier coefficients A_m = sum_n rho_{n+m,n} w(n+m,n)

def fourier_coefficients(state, weights=None) -> np.ndarray:
    """Coefficients A_m, m = 0..N, of the phase distribution.

    ``weights`` is either None (Pegg-Barnett) or a callable ``w(m)`` that
    returns the array of weights along the m-th subdiagonal.
    """
    if isinstance(state, FockState):
        c = state.amplitudes
        n = c.size
        if weights is None:
            if n > 4096:
                full = fftconvolve(c, np.conj(c[::-1]))
            else:
                full = np.correlate(c, c, mode="full")
            return full[n - 1:].copy()
        out = np.empty(n, dtype=complex)
        cc = c.conj()
        for m in range(n):
            out[m] = np.dot(c[m:] * weights(m), cc[: n - m])
        return out
    rho = state.density_matrix() if not isinstance(state, np.ndarray) else state
    n = rho.shape[0]
    out = np.empty(n, dtype=complex)
    for m in range(n):
        diag = np.diagonal(rho, offset=-m)
        out[m] = np.sum(diag * weights(m)) if weights is not None else np.sum(diag)
    return out


def evaluate_on_grid(coeffs: np.ndarray, theta0: float, M: int) -> np.ndarray:
    """Sample (1/2pi)(A_0 + 2 Re sum_m A_m e^{-i m theta}) on the uniform grid.

    Frequencies above the grid resolution are folded onto the grid exactly,
    so the samples are exact whatever the truncation.
    """
    m = np.arange(coeffs.size)
    b = coeffs * np.exp(-1j * m * theta0)
    b[0] = 0.5 * b[0]
    folded = np.zeros(M, dtype=complex)
    np.add.at(folded, m % M, b)
    vals = np.fft.fft(folded)
    return np.real(vals) / math.pi


def evaluate_series(coeffs: np.ndarray, theta) -> np.ndarray:
    """Evaluate the phase series at arbitrary angles."""
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    m = np.arange(1, coeffs.size)
    out = np.empty(theta.size)
    chunk = max(1, 2_000_000 // max(m.size, 1))
    for i in range(0, theta.size, chunk):
        t = theta[i:i + chunk]
        out[i:i + chunk] = coeffs[0].real + 2 * np.real(np.exp(-1j * np.outer(t, m)) @ coeffs[1:])
    return out / (2 * math.pi)


def _warn_resolution(degree: int, M: int) -> None:
    if degree >= M // 2:
        warnings.warn(
            f"phase grid with M={M} cannot resolve Fourier components up to {degree}",
            GridResolutionWarning,
            stacklevel=3,
        )


def _significant_degree(coeffs: np.ndarray, tol: float = 1e-14) -> int:
    big = np.nonzero(np.abs(coeffs) > tol)[0]
    return int(big[-1]) if big.size else 0


def pb_distribution(state, theta0: float | None = None, M: int = DEFAULT_M) -> PhaseDistribution:
    """Pegg-Barnett phase distribution on the window [theta0, theta0 + 2 pi)."""
    if theta0 is None:
        theta0 = default_theta0(state)
    coeffs = fourier_coefficients(state)
    _warn_resolution(_significant_degree(coeffs), M)
    vals = evaluate_on_grid(coeffs, theta0, M)
    return PhaseDistribution(theta_grid(theta0, M), vals, theta0, "pb", None, coeffs)


def series_moments(coeffs: np.ndarray, theta0: float) -> tuple[float, float]:
    """(mean, variance) straight from the Fourier coefficients.

    Uses int_{-pi}^{pi} u e^{-imu} du = 2 pi i (-1)^m / m and
    int u^2 e^{-imu} du = 4 pi (-1)^m / m^2 around the window centre.
    """
    c = theta0 + math.pi
    m = np.arange(1, coeffs.size)
    a = coeffs[1:] * np.exp(-1j * m * c)
    sgn = np.where(m % 2, -1.0, 1.0)
    mean = -2.0 * np.sum(sgn * a.imag / m)
    second = math.pi ** 2 / 3 * coeffs[0].real + 4.0 * np.sum(sgn * a.real / m ** 2)
    return float(c + mean), float(second - mean * mean)


def pb_mean_variance(dist: PhaseDistribution) -> tuple[float, float]:
    """Mean and variance of a sampled phase distribution."""
    return dist.mean_variance()


# ---------------------------------------------------------------------------
# G^(s)(m, n) weights

def _check_s(s) -> None:
    if not s < 1:
        raise specfun.DomainError("the weights G^(s) need s < 1; use delta_limit_distribution for s -> 1")


def _g_closed(m: int, n: int, s: float) -> float:
    if m < n:
        m, n = n, m
    if s == -1:
        return math.exp(math.lgamma((m + n) / 2 + 1) - 0.5 * (math.lgamma(m + 1) + math.lgamma(n + 1)))
    if s == 0:
        d = m - n
        if n % 2 == 0:
            lg = math.lgamma(m / 2 + 1) - math.lgamma(n / 2 + 1)
        else:
            lg = math.lgamma((m + 1) / 2) - math.lgamma((n - 1) / 2 + 1)
        return math.exp(d / 2 * math.log(2) + 0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)) + lg)
    raise ValueError("closed forms exist only for s = 0 and s = -1")


def _log_abs_rational(x: Fraction) -> float:
    return math.log(abs(x.numerator)) - math.log(x.denominator)


@lru_cache(maxsize=200_000)
def _g_sum(m: int, n: int, s: Fraction) -> float:
    # the alternating finite sum evaluated with exact integers
    if m < n:
        m, n = n, m
    p, q = s.numerator, s.denominator
    odd = (m + n) % 2
    k0 = (m + n + 1) // 2
    total = 0
    up = q + p
    for l in range(n + 1):
        if odd:
            kk = k0 - l
            g = math.factorial(2 * kk) // math.factorial(kk) * 4 ** l
        else:
            g = math.factorial((m + n) // 2 - l)
        term = up ** l * (2 * q) ** (n - l) * math.comb(n, l) * math.perm(m, l) * g
        total += -term if l % 2 else term
    if total == 0:
        return 0.0
    logv = ((m + n) / 2) * math.log(2 * q / (q - p))
    logv += math.log(abs(total)) - n * math.log(2 * q)
    logv -= 0.5 * (math.lgamma(n + 1) + math.lgamma(m + 1))
    if odd:
        logv += 0.5 * math.log(math.pi) - k0 * math.log(4)
    return math.exp(logv) if total > 0 else -math.exp(logv)


def _g_jacobi(m: int, n: int, s: Fraction) -> float:
    if m < n:
        m, n = n, m
    d = m - n
    jac = specfun.jacobi_homogeneous(n, d, Fraction(-(m + n), 2), s - 3, s + 1)
    if jac == 0:
        return 0.0
    logv = 0.5 * (math.lgamma(n + 1) - math.lgamma(m + 1)) + d / 2 * math.log(2 / (1 - s))
    logv += math.lgamma(d / 2 + 1) + _log_abs_rational(jac) - n * math.log(1 - s)
    sign = (1 if jac > 0 else -1) * (-1) ** n
    return sign * math.exp(logv)


def _g_hyper(m: int, n: int, s: Fraction) -> float:
    if m < n:
        m, n = n, m
    d = m - n
    hyp = specfun.hyp2f1_terminating_homogeneous(n, Fraction(d, 2) + 1, d + 1, Fraction(2), s + 1)
    if hyp == 0:
        return 0.0
    logv = 0.5 * (math.lgamma(m + 1) - math.lgamma(n + 1)) - math.lgamma(d + 1)
    logv += d / 2 * math.log(2 / (1 - s)) + math.lgamma(d / 2 + 1)
    logv += _log_abs_rational(hyp) - n * math.log(1 - s)
    sign = (1 if hyp > 0 else -1) * (-1) ** n
    return sign * math.exp(logv)


def g_coefficient(m: int, n: int, s: float, method: str = "auto") -> float:
    """Weight G^(s)(m, n) relating the Fock density matrix to the s-distribution.

    Methods: ``'sum'`` (double sum over l), ``'jacobi'``, ``'hypergeometric'``,
    ``'closed'`` (only s = 0, -1) and ``'auto'``.  The finite sums are
    evaluated in exact rational arithmetic with the transcendental
    prefactors applied in log space, so large indices neither overflow nor
    lose digits to cancellation.
    """
    _check_s(s)
    if m < 0 or n < 0:
        raise specfun.DomainError("indices must be non-negative")
    if method == "auto":
        method = "closed" if s in (0, -1) else "sum"
    if method == "closed":
        return _g_closed(m, n, float(s))
    fs = specfun.as_fraction(s)
    if method == "sum":
        return _g_sum(m, n, fs)
    if method == "jacobi":
        return _g_jacobi(m, n, fs)
    if method == "hypergeometric":
        return _g_hyper(m, n, fs)
    raise ValueError(f"unknown method {method!r}")


def g_nplus2(n: int, s: float) -> float:
    """Closed form of G^(s)(n+2, n)."""
    _check_s(s)
    lam = (s + 1) / (s - 1)
    return (1 - s) / (2 * math.sqrt((n + 1) * (n + 2))) * (lam ** (n + 2) - 1) + math.sqrt((n + 2) / (n + 1))


def g_subdiagonal(m: int, nmax: int, s: float) -> np.ndarray:
    """Array of G^(s)(n+m, n) for n = 0..nmax."""
    n = np.arange(nmax + 1, dtype=float)
    if s == -1:
        return np.exp(gammaln(n + m / 2 + 1) - 0.5 * (gammaln(n + m + 1) + gammaln(n + 1)))
    if s == 0:
        even = (n % 2 == 0)
        lg = np.where(
            even,
            gammaln((n + m) / 2 + 1) - gammaln(n / 2 + 1),
            gammaln((n + m + 1) / 2) - gammaln((n - 1) / 2 + 1),
        )
        return np.exp(m / 2 * math.log(2) + 0.5 * (gammaln(n + 1) - gammaln(n + m + 1)) + lg)
    fs = specfun.as_fraction(s)
    return np.array([_g_sum(k + m, k, fs) for k in range(nmax + 1)])


def g_matrix(nmax: int, s: float) -> np.ndarray:
    """Symmetric matrix of G^(s)(m, n) for 0 <= m, n <= nmax."""
    _check_s(s)
    out = np.empty((nmax + 1, nmax + 1))
    for d in range(nmax + 1):
        sub = g_subdiagonal(d, nmax - d, s)
        idx = np.arange(nmax + 1 - d)
        out[idx + d, idx] = sub
        out[idx, idx + d] = sub
    return out


# ---------------------------------------------------------------------------
# s-parametrized distributions from the weights

def _weights_for(state, s: float):
    nmax = state.truncation
    cache: dict[int, np.ndarray] = {}

    def w(m: int) -> np.ndarray:
        if m not in cache:
            cache[m] = g_subdiagonal(m, nmax - m, s)
        return cache[m]

    return w


def sparam_coefficients(state, s: float) -> np.ndarray:
    _check_s(s)
    return fourier_coefficients(state, _weights_for(state, s))


def sparam_distribution(state, s: float, theta0: float | None = None, M: int = DEFAULT_M,
                        tol: float = 1e-8) -> PhaseDistribution:
    """s-parametrized phase distribution from the weighted Fourier series.

    For s > 0 the weights grow with the index, and the coefficients near the
    truncation are checked: if they have not decayed below ``tol`` the result
    is flagged ``meta['converged'] = False`` and a warning is issued.
    """
    if theta0 is None:
        theta0 = default_theta0(state)
    coeffs = sparam_coefficients(state, s)
    converged = True
    # for s <= 0 the weights are bounded and the finite series is exact
    tail = coeffs[max(1, int(0.9 * coeffs.size)):]
    if s > 0 and tail.size and np.max(np.abs(tail)) > tol:
        converged = False
        warnings.warn(f"s={s}: Fourier coefficients near the truncation exceed {tol}", ConvergenceWarning,
                      stacklevel=2)
    _warn_resolution(_significant_degree(coeffs), M)
    vals = evaluate_on_grid(coeffs, theta0, M)
    return PhaseDistribution(theta_grid(theta0, M), vals, theta0, "s", float(s), coeffs,
                             meta={"converged": converged})


DELTA_H = (2.0, 1.75, 1.5, 1.25, 1.0, 0.85, 0.7, 0.6, 0.5, 0.4, 0.3, 0.2, 0.1)


def fixed_phase_reference(rho: np.ndarray, tol: float = 1e-8) -> float:
    """theta_ref with rho_{n+m,n} = |rho_{n+m,n}| e^{i m theta_ref}; ValueError otherwise."""
    rho = np.asarray(rho)
    n = rho.shape[0]
    big = np.max(np.abs(rho))
    ref = 0.0
    for m in range(1, n):
        diag = np.diagonal(rho, offset=-m)
        k = int(np.argmax(np.abs(diag)))
        if abs(diag[k]) > tol * big:
            ref = cmath.phase(diag[k]) / m
            break
    for m in range(1, n):
        diag = np.diagonal(rho, offset=-m)
        if np.max(np.abs(diag - np.abs(diag) * cmath.exp(1j * m * ref))) > tol * big:
            raise ValueError("density matrix does not have a single fixed phase; the s -> 1 limit is undefined")
    return ref


def _weighted_sum_with_error(diag: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    """Sum of diag*w and an estimate of its rounding plus truncation error."""
    terms = diag * w
    total = float(np.sum(terms))
    tail = float(abs(np.sum(terms[max(1, int(0.9 * terms.size)):]))) if terms.size > 1 else 0.0
    return total, np.finfo(float).eps * float(np.sum(np.abs(terms))) * terms.size + tail


def _extrapolate_to_zero(h: np.ndarray, y: np.ndarray, order: int) -> tuple[float, float]:
    """Polynomial extrapolation to h = 0 from the smallest-h points, with the
    change between the last two orders as error estimate."""
    idx = np.argsort(h)
    h, y = h[idx], y[idx]
    k = min(order + 1, h.size)
    if k < 2:
        raise ExtrapolationError("fewer than two reliable s values for the s -> 1 extrapolation")
    lo = np.polyval(np.polyfit(h[: k - 1], y[: k - 1], k - 2), 0.0)
    hi = np.polyval(np.polyfit(h[:k], y[:k], k - 1), 0.0)
    return float(hi), float(abs(hi - lo))


def delta_limit_coefficients(state, mmax: int | None = None, method: str = "auto", tol: float = 1e-6,
                             order: int = 4) -> np.ndarray:
    """Coefficients a_m^(1) = lim_{s->1} sum_n |rho_{n+m,n}| G^(s)(n+m, n), m = 0..mmax.

    The weights diverge as s -> 1 and the large terms only cancel in the
    infinite sum, so a truncated Fock state cannot be summed at s near 1.
    ``method='extrapolate'`` evaluates the sums on a ladder of s values,
    keeps those whose rounding and truncation error stays below ``tol``
    and extrapolates in 1 - s; an ``ExtrapolationError`` is raised when the
    extrapolation is not stable to ``tol``.  ``'auto'`` returns the exact
    limit (all ones) for coherent states and extrapolates otherwise.
    """
    rho = state.density_matrix()
    nmax = rho.shape[0] - 1
    if mmax is None:
        mmax = nmax
    fixed_phase_reference(rho)
    kind = getattr(state, "kind", "custom")
    if method == "auto" and kind == "coherent" and complex(state.params["alpha0"]) != 0:
        return np.ones(mmax + 1)
    if method not in ("auto", "extrapolate"):
        raise ValueError(f"unknown method {method!r}")
    out = np.zeros(mmax + 1)
    out[0] = 1.0
    for m in range(1, min(mmax, nmax) + 1):
        diag = np.abs(np.diagonal(rho, offset=-m))
        if not np.any(diag):
            continue
        hs, ys = [], []
        for h in DELTA_H:
            val, err = _weighted_sum_with_error(diag, g_subdiagonal(m, nmax - m, 1.0 - h))
            if err > tol:
                break
            hs.append(h)
            ys.append(val)
        val, err = _extrapolate_to_zero(np.array(hs), np.array(ys), order)
        if err > tol:
            raise ExtrapolationError(f"s -> 1 extrapolation of a_{m} unstable (change {err:.2e} > {tol:.1e})")
        out[m] = val
    return out


def delta_limit_distribution(state, theta0: float | None = None, M: int = DEFAULT_M,
                             mmax: int | None = None, method: str = "auto") -> PhaseDistribution:
    """s -> 1 phase distribution.

    When every a_m^(1) is one the result is the periodic delta at the
    reference phase: it is reported through ``meta['delta_at']`` and sampled
    as a single grid cell of weight one.  Otherwise the extrapolated series
    is sampled.
    """
    if theta0 is None:
        theta0 = default_theta0(state)
    ref = fixed_phase_reference(state.density_matrix())
    a = delta_limit_coefficients(state, mmax, method)
    coeffs = a * np.exp(1j * np.arange(a.size) * ref)
    th = theta_grid(theta0, M)
    if a.size > 1 and np.all(a == 1.0):
        vals = np.zeros(M)
        k = int(round(((ref - theta0) % (2 * math.pi)) * M / (2 * math.pi))) % M
        vals[k] = M / (2 * math.pi)
        return PhaseDistribution(th, vals, theta0, "delta", 1.0, coeffs, meta={"delta_at": ref})
    return PhaseDistribution(th, evaluate_on_grid(coeffs, theta0, M), theta0, "delta", 1.0, coeffs)


# ---------------------------------------------------------------------------
# quasiprobabilities

def _x_scaled(s: float) -> float:
    return math.sqrt(2.0 / (1.0 - s))


def _quasi_coherent(alpha, s, alpha0):
    return 2.0 / (math.pi * (1 - s)) * np.exp(-2.0 * np.abs(alpha - alpha0) ** 2 / (1 - s))


def _quasi_squeezed(alpha, s, alpha0, r, eta):
    mu = math.exp(2 * r)
    a, b = mu - s, 1 / mu - s
    z = (alpha - alpha0) * cmath.exp(-1j * eta)
    return 2.0 / (math.pi * math.sqrt(a * b)) * np.exp(-2 * z.imag ** 2 / a - 2 * z.real ** 2 / b)


def _quasi_displaced_number(alpha, s, alpha0, n0):
    d2 = np.abs(alpha - alpha0) ** 2
    lag = specfun.laguerre_homogeneous(n0, 0, 4 * d2 / (1 - s), np.full_like(d2, 1 + s))
    return 2.0 / (math.pi * (1 - s)) * lag / (s - 1) ** n0 * np.exp(-2 * d2 / (1 - s))


def _quasi_superposition(alpha, s, alpha0, phis, coeffs):
    from .states import coherent_overlap

    betas = [alpha0 * cmath.exp(1j * p) for p in phis]
    out = np.zeros(np.shape(alpha), dtype=complex)
    ac = np.conj(alpha)
    for k, bk in enumerate(betas):
        for l, bl in enumerate(betas):
            pre = coeffs[k] * np.conj(coeffs[l]) * coherent_overlap(bl, bk)
            out += pre * np.exp(-2.0 / (1 - s) * (ac - np.conj(bl)) * (alpha - bk))
    return 2.0 / (math.pi * (1 - s)) * out.real


def _quasi_fock(alpha, s, rho):
    """Generic quasiprobability from the Fock density matrix."""
    alpha = np.asarray(alpha, dtype=complex)
    r = np.abs(alpha)
    theta = np.angle(alpha)
    radial = _radial_components(r.ravel(), s, rho)
    out = radial[0].real.copy()
    for d in range(1, len(radial)):
        out += 2 * np.real(radial[d] * np.exp(-1j * d * theta.ravel()))
    return (out / math.pi).reshape(alpha.shape)


def _radial_components(r: np.ndarray, s: float, rho: np.ndarray) -> list[np.ndarray]:
    """R_d(r) = sum_n rho_{n+d,n} <n|T^(s)(r)|n+d> with the angular factor removed."""
    nmax = rho.shape[0] - 1
    pref = 2.0 / (1 - s)
    p = 4 * r * r / (1 - s)
    q = np.full_like(r, 1 + s)
    gauss = -2 * r * r / (1 - s)
    with np.errstate(divide="ignore"):
        logr = np.log(r)
    out = []
    for d in range(nmax + 1):
        diag = np.diagonal(rho, offset=-d)
        acc = np.zeros(r.size, dtype=complex)
        l0 = np.ones_like(r)
        l1 = (1 + d) * q - p
        for n in range(nmax + 1 - d):
            lag = l0 if n == 0 else l1
            if n >= 2:
                l0, l1 = l1, (((2 * (n - 1) + 1 + d) * q - p) * l1 - (n - 1 + d) * q * q * l0) / n
                lag = l1
            if diag[n] != 0:
                logf = 0.5 * (math.lgamma(n + 1) - math.lgamma(n + d + 1)) + (d + 1) * math.log(pref)
                logf = logf + gauss - n * math.log(1 - s)
                if d:
                    logf = logf + d * logr
                with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
                    val = np.sign(lag) * np.exp(np.log(np.abs(lag)) + logf)
                val = np.nan_to_num(val, nan=0.0)
                acc += diag[n] * val * (-1) ** n
        out.append(acc)
    return out


def quasidist(state, s: float, alpha, method: str = "auto"):
    """s-parametrized quasiprobability W^(s)(alpha) at the given points.

    ``method='closed'`` uses the explicit form for the state kind,
    ``method='fock'`` the generic Fock-basis expansion, ``'auto'`` prefers
    the closed form when one exists.
    """
    _check_s(s)
    alpha = np.asarray(alpha, dtype=complex)
    kind = getattr(state, "kind", "custom")
    params = getattr(state, "params", {})
    closed = kind in ("coherent", "squeezed", "displaced_number", "kitten", "cat")
    if method == "closed" and not closed:
        raise ValueError(f"no closed-form quasiprobability for kind {kind!r}")
    if method in ("closed", "auto") and closed:
        a0 = complex(params["alpha0"])
        if kind == "coherent":
            return _quasi_coherent(alpha, s, a0)
        if kind == "squeezed":
            return _quasi_squeezed(alpha, s, a0, params["r"], params["eta"])
        if kind == "displaced_number":
            return _quasi_displaced_number(alpha, s, a0, params["n0"])
        return _quasi_superposition(alpha, s, a0, params["phis"], params["coeffs"])
    return _quasi_fock(alpha, s, state.density_matrix())


@dataclass
class QuasiGrid:
    """Quasiprobability sampled on Gauss-Legendre radii times uniform angles."""

    r: np.ndarray
    r_weights: np.ndarray
    theta: np.ndarray
    values: np.ndarray
    s: float
    theta0: float


def _auto_rmax(state, s: float) -> float:
    params = getattr(state, "params", {})
    a0 = abs(complex(params.get("alpha0", 0.0)))
    spread = math.sqrt(max(1 - s, 0.1))
    if getattr(state, "kind", "") == "squeezed":
        spread *= math.exp(abs(params["r"]))
    extra = math.sqrt(getattr(state, "truncation", 0) + 1.0)
    return a0 + 6.0 * spread + (0.0 if getattr(state, "kind", "") in ("coherent", "squeezed") else extra)


def quasidist_grid(state, s: float, r_max: float | None = None, n_r: int = 200,
                   M: int = 256, theta0: float | None = None, method: str = "auto") -> QuasiGrid:
    if theta0 is None:
        theta0 = default_theta0(state)
    if r_max is None:
        r_max = _auto_rmax(state, s)
    x, w = np.polynomial.legendre.leggauss(n_r)
    r = 0.5 * r_max * (x + 1)
    w = 0.5 * r_max * w
    th = theta_grid(theta0, M)
    degree = getattr(state, "truncation", 0)
    if M < 2 * degree and getattr(state, "kind", "") not in ("coherent", "squeezed"):
        warnings.warn(f"angular grid M={M} is coarse for Fock degree {degree}", GridResolutionWarning,
                      stacklevel=2)
    alpha = r[:, None] * np.exp(1j * th[None, :])
    vals = quasidist(state, s, alpha, method)
    return QuasiGrid(r, w, th, np.asarray(vals, dtype=float), float(s), theta0)


def radial_integrate(grid: QuasiGrid, coverage_tol: float = 1e-12) -> PhaseDistribution:
    """P(theta) = int_0^inf W(r e^{i theta}) r dr on the stored angular grid."""
    edge = np.max(np.abs(grid.values[-1]))
    peak = np.max(np.abs(grid.values))
    if edge > coverage_tol * peak:
        raise CoverageError(f"quasiprobability at r_max is {edge / peak:.2e} of its peak")
    vals = (grid.r_weights * grid.r) @ grid.values
    return PhaseDistribution(grid.theta.copy(), vals, grid.theta0, "s", grid.s)


# ---------------------------------------------------------------------------
# closed-form phase distributions

def _coherent_shape(x: np.ndarray, x0: float) -> np.ndarray:
    x = np.asarray(x)
    return np.exp(-(x0 * x0 - x * x)) * (np.exp(-x * x) + math.sqrt(math.pi) * x * (1 + specfun.erf(x))) / (2 * math.pi)


def _coherent_shape_complex(x: np.ndarray, x0sq) -> np.ndarray:
    return np.exp(-(x0sq - x * x)) * (np.exp(-x * x) + math.sqrt(math.pi) * x * (1 + specfun.erf(x))) / (2 * math.pi)


def _phase_coherent(theta, s, alpha0):
    a = abs(alpha0)
    x0 = _x_scaled(s) * a
    x = x0 * np.cos(theta - cmath.phase(alpha0))
    return _coherent_shape(x, x0)


def _aligned_rotation(alpha0: complex, eta: float) -> float:
    if alpha0 == 0:
        return eta
    ph = cmath.phase(alpha0)
    diff = (ph - eta) / math.pi
    if abs(diff - round(diff)) > 1e-12:
        raise ValueError("closed-form squeezed phase distribution needs arg(alpha0) = eta (mod pi)")
    return ph


def _phase_squeezed(theta, s, alpha0, r, eta):
    rot = _aligned_rotation(complex(alpha0), eta)
    amp = complex(alpha0) * cmath.exp(-1j * rot)
    amp = amp.real
    mu = math.exp(2 * r)
    a, b = mu - s, 1 / mu - s
    t = theta - rot
    c, sn = np.cos(t), np.sin(t)
    den = a * c * c + b * sn * sn
    x0 = math.sqrt(2 / b) * amp
    x = math.sqrt(2 / b) * amp * math.sqrt(a) * c / np.sqrt(den)
    return math.sqrt(a * b) / den * _coherent_shape(x, x0)


def _phase_superposition(theta, s, alpha0, phis, coeffs):
    a = abs(alpha0)
    th0 = cmath.phase(alpha0)
    x0sq = 2 / (1 - s) * a * a
    out = np.zeros(np.shape(theta), dtype=complex)
    for k, pk in enumerate(phis):
        for l, pl in enumerate(phis):
            kappa = 0.5 * (1 - s) + 0.5 * (1 + s) * cmath.exp(1j * (pk - pl))
            x = 0.5 * _x_scaled(s) * a * (np.exp(1j * (pk + th0 - theta)) + np.exp(-1j * (pl + th0 - theta)))
            out += coeffs[k] * np.conj(coeffs[l]) * _coherent_shape_complex(x, x0sq * kappa)
    return out.real


def _q_poly(j: int, x: np.ndarray) -> np.ndarray:
    x2 = x * x
    first = sum(x2 ** k / math.factorial(k) for k in range(j + 1))
    second = sum(4 ** k * math.factorial(k) / math.factorial(2 * k) * x2 ** k for k in range(1, j + 1))
    return 4 ** j * math.factorial(j) ** 2 / math.factorial(2 * j) * first - second


def _phase_displaced_number(theta, s, alpha0, n0):
    a = abs(alpha0)
    th0 = cmath.phase(alpha0)
    x0 = _x_scaled(s) * a
    x = x0 * np.cos(theta - th0)
    base = np.exp(-(x0 * x0 - x * x))
    erfpart = math.sqrt(math.pi) * x * (1 + specfun.erf(x))
    total = np.zeros(np.shape(theta))
    for k in range(n0 + 1):
        outer = (2 / (1 - s)) ** n0 * (-1) ** (n0 - k) / math.factorial(k) * ((1 + s) / 2) ** (n0 - k) * math.comb(n0, k)
        if outer == 0:
            continue
        inner = np.zeros(np.shape(theta))
        for l in range(k + 1):
            j = k - l
            np_j = base * (np.exp(-x * x) * _q_poly(j, x) + erfpart) / (2 * math.pi)
            inner += math.comb(k, l) * math.factorial(2 * j) / (4 ** j * math.factorial(j)) * (x0 * x0 - x * x) ** l * np_j
        total += outer * inner
    return total


def closed_form_phase(kind: str, s: float, params: dict, theta) -> np.ndarray:
    """Radially integrated closed forms for coherent, squeezed, displaced number
    and coherent-superposition states."""
    _check_s(s)
    theta = np.asarray(theta, dtype=float)
    if kind == "coherent":
        return _phase_coherent(theta, s, complex(params["alpha0"]))
    if kind == "squeezed":
        return _phase_squeezed(theta, s, complex(params["alpha0"]), params["r"], params.get("eta", 0.0))
    if kind == "displaced_number":
        return _phase_displaced_number(theta, s, complex(params["alpha0"]), int(params["n0"]))
    if kind in ("kitten", "cat"):
        return _phase_superposition(theta, s, complex(params["alpha0"]), params["phis"], params["coeffs"])
    raise ValueError(f"no closed-form phase distribution for kind {kind!r}")


def closed_form_distribution(state, s: float, theta0: float | None = None, M: int = DEFAULT_M) -> PhaseDistribution:
    if theta0 is None:
        theta0 = default_theta0(state)
    th = theta_grid(theta0, M)
    return PhaseDistribution(th, closed_form_phase(state.kind, s, state.params, th), theta0, "s", float(s))


def coherent_phase_asymptotic(alpha0: complex, theta) -> np.ndarray:
    """Large-amplitude Wigner phase distribution of a coherent state.

    Valid on |theta - arg alpha0| <= pi/2 and set to zero elsewhere.
    """
    t = np.asarray(theta, dtype=float) - cmath.phase(alpha0)
    t = (t + math.pi) % (2 * math.pi) - math.pi
    a = abs(alpha0)
    val = math.sqrt(2 / math.pi) * a * np.cos(t) * np.exp(-2 * a * a * np.sin(t) ** 2)
    return np.where(np.abs(t) <= math.pi / 2, val, 0.0)


def squeezed_vacuum_phase(theta, r: float, s: float) -> np.ndarray:
    mu = math.exp(2 * r)
    a, b = mu - s, 1 / mu - s
    c, sn = np.cos(theta), np.sin(theta)
    return math.sqrt(a * b) / (2 * math.pi * (a * c * c + b * sn * sn))


def squeezed_vacuum_peak(r: float, s: float) -> float:
    """Height of the s-distribution of squeezed vacuum at theta = +-pi/2."""
    mu = math.exp(2 * r)
    return math.sqrt((mu - s) / (1 / mu - s)) / (2 * math.pi)
