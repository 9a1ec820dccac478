"""Garrison-Wong phase distribution.

The GW eigenvector overlaps are <theta|n>_GW = [sin(x/2)/pi]^{1/2} Phi_n(theta)
with x = theta - theta0.  Phi_n is built either from the linear recursion in
the gamma_n(theta) functions or from the equivalent sum over integer
partitions of n.  Grids are offset by half a step so the logarithmic endpoint
singularities at x = 0 and x = 2 pi are never sampled.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import specfun
from .phasedist import PhaseDistribution, theta_grid
from .specfun import DomainError
from .states import FockState

TWO_PI = 2.0 * math.pi


class CacheExhaustedError(ValueError):
    """The state needs Phi_n beyond the cached n_max."""


def _offset(theta, theta0: float) -> np.ndarray:
    x = np.asarray(theta, dtype=float) - theta0
    if np.any(x <= 0) or np.any(x >= TWO_PI):
        raise DomainError("theta must lie strictly inside (theta0, theta0 + 2 pi)")
    return x


def gw_gamma(n: int, theta, theta0: float = 0.0):
    """gamma_n(theta) in closed form; vectorized over theta."""
    if n < 0:
        raise ValueError("n must be non-negative")
    x = _offset(theta, theta0)
    if n == 0:
        out = -0.5 + ((TWO_PI - x) * np.log(TWO_PI - x) + x * np.log(x)) / (4 * math.pi)
        return out if out.ndim else float(out)
    th = theta0 + x
    ei = specfun.expint_ei_imag(n * (TWO_PI - x)) - specfun.expint_ei_imag(-n * x)
    out = (np.exp(1j * n * theta0) * (np.log(TWO_PI / x - 1.0) - 1j * math.pi)
           - np.exp(1j * n * th) * ei) / (TWO_PI * 1j * n)
    return out if np.ndim(out) else complex(out)


def gw_gamma_quad(n: int, theta: float, theta0: float = 0.0) -> complex:
    """gamma_n from its defining integral by adaptive quadrature (n >= 1)."""
    from scipy.integrate import quad

    if n < 1:
        raise ValueError("quadrature oracle covers n >= 1")
    x = float(_offset(theta, theta0))
    # integrate in u = theta' - theta, splitting at the log singularity u = 0
    parts = []
    for f in (math.cos, math.sin):
        def g(u, f=f):
            return math.log(abs(u)) * f(n * u)
        lo = quad(g, -x, 0.0, limit=400, epsabs=1e-13, epsrel=1e-13)[0]
        hi = quad(g, 0.0, TWO_PI - x, limit=400, epsabs=1e-13, epsrel=1e-13)[0]
        parts.append(lo + hi)
    integral = np.exp(1j * n * theta) * complex(parts[0], parts[1])
    return complex(integral / TWO_PI - (np.exp(1j * n * theta0) + np.exp(1j * n * theta)) / (2 * n))


@lru_cache(maxsize=None)
def partitions(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    """Integer partitions of n as ((part, multiplicity), ...) with distinct parts."""
    if n < 0:
        raise ValueError("n must be non-negative")
    out = []

    def walk(rest, largest, acc):
        if rest == 0:
            out.append(tuple(acc))
            return
        for part in range(min(rest, largest), 0, -1):
            for mult in range(rest // part, 0, -1):
                walk(rest - part * mult, part - 1, acc + [(part, mult)])

    walk(n, n, [])
    return tuple(out)


def phi_recursion(gammas: np.ndarray) -> np.ndarray:
    """Phi_0..Phi_nmax from gamma_0..gamma_nmax (rows) by the linear recursion."""
    gammas = np.asarray(gammas, dtype=complex)
    nmax = gammas.shape[0] - 1
    phi = np.empty_like(gammas)
    phi[0] = np.exp(-gammas[0])
    for n in range(1, nmax + 1):
        m = np.arange(n)
        w = (1.0 - m / n)[:, None] if gammas.ndim > 1 else 1.0 - m / n
        phi[n] = -np.sum(w * gammas[n - m] * phi[m], axis=0)
    return phi


def phi_partition(gammas: np.ndarray, n: int) -> np.ndarray:
    """Phi_n as the sum over partitions of n of prod (-1)^m gamma_k^m / m!."""
    gammas = np.asarray(gammas, dtype=complex)
    if n >= gammas.shape[0]:
        raise CacheExhaustedError(f"gamma_{n} not available")
    total = np.zeros_like(gammas[0])
    for parts in partitions(n):
        term = np.ones_like(gammas[0])
        for k, m in parts:
            term = term * (-1) ** m * gammas[k] ** m / math.factorial(m)
        total = total + term
    return np.exp(-gammas[0]) * total


@dataclass(frozen=True)
class GWBasisCache:
    """gamma_n and Phi_n (recursion route) sampled on a half-step grid."""

    theta0: float
    n_max: int
    theta: np.ndarray = field(repr=False)
    gamma: np.ndarray = field(repr=False)
    phi: np.ndarray = field(repr=False)

    @classmethod
    def build(cls, n_max: int, theta0: float = 0.0, M: int = 1024) -> "GWBasisCache":
        if n_max < 0:
            raise ValueError("n_max must be non-negative")
        th = theta_grid(theta0, M, offset=0.5)
        gam = np.empty((n_max + 1, M), dtype=complex)
        gam[0] = gw_gamma(0, th, theta0)
        for n in range(1, n_max + 1):
            gam[n] = gw_gamma(n, th, theta0)
        phi = phi_recursion(gam)
        for arr in (th, gam, phi):
            arr.setflags(write=False)
        return cls(float(theta0), int(n_max), th, gam, phi)

    @property
    def M(self) -> int:
        return self.theta.size

    def overlaps(self, nmax: int | None = None) -> np.ndarray:
        """<theta|n>_GW for n = 0..nmax on the cache grid (rows indexed by n)."""
        nmax = self.n_max if nmax is None else nmax
        if nmax > self.n_max:
            raise CacheExhaustedError(f"need n = {nmax}, cache holds n <= {self.n_max}")
        pref = np.sqrt(np.sin(0.5 * (self.theta - self.theta0)) / math.pi)
        return pref[None, :] * self.phi[: nmax + 1]


def gw_phi(n: int, theta=None, cache: GWBasisCache | None = None, method: str = "recursion",
           theta0: float = 0.0):
    """Phi_n(theta).

    With ``theta=None`` the cached grid samples are used (the cache must reach
    n).  Otherwise gamma_0..gamma_n are evaluated at ``theta`` directly.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    if theta is None:
        if cache is None:
            raise ValueError("need theta or a cache")
        if n > cache.n_max:
            raise CacheExhaustedError(f"need n = {n}, cache holds n <= {cache.n_max}")
        gam = cache.gamma
    else:
        t0 = cache.theta0 if cache is not None else theta0
        gam = np.array([gw_gamma(k, theta, t0) for k in range(n + 1)], dtype=complex)
    if method == "recursion":
        out = phi_recursion(gam[: n + 1])[n] if theta is not None or cache is None else cache.phi[n]
    elif method == "partition":
        out = phi_partition(gam, n)
    else:
        raise ValueError(f"unknown method {method!r}")
    return out if np.ndim(out) else complex(out)


def gw_distribution(state: FockState, theta0: float = 0.0, M: int = 1024,
                    cache: GWBasisCache | None = None) -> PhaseDistribution:
    """P_GW(theta) = |sum_n c_n <theta|n>_GW|^2, renormalized on the grid.

    The integral before renormalization is kept in ``meta['raw_integral']``.
    """
    c = state.amplitudes
    if cache is None:
        cache = GWBasisCache.build(c.size - 1, theta0, M)
    elif abs(cache.theta0 - theta0) > 0 or cache.M != M:
        raise ValueError("cache grid does not match theta0 and M")
    ov = cache.overlaps(c.size - 1)
    p = np.abs(c @ ov) ** 2
    raw = float(np.sum(p) * TWO_PI / M)
    if not raw > 0:
        raise ValueError("GW distribution vanishes on the grid")
    return PhaseDistribution(cache.theta.copy(), p / raw, float(theta0), "GW", None, None, 0.5,
                             {"raw_integral": raw})


def pb_vacuum_flatness(theta0: float = 0.0, M: int = 1024) -> float:
    """max |P_PB(theta) - 1/(2 pi)| for the vacuum on the same grid."""
    from .phasedist import pb_distribution
    from .states import number

    d = pb_distribution(number(0), theta0, M)
    return float(np.max(np.abs(d.values - 1.0 / TWO_PI)))


def interior_ratio(dist: PhaseDistribution, margin: float = 0.1) -> float:
    """max/min of the distribution over the window shrunk by ``margin`` at both ends."""
    x = dist.theta - dist.theta0
    sel = (x > margin) & (x < TWO_PI - margin)
    v = dist.values[sel]
    return float(np.max(v) / np.min(v))


def gw_operator_matrix(n_max: int, theta0: float = 0.0) -> np.ndarray:
    """Truncated number-basis matrix of the GW phase operator (a diagnostic only)."""
    if n_max < 1:
        raise ValueError("n_max must be at least 1")
    n = np.arange(n_max + 1)
    d = n[:, None] - n[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        off = np.exp(1j * d * theta0) / (1j * d)
    return np.where(d == 0, theta0 + math.pi, off)


def gw_commutator_check(state: FockState, theta0: float = 0.0) -> tuple[complex, complex]:
    """(<[Phi_GW, n]>, -i (1 - 2 pi |<theta0|f>|^2)) on the truncated space."""
    c = state.amplitudes
    nm = max(c.size - 1, 1)
    phi = gw_operator_matrix(nm, theta0)
    if c.size < nm + 1:
        c = np.concatenate([c, np.zeros(nm + 1 - c.size)])
    num = np.diag(np.arange(nm + 1, dtype=float))
    comm = phi @ num - num @ phi
    lhs = complex(np.conj(c) @ comm @ c)
    ov = np.sum(c * np.exp(-1j * np.arange(c.size) * theta0)) / math.sqrt(TWO_PI)
    rhs = -1j * (1.0 - TWO_PI * abs(ov) ** 2)
    return lhs, rhs
