"""Truncated Fock-basis states: single mode, two mode and finite dimensional."""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from . import specfun
from .tridiag import tqli

TAIL_EPS = 1e-10
MAX_TRUNCATION = 200_000


class TruncationError(ValueError):
    """The requested truncation leaves more than the allowed probability outside."""


class StateError(ValueError):
    """Invalid state parameters (for example a superposition of zero norm)."""


def default_truncation(nbar: float) -> int:
    """Photon-number cutoff used when none is given: nbar + 10 sqrt(nbar + 1)."""
    return int(math.ceil(nbar + 10.0 * math.sqrt(nbar + 1.0)))


def _check_tail(tail: float, n: int, eps: float) -> None:
    if tail >= eps:
        raise TruncationError(f"truncation N={n} leaves tail mass {tail:.3e} >= {eps:.1e}")


def _grow(make, N: int, eps: float, explicit: bool, tail_fn=None):
    """Evaluate ``make(N)`` and, unless N was given, enlarge N until the tail is below eps.

    ``tail_fn(N)`` gives the discarded mass analytically when 1 - sum|c_n|^2
    would be limited by rounding.
    """
    while True:
        amps = make(N)
        if tail_fn is None:
            tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
        else:
            tail = float(tail_fn(N))
        if explicit or tail < eps or N >= MAX_TRUNCATION:
            break
        N = int(N * 1.5) + 10
    _check_tail(tail, N, eps)
    return amps / np.linalg.norm(amps), tail


def _jsonable(value):
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    if isinstance(value, (np.floating, np.integer)):
        return value.item()
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_jsonable(v) for v in value]
    if isinstance(value, dict):
        return {k: _jsonable(v) for k, v in value.items()}
    return value


def _from_jsonable(value):
    if isinstance(value, dict):
        if set(value) == {"re", "im"}:
            return complex(value["re"], value["im"])
        return {k: _from_jsonable(v) for k, v in value.items()}
    if isinstance(value, list):
        return [_from_jsonable(v) for v in value]
    return value


@dataclass
class FockState:
    """Pure single-mode state sum_n c_n |n>, n = 0..N."""

    amplitudes: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    tail_mass: float = 0.0

    def __post_init__(self):
        self.amplitudes = np.asarray(self.amplitudes, dtype=complex)

    @property
    def truncation(self) -> int:
        return self.amplitudes.size - 1

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amplitudes) ** 2)))

    def mean_photon(self) -> float:
        p = np.abs(self.amplitudes) ** 2
        return float(np.dot(np.arange(p.size), p))

    def density_matrix(self) -> np.ndarray:
        c = self.amplitudes
        return np.outer(c, c.conj())

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": _jsonable(self.params),
            "truncation": self.truncation,
            "tail_mass": self.tail_mass,
            "amplitudes": [[float(a.real), float(a.imag)] for a in self.amplitudes],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, doc: dict) -> "FockState":
        amps = np.array([complex(re, im) for re, im in doc["amplitudes"]])
        if amps.size != doc["truncation"] + 1:
            raise StateError("amplitude list does not match the stated truncation")
        return cls(amps, doc["kind"], _from_jsonable(doc["params"]), doc.get("tail_mass", 0.0))

    @classmethod
    def from_json(cls, text: str) -> "FockState":
        return cls.from_dict(json.loads(text))


@dataclass
class DensityMatrix:
    """Mixed single-mode state given by its Fock-basis density matrix."""

    rho: np.ndarray
    kind: str = "mixed"
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rho = np.asarray(self.rho, dtype=complex)

    @property
    def truncation(self) -> int:
        return self.rho.shape[0] - 1

    def density_matrix(self) -> np.ndarray:
        return self.rho

    def mean_photon(self) -> float:
        return float(np.real(np.dot(np.arange(self.rho.shape[0]), np.diag(self.rho))))


# ---------------------------------------------------------------------------
# single-mode constructors

def _log_poisson_amp(alpha_abs: float, n: np.ndarray) -> np.ndarray:
    from scipy.special import gammaln

    return -0.5 * alpha_abs ** 2 + n * math.log(alpha_abs) - 0.5 * gammaln(n + 1.0)


def number(n: int) -> FockState:
    amps = np.zeros(n + 1, dtype=complex)
    amps[n] = 1.0
    return FockState(amps, "number", {"n": n})


def coherent(alpha0: complex, N: int | None = None, eps: float = TAIL_EPS) -> FockState:
    """Glauber coherent state |alpha0>, normalized after truncation."""
    alpha0 = complex(alpha0)
    a = abs(alpha0)
    explicit = N is not None
    if N is None:
        N = default_truncation(a * a)
    if a == 0.0:
        amps = np.zeros(N + 1, dtype=complex)
        amps[0] = 1.0
        return FockState(amps, "coherent", {"alpha0": alpha0}, 0.0)

    def make(n_cut):
        n = np.arange(n_cut + 1)
        return np.exp(_log_poisson_amp(a, n) + 1j * n * cmath.phase(alpha0))

    from scipy.special import gammainc

    # Poisson mass above N is the regularized lower incomplete gamma P(N + 1, |alpha0|^2)
    amps, tail = _grow(make, N, eps, explicit, lambda n_cut: gammainc(n_cut + 1, a * a))
    return FockState(amps, "coherent", {"alpha0": alpha0}, tail)


def _squeezed_raw(alpha0: complex, r: float, eta: float, nmax: int) -> np.ndarray:
    t = cmath.exp(2j * eta) * math.tanh(r)
    drive = alpha0 + alpha0.conjugate() * t
    amps = np.empty(nmax + 1, dtype=complex)
    amps[0] = 1.0
    if nmax >= 1:
        amps[1] = drive
    for k in range(1, nmax):
        amps[k + 1] = (drive * amps[k] - t * math.sqrt(k) * amps[k - 1]) / math.sqrt(k + 1)
    pref = cmath.exp(-0.5 * (abs(alpha0) ** 2 + alpha0.conjugate() ** 2 * t)) / math.sqrt(math.cosh(r))
    return amps * pref


def squeezed(alpha0: complex = 0.0, r: float = 0.0, eta: float = 0.0,
             N: int | None = None, eps: float = TAIL_EPS) -> FockState:
    """Squeezed coherent state D(alpha0) S(r e^{2i eta}) |0>.

    With eta = 0 the real quadrature is the squeezed one; eta = pi/2 is the
    same as flipping the sign of r.  The amplitudes follow from the Hermite
    recurrence written directly for c_n, so no Hermite values are formed.
    Without an explicit N the cutoff grows until the tail is below ``eps``;
    it scales like log(eps) / log(tanh^2 r) for strong squeezing.
    """
    alpha0 = complex(alpha0)
    explicit = N is not None
    if N is None:
        N = default_truncation(abs(alpha0) ** 2 + math.sinh(r) ** 2)
    amps, tail = _grow(lambda n_cut: _squeezed_raw(alpha0, r, eta, n_cut), N, eps, explicit)
    return FockState(amps, "squeezed", {"alpha0": alpha0, "r": float(r), "eta": float(eta)}, tail)


def displaced_number(alpha0: complex, n0: int, N: int | None = None, eps: float = TAIL_EPS) -> FockState:
    """Displaced number state D(alpha0)|n0>."""
    alpha0 = complex(alpha0)
    a = abs(alpha0)
    explicit = N is not None
    if N is None:
        N = max(default_truncation(a * a + n0), n0)
    if a == 0.0:
        st = number(n0)
        amps = np.zeros(N + 1, dtype=complex)
        amps[: n0 + 1] = st.amplitudes
        return FockState(amps, "displaced_number", {"alpha0": alpha0, "n0": n0})
    theta = cmath.phase(alpha0)
    x = a * a

    def make(n_cut):
        amps = np.empty(n_cut + 1, dtype=complex)
        for n in range(n_cut + 1):
            lo, hi = min(n, n0), max(n, n0)
            logmag = 0.5 * (math.lgamma(lo + 1) - math.lgamma(hi + 1)) + (hi - lo) * math.log(a) - 0.5 * x
            lag = specfun.laguerre_assoc(lo, hi - lo, x)
            sign = -1.0 if (hi - n) % 2 else 1.0
            amps[n] = sign * math.exp(logmag) * lag * cmath.exp(1j * (n - n0) * theta)
        return amps

    amps, tail = _grow(make, N, eps, explicit)
    return FockState(amps, "displaced_number", {"alpha0": alpha0, "n0": int(n0)}, tail)


def coherent_overlap(beta: complex, gamma: complex) -> complex:
    """<beta|gamma> for Glauber states."""
    return cmath.exp(-0.5 * abs(beta) ** 2 - 0.5 * abs(gamma) ** 2 + beta.conjugate() * gamma)


def kitten(alpha0: complex, phis: Sequence[float], coeffs: Sequence[complex],
           N: int | None = None, eps: float = TAIL_EPS) -> FockState:
    """Superposition sum_k c_k |alpha0 e^{i phi_k}> of coherent states on a circle.

    The coefficients are renormalized using the exact coherent-state overlaps;
    the stored ``params['coeffs']`` are the normalized ones.
    """
    alpha0 = complex(alpha0)
    phis = [float(p) for p in phis]
    cs = np.asarray(coeffs, dtype=complex)
    if len(phis) != cs.size:
        raise StateError("phis and coeffs differ in length")
    betas = [alpha0 * cmath.exp(1j * p) for p in phis]
    norm2 = sum(
        (cs[k].conjugate() * cs[l] * coherent_overlap(betas[k], betas[l])).real
        for k in range(cs.size)
        for l in range(cs.size)
    )
    if norm2 < 1e-14:
        raise StateError("superposition has (numerically) zero norm")
    cs = cs / math.sqrt(norm2)
    a = abs(alpha0)
    explicit = N is not None
    if N is None:
        N = default_truncation(a * a)

    def make(n_cut):
        n = np.arange(n_cut + 1)
        if a == 0.0:
            amps = np.zeros(n_cut + 1, dtype=complex)
            amps[0] = cs.sum()
            return amps
        base = np.exp(_log_poisson_amp(a, n) + 1j * n * cmath.phase(alpha0))
        return base * (np.exp(1j * np.outer(n, phis)) @ cs)

    amps, tail = _grow(make, N, eps, explicit)
    return FockState(amps, "kitten", {"alpha0": alpha0, "phis": phis, "coeffs": [complex(c) for c in cs]}, tail)


def cat(alpha0: complex, gamma: float, N: int | None = None, eps: float = TAIL_EPS) -> FockState:
    """Schroedinger cat N_gamma (|alpha0> + e^{i gamma} |-alpha0>)."""
    st = kitten(alpha0, [0.0, math.pi], [1.0, cmath.exp(1j * gamma)], N, eps)
    st.kind = "cat"
    st.params["gamma"] = float(gamma)
    return st


def from_amplitudes(amps: Sequence[complex], kind: str = "custom", params: dict | None = None) -> FockState:
    amps = np.asarray(amps, dtype=complex)
    nrm = np.linalg.norm(amps)
    if nrm == 0:
        raise StateError("zero state")
    return FockState(amps / nrm, kind, dict(params or {}))


# ---------------------------------------------------------------------------
# two-mode states

@dataclass
class FockState2:
    """Sparse pure two-mode state: amplitude ``amp[i]`` on |n1[i], n2[i]>."""

    n1: np.ndarray
    n2: np.ndarray
    amp: np.ndarray
    kind: str = "custom"
    params: dict = field(default_factory=dict)
    tail_mass: float = 0.0

    def __post_init__(self):
        self.n1 = np.asarray(self.n1, dtype=int)
        self.n2 = np.asarray(self.n2, dtype=int)
        self.amp = np.asarray(self.amp, dtype=complex)

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.amp) ** 2)))

    def dense(self) -> np.ndarray:
        out = np.zeros((self.n1.max() + 1, self.n2.max() + 1), dtype=complex)
        np.add.at(out, (self.n1, self.n2), self.amp)
        return out

    def mean_photons(self) -> tuple[float, float]:
        p = np.abs(self.amp) ** 2
        return float(np.dot(self.n1, p)), float(np.dot(self.n2, p))

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "params": _jsonable(self.params),
            "truncation": [int(self.n1.max()), int(self.n2.max())],
            "tail_mass": self.tail_mass,
            "terms": [[int(a), int(b), float(c.real), float(c.imag)] for a, b, c in zip(self.n1, self.n2, self.amp)],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "FockState2":
        t = np.array(doc["terms"], dtype=float).reshape(-1, 4)
        return cls(t[:, 0].astype(int), t[:, 1].astype(int), t[:, 2] + 1j * t[:, 3],
                   doc["kind"], _from_jsonable(doc["params"]), doc.get("tail_mass", 0.0))

    @classmethod
    def from_dense(cls, mat: np.ndarray, kind: str = "custom", params: dict | None = None,
                   tail_mass: float = 0.0) -> "FockState2":
        i, j = np.nonzero(mat)
        return cls(i, j, mat[i, j], kind, dict(params or {}), tail_mass)


def two_mode_squeezed_vacuum(r: float, phi: float = 0.0, N: int | None = None,
                             eps: float = TAIL_EPS) -> FockState2:
    """sum_n (e^{2i phi} tanh r)^n / cosh r |n, n>."""
    t = math.tanh(r)
    if N is None:
        N = default_truncation(math.sinh(r) ** 2)
        if t > 0:
            N = max(N, int(math.ceil(math.log(eps / 10) / (2 * math.log(t)))))
    n = np.arange(N + 1)
    amps = (cmath.exp(2j * phi) * t) ** n / math.cosh(r)
    tail = t ** (2 * (N + 1)) if t > 0 else 0.0
    _check_tail(tail, N, eps)
    amps = amps / np.linalg.norm(amps)
    return FockState2(n, n, amps, "tmsv", {"r": float(r), "phi": float(phi)}, tail)


def pair_coherent(zeta: complex, q: int = 0, N: int | None = None, eps: float = TAIL_EPS) -> FockState2:
    """Pair coherent state N_q sum_n zeta^n / sqrt(n!(n+q)!) |n+q, n>."""
    zeta = complex(zeta)
    z = abs(zeta)
    if N is None:
        N = default_truncation(z)
    if z == 0.0:
        return FockState2([q], [0], [1.0], "pair_coherent", {"zeta": zeta, "q": q})
    n_all = np.arange(max(N, default_truncation(z)) * 2 + 50)
    from scipy.special import gammaln

    logt = 2 * n_all * math.log(z) - gammaln(n_all + 1.0) - gammaln(n_all + q + 1.0)
    shift = logt.max()
    norm2 = np.sum(np.exp(logt - shift))
    n = np.arange(N + 1)
    amps = np.exp(0.5 * (logt[: N + 1] - shift)) / math.sqrt(norm2) * np.exp(1j * n * cmath.phase(zeta))
    tail = max(0.0, 1.0 - float(np.sum(np.abs(amps) ** 2)))
    _check_tail(tail, N, eps)
    amps /= np.linalg.norm(amps)
    return FockState2(n + q, n, amps, "pair_coherent", {"zeta": zeta, "q": int(q)}, tail)


def product_state(a: FockState, b: FockState, kind: str = "product", params: dict | None = None) -> FockState2:
    return FockState2.from_dense(np.outer(a.amplitudes, b.amplitudes), kind, params,
                                 1.0 - (1.0 - a.tail_mass) * (1.0 - b.tail_mass))


# ---------------------------------------------------------------------------
# finite-dimensional coherent states

def fd_coherent_truncated(alpha_bar: complex, sigma: int) -> FockState:
    """Normalized truncation of a Glauber state to the span of |0>..|sigma>."""
    alpha_bar = complex(alpha_bar)
    x = abs(alpha_bar) ** 2
    n = np.arange(sigma + 1)
    if x == 0.0:
        amps = np.zeros(sigma + 1, dtype=complex)
        amps[0] = 1.0
    else:
        from scipy.special import gammaln

        logs = n * math.log(abs(alpha_bar)) - 0.5 * gammaln(n + 1.0)
        amps = np.exp(logs + 1j * n * cmath.phase(alpha_bar))
    amps /= np.linalg.norm(amps)
    return FockState(amps, "fd_truncated", {"alpha": alpha_bar, "sigma": int(sigma)})


def fd_truncated_norm(alpha_bar: complex, sigma: int) -> float:
    """Normalization constant from the Laguerre closed form."""
    x = abs(alpha_bar) ** 2
    val = (-1) ** sigma * specfun.laguerre_assoc(sigma, -sigma - 1, x)
    return 1.0 / math.sqrt(val)


def _fd_generator(alpha: complex, sigma: int) -> np.ndarray:
    k = np.sqrt(np.arange(1, sigma + 1))
    a = np.diag(k, 1)
    return alpha * a.conj().T - alpha.conjugate() * a


def fd_coherent_displacement(alpha: complex, sigma: int, method: str = "expm") -> FockState:
    """exp(alpha a^dag - alpha^* a)|0> with a the (sigma+1)-dimensional annihilator.

    ``method='expm'`` exponentiates the dense generator; ``method='hermite'``
    uses the closed form in terms of the roots of He_{sigma+1}.
    """
    alpha = complex(alpha)
    if method == "expm":
        from scipy.linalg import expm

        amps = expm(_fd_generator(alpha, sigma))[:, 0]
    elif method == "hermite":
        amps = _fd_displacement_hermite(alpha, sigma)
    else:
        raise ValueError(f"unknown method {method!r}")
    return FockState(amps, "fd_displacement", {"alpha": alpha, "sigma": int(sigma), "method": method})


def _fd_displacement_hermite(alpha: complex, sigma: int) -> np.ndarray:
    # roots of He_{sigma+1} are the eigenvalues of the Jacobi matrix with off-diagonals sqrt(k)
    roots = tqli(np.zeros(sigma + 1), np.sqrt(np.arange(1, sigma + 1)), vectors=False)
    a = abs(alpha)
    theta = cmath.phase(alpha)
    he_sigma = specfun.hermite_he(sigma, roots)
    weights = np.exp(1j * roots * a) / he_sigma ** 2
    n = np.arange(sigma + 1)
    # He_n(x_k)/sqrt(n!) via the normalized recurrence
    h = np.empty((sigma + 1, roots.size))
    h[0] = 1.0
    if sigma >= 1:
        h[1] = roots
    for k in range(1, sigma):
        h[k + 1] = (roots * h[k] - math.sqrt(k) * h[k - 1]) / math.sqrt(k + 1)
    scale = math.factorial(sigma) / (sigma + 1)
    sums = h @ weights
    return np.exp(1j * n * (theta - math.pi / 2)) * scale * sums


def glauber_fidelity(state: FockState, alpha: complex) -> float:
    """|<alpha|psi>|^2 with the untruncated Glauber state."""
    n = np.arange(state.amplitudes.size)
    alpha = complex(alpha)
    if alpha == 0:
        return float(abs(state.amplitudes[0]) ** 2)
    glauber = np.exp(_log_poisson_amp(abs(alpha), n) + 1j * n * cmath.phase(alpha))
    return float(abs(np.vdot(glauber, state.amplitudes)) ** 2)


def state_from_spec(doc: dict[str, Any]) -> FockState:
    """Build a single-mode state from a ``{"kind": ..., **params}`` mapping."""
    kind = doc["kind"]
    p = {k: v for k, v in doc.items() if k != "kind"}
    for key in ("alpha0", "alpha", "zeta"):
        if key in p and isinstance(p[key], (list, tuple)):
            p[key] = complex(*p[key])
    builders = {
        "coherent": coherent,
        "squeezed": squeezed,
        "displaced_number": displaced_number,
        "cat": cat,
        "kitten": kitten,
        "number": number,
    }
    if kind not in builders:
        raise StateError(f"unknown state kind {kind!r}")
    return builders[kind](**p)
