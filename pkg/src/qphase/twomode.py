"""Two-mode phase distributions, mod(2 pi) casting, and phase correlations.

Joint Pegg-Barnett distributions are sampled on uniform grids.  The raw
4 pi distribution of the phase sum and difference lives on the rotated
lattice

    theta_+ = theta0_+ + i h,   theta_- = theta0_- - 2 pi + j h,   i, j = 0..2M-1,

with h = 2 pi / M, and carries the Jacobian factor 1/2.  Casting maps it to
the square theta_+ in [theta0_+ + pi, theta0_+ + 3 pi),
theta_- in [theta0_- - pi, theta0_- + pi), i.e. i, j in [M/2, 3M/2).
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from . import phasedist, specfun
from .dynamics1 import kerr_phases
from .phasedist import GridResolutionWarning, PhaseDistribution
from .states import FockState2, coherent

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# containers


@dataclass
class JointPhaseDistribution:
    """Joint distribution sampled on a square grid.

    ``axes`` is "ab" for the individual phases or "pm" for the sum and
    difference; ``casting`` is "none", "raw-4pi" or "cast-2pi".
    """

    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    axes: str
    casting: str
    theta0: tuple[float, float]
    step: float
    meta: dict = field(default_factory=dict)

    def integral(self) -> float:
        return float(np.sum(self.values) * self.step ** 2)

    def max_abs_diff(self, other: "JointPhaseDistribution") -> float:
        return float(np.max(np.abs(self.values - other.values)))

    def window_starts(self) -> tuple[float, float]:
        return float(self.axis1[0]), float(self.axis2[0])


@dataclass
class PhaseCorrelationReport:
    C12: float
    var1: float
    var2: float
    mean1: float
    mean2: float
    var_sum_4pi: float
    var_diff_4pi: float
    var_sum_2pi: float
    var_diff_2pi: float
    closed_form: dict = field(default_factory=dict)

    def identity_residual(self) -> float:
        """|var_sum - (var1 + var2 + 2 C12)| + |var_diff - (var1 + var2 - 2 C12)|."""
        a = self.var_sum_4pi - (self.var1 + self.var2 + 2 * self.C12)
        b = self.var_diff_4pi - (self.var1 + self.var2 - 2 * self.C12)
        return abs(a) + abs(b)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


# ---------------------------------------------------------------------------
# windows and Fourier data


def default_windows(state: FockState2) -> tuple[float, float]:
    """Window starts centred on the analytically preferred phases."""
    p = state.params or {}
    if state.kind == "tmsv":
        c = float(p.get("phi", 0.0))
        return c - math.pi, c - math.pi
    if state.kind == "pair_coherent":
        c = 0.5 * np.angle(complex(p.get("zeta", 0.0)))
        return c - math.pi, c - math.pi
    if state.kind == "kerr2":
        return (float(np.angle(complex(p["alpha1"]))) - math.pi,
                float(np.angle(complex(p["alpha2"]))) - math.pi)
    return -math.pi, -math.pi


def _windows(state, windows):
    return default_windows(state) if windows is None else (float(windows[0]), float(windows[1]))


def joint_coefficients(state: FockState2) -> np.ndarray:
    """A[m1 + N1, m2 + N2] = sum c_{n1+m1, n2+m2} conj(c_{n1, n2})."""
    c = state.dense()
    return fftconvolve(c, np.conj(c[::-1, ::-1]), mode="full")


def _degree(state: FockState2) -> int:
    return int(max(state.n1.max(), state.n2.max()))


def _default_M(state: FockState2) -> int:
    need = 2 * _degree(state) + 2
    return max(64, 1 << (need - 1).bit_length())


# ---------------------------------------------------------------------------
# joint distributions in (theta_a, theta_b)


def amplitude_function(state: FockState2, a, b) -> np.ndarray:
    """f(a, b) = sum c_{n1 n2} e^{-i(n1 a + n2 b)} at arbitrary points."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = state.dense()
    n1 = np.arange(c.shape[0])
    n2 = np.arange(c.shape[1])
    fa = np.exp(-1j * np.multiply.outer(a.ravel(), n1))
    fb = np.exp(-1j * np.multiply.outer(b.ravel(), n2))
    return np.sum((fa @ c) * fb, axis=1).reshape(a.shape)


def _closed_joint(state: FockState2, a, b):
    p = state.params or {}
    if state.kind == "tmsv":
        return tmsv_joint(np.asarray(a) + np.asarray(b) - 2 * p.get("phi", 0.0), p["r"])
    if state.kind == "pair_coherent" and int(p.get("q", 0)) == 0:
        zeta = complex(p["zeta"])
        return pair_coherent_joint_q0(np.asarray(a) + np.asarray(b) - np.angle(zeta), abs(zeta))
    return None


def joint_function(state: FockState2, a, b, method: str = "auto") -> np.ndarray:
    """P(a, b) at arbitrary points, closed form when available."""
    if method in ("auto", "closed"):
        val = _closed_joint(state, a, b)
        if val is not None:
            return val
        if method == "closed":
            raise ValueError(f"no closed-form joint distribution for kind {state.kind!r}")
    return np.abs(amplitude_function(state, a, b)) ** 2 / TWO_PI ** 2


def joint_pb(state: FockState2, windows=None, M: int | None = None,
             method: str = "auto") -> JointPhaseDistribution:
    """Joint Pegg-Barnett distribution P(theta_a, theta_b) on an M x M grid."""
    t0a, t0b = _windows(state, windows)
    if M is None:
        M = _default_M(state)
    deg = _degree(state)
    if M <= deg:
        warnings.warn(f"joint grid M={M} cannot resolve Fock degree {deg}", GridResolutionWarning, stacklevel=2)
    h = TWO_PI / M
    ta = t0a + h * np.arange(M)
    tb = t0b + h * np.arange(M)
    closed = _closed_joint(state, ta[:1], tb[:1]) if method != "fock" else None
    if closed is not None:
        vals = joint_function(state, ta[:, None], tb[None, :], "closed")
    else:
        c = state.dense()
        grid = np.zeros((M, M), dtype=complex)
        n1 = np.arange(c.shape[0])
        n2 = np.arange(c.shape[1])
        phased = c * np.exp(-1j * t0a * n1)[:, None] * np.exp(-1j * t0b * n2)[None, :]
        np.add.at(grid, (n1[:, None] % M, n2[None, :] % M), phased)
        vals = np.abs(np.fft.fft2(grid)) ** 2 / TWO_PI ** 2
    return JointPhaseDistribution(ta, tb, np.asarray(vals, dtype=float), "ab", "none", (t0a, t0b), h,
                                  {"kind": state.kind})


def tmsv_joint(theta_sum, r: float) -> np.ndarray:
    """Two-mode squeezed vacuum joint distribution as a function of theta_a + theta_b - 2 phi."""
    t = math.tanh(r)
    return 1.0 / (TWO_PI ** 2 * math.cosh(r) ** 2 * (1 + t * t - 2 * t * np.cos(theta_sum)))


def pair_coherent_joint_q0(theta_sum, zeta_abs: float) -> np.ndarray:
    """q = 0 pair coherent joint distribution, N_0^2 exp(2|zeta| cos x) / (2 pi)^2."""
    # N_0^2 = 1 / I_0(2|zeta|); use the scaled Bessel function to avoid overflow
    x = 2.0 * zeta_abs
    return np.exp(x * (np.cos(theta_sum) - 1.0)) / (specfun.bessel_i0e(x) * TWO_PI ** 2)


# ---------------------------------------------------------------------------
# sum/difference lattice and casting


def _lattice_indices(M: int):
    i = np.arange(2 * M)
    return i[:, None], i[None, :]


def raw_4pi(state: FockState2, windows=None, M: int | None = None, method: str = "auto") -> JointPhaseDistribution:
    """P_4pi(theta_+, theta_-) = P(a, b) / 2 inside the image of the window square, 0 outside."""
    t0a, t0b = _windows(state, windows)
    if M is None:
        M = _default_M(state)
    if M % 2:
        raise ValueError("the sum/difference lattice needs an even M")
    h = TWO_PI / M
    t0p, t0m = t0a + t0b, t0a - t0b
    tp = t0p + h * np.arange(2 * M)
    tm = t0m - TWO_PI + h * np.arange(2 * M)
    i, j = _lattice_indices(M)
    alpha = i + j - M
    beta = i - j + M
    inside = (alpha >= 0) & (alpha < 2 * M) & (beta >= 0) & (beta < 2 * M)
    closed = _closed_joint(state, np.zeros(1), np.zeros(1)) if method != "fock" else None
    if closed is not None:
        a = 0.5 * (tp[:, None] + tm[None, :])
        b = 0.5 * (tp[:, None] - tm[None, :])
        full = 0.5 * joint_function(state, a, b, "closed")
    else:
        deg = _degree(state)
        if deg >= M:
            warnings.warn(f"lattice M={M} cannot resolve Fock degree {deg}", GridResolutionWarning, stacklevel=2)
        c = state.dense()
        n1 = np.arange(c.shape[0])[:, None]
        n2 = np.arange(c.shape[1])[None, :]
        S = n1 + n2
        D = n1 - n2
        phase = np.exp(-0.5j * (S * t0p + D * (t0m - TWO_PI)))
        grid = np.zeros((2 * M, 2 * M), dtype=complex)
        np.add.at(grid, (S % (2 * M), D % (2 * M)), c * phase)
        full = 0.5 * np.abs(np.fft.fft2(grid)) ** 2 / TWO_PI ** 2
    vals = np.where(inside, full, 0.0)
    return JointPhaseDistribution(tp, tm, vals, "pm", "raw-4pi", (t0p, t0m), h,
                                  {"kind": state.kind, "M": M, "windows": (t0a, t0b)})


def _region_shift(M: int):
    """Index shifts (di, dj) of the region recipe for every point of the target square."""
    idx = np.arange(M // 2, 3 * M // 2)
    u = (idx - M)[:, None]
    v = (idx - M)[None, :]
    diff = u - v
    summ = u + v
    di = np.zeros((M, M), dtype=int)
    dj = np.zeros((M, M), dtype=int)
    right = (diff >= 0) & (summ >= 0)
    left = (diff < 0) & (summ < 0)
    bottom = (diff >= 0) & (summ < 0)
    top = (diff < 0) & (summ >= 0)
    di[right] = -M
    di[left] = M
    dj[bottom] = M
    dj[top] = -M
    return di, dj


def cast_2pi(raw: JointPhaseDistribution) -> JointPhaseDistribution:
    """Region recipe: P_2pi = P_4pi(theta_+, theta_-) + P_4pi(theta_+ + d1, theta_- + d2).

    The target square is split by its two diagonals into four triangles; in
    each one the shift (d1, d2) is one of (-2pi, 0), (2pi, 0), (0, 2pi),
    (0, -2pi), chosen so that the shifted point lies in the support of the
    raw distribution.  Boundary points go to the region listed first.
    """
    if raw.casting != "raw-4pi":
        raise ValueError("cast_2pi expects a raw 4 pi distribution")
    M = raw.values.shape[0] // 2
    sl = slice(M // 2, 3 * M // 2)
    di, dj = _region_shift(M)
    ii, jj = np.meshgrid(np.arange(M // 2, 3 * M // 2), np.arange(M // 2, 3 * M // 2), indexing="ij")
    vals = raw.values[sl, sl] + raw.values[ii + di, jj + dj]
    return JointPhaseDistribution(raw.axis1[sl].copy(), raw.axis2[sl].copy(), vals, "pm", "cast-2pi",
                                  (raw.theta0[0] + math.pi, raw.theta0[1] - math.pi), raw.step,
                                  dict(raw.meta, recipe="regions"))


def _check_shift(shift) -> tuple[float, float]:
    d1, d2 = float(shift[0]), float(shift[1])
    qa = (d1 + d2) / (2 * math.pi)
    qb = (d1 - d2) / (2 * math.pi)
    ok = all(abs(q - round(q)) < 1e-12 and int(round(q)) % 2 == 1 for q in (qa, qb))
    if not ok:
        raise ValueError(
            f"shift {shift} does not map (theta_a, theta_b) to (theta_a + pi, theta_b + pi) mod 2 pi")
    return d1, d2


def cast_2pi_simplified(state: FockState2, windows=None, M: int | None = None,
                        shift=(TWO_PI, 0.0), method: str = "auto") -> JointPhaseDistribution:
    """Fixed-shift casting evaluated straight from the periodic joint distribution.

    With P extended periodically, P_2pi(theta_+, theta_-) =
    [P(a, b) + P(a + d_a, b + d_b)] / 2 where (d_a, d_b) = ((d1 + d2)/2, (d1 - d2)/2)
    must equal (pi, pi) modulo 2 pi.
    """
    d1, d2 = _check_shift(shift)
    t0a, t0b = _windows(state, windows)
    if M is None:
        M = _default_M(state)
    h = TWO_PI / M
    tp = t0a + t0b + math.pi + h * np.arange(M)
    tm = t0a - t0b - math.pi + h * np.arange(M)
    a = 0.5 * (tp[:, None] + tm[None, :])
    b = 0.5 * (tp[:, None] - tm[None, :])
    first = joint_function(state, a, b, method)
    second = joint_function(state, a + 0.5 * (d1 + d2), b + 0.5 * (d1 - d2), method)
    vals = 0.5 * (first + second)
    return JointPhaseDistribution(tp, tm, vals, "pm", "cast-2pi", (tp[0], tm[0]), h,
                                  {"kind": state.kind, "recipe": "simplified", "shift": (d1, d2)})


def marginals(dist: JointPhaseDistribution) -> tuple[PhaseDistribution, PhaseDistribution]:
    """Marginals over each axis.

    A cast-2pi input gives P_2pi(theta_+) and P_2pi(theta_-); a raw-4pi input
    gives the 4 pi wide marginals, returned as samples over their whole
    range (the PhaseDistribution window is then 4 pi wide).
    """
    h = dist.step
    p1 = dist.values.sum(axis=1) * h
    p2 = dist.values.sum(axis=0) * h
    form = {"none": "pb", "raw-4pi": "pb-4pi", "cast-2pi": "pb-2pi"}[dist.casting]
    return (PhaseDistribution(dist.axis1.copy(), p1, float(dist.axis1[0]), form),
            PhaseDistribution(dist.axis2.copy(), p2, float(dist.axis2[0]), form))


def cast_marginal(p4: PhaseDistribution) -> PhaseDistribution:
    """Integrate-then-cast: P_2pi(x) = P_4pi(x) + P_4pi(x -/+ 2 pi) on the central 2 pi."""
    v = p4.values
    M = v.size // 2
    idx = np.arange(M // 2, 3 * M // 2)
    other = np.where(idx >= M, idx - M, idx + M)
    vals = v[idx] + v[other]
    th = p4.theta[idx]
    return PhaseDistribution(th, vals, float(th[0]), "pb-2pi")


def sum_difference_coefficients(state: FockState2) -> tuple[np.ndarray, np.ndarray]:
    """Fourier coefficients (m >= 0) of the cast sum and difference marginals.

    Integrating the cast joint distribution over one variable keeps only the
    components with m1 = m2 (sum) or m1 = -m2 (difference).
    """
    A = joint_coefficients(state)
    N1 = (A.shape[0] - 1) // 2
    N2 = (A.shape[1] - 1) // 2
    K = min(N1, N2)
    m = np.arange(K + 1)
    plus = A[N1 + m, N2 + m]
    minus = A[N1 + m, N2 - m]
    return plus, minus


def sum_marginal(state: FockState2, windows=None, M: int = phasedist.DEFAULT_M) -> PhaseDistribution:
    t0a, t0b = _windows(state, windows)
    plus, _ = sum_difference_coefficients(state)
    th0 = t0a + t0b + math.pi
    vals = phasedist.evaluate_on_grid(plus, th0, M)
    return PhaseDistribution(phasedist.theta_grid(th0, M), vals, th0, "pb-2pi", None, plus)


def difference_marginal(state: FockState2, windows=None, M: int = phasedist.DEFAULT_M) -> PhaseDistribution:
    t0a, t0b = _windows(state, windows)
    _, minus = sum_difference_coefficients(state)
    th0 = t0a - t0b - math.pi
    vals = phasedist.evaluate_on_grid(minus, th0, M)
    return PhaseDistribution(phasedist.theta_grid(th0, M), vals, th0, "pb-2pi", None, minus)


def sparam_difference_distribution(state, s: float, theta0: float = -math.pi,
                                   M: int = phasedist.DEFAULT_M, weights: str = "G") -> PhaseDistribution:
    """mod(2 pi) s-parametrized phase-difference distribution.

    P(theta_-) = (1/2pi) sum_m B_m e^{-i m theta_-} with
    B_m = sum <k+m, n-k-m| rho |k, n-k> G(k+m, k) G(n-k-m, n-k).
    ``state`` is a FockState2 or a four-index array rho[n1, n2, n1', n2'];
    ``weights='one'`` replaces every G by 1 (Pegg-Barnett).
    """
    if isinstance(state, FockState2):
        c = state.dense()
        rho = None
        N1, N2 = c.shape
    else:
        rho = np.asarray(state, dtype=complex)
        c = None
        N1, N2 = rho.shape[0], rho.shape[1]
    nmax = max(N1, N2) - 1
    if weights == "one":
        G = np.ones((nmax + 1, nmax + 1))
    else:
        G = phasedist.g_matrix(nmax, s)
        if s > 0 and not np.all(np.isfinite(G)):
            raise ValueError("weights overflow for this truncation")
    K = min(N1, N2) - 1
    B = np.zeros(K + 1, dtype=complex)
    k1 = np.arange(N1)
    k2 = np.arange(N2)
    for m in range(K + 1):
        lo1, hi1 = 0, N1 - m        # k1 + m < N1
        lo2, hi2 = m, N2            # k2 - m >= 0
        a = slice(lo1, hi1)
        b = slice(lo2, hi2)
        w = G[k1[a] + m, k1[a]][:, None] * G[k2[b] - m, k2[b]][None, :]
        if c is not None:
            top = c[lo1 + m:hi1 + m, lo2 - m:hi2 - m]
            B[m] = np.sum(top * np.conj(c[a, b]) * w)
        else:
            sub = rho[lo1 + m:hi1 + m, lo2 - m:hi2 - m][:, :, a, b]
            diag = np.einsum("ijij->ij", sub)
            B[m] = np.sum(diag * w)
    if s > 0 and weights != "one":
        tail = np.abs(B[-3:]).max() if B.size > 3 else 0.0
        if tail > 1e-8:
            warnings.warn("phase-difference series has not settled within the truncation",
                          phasedist.ConvergenceWarning, stacklevel=2)
    vals = phasedist.evaluate_on_grid(B, theta0, M)
    return PhaseDistribution(phasedist.theta_grid(theta0, M), vals, theta0, "s" if weights != "one" else "pb",
                             s, B)


# ---------------------------------------------------------------------------
# moments on a joint grid


def _window_weights(M: int):
    """Weights W_p(k) = int_0^{2pi} x^p e^{ikx} dx for numpy's FFT frequencies."""
    k = np.fft.fftfreq(M, 1.0 / M)
    w0 = np.zeros(M, dtype=complex)
    w1 = np.zeros(M, dtype=complex)
    w2 = np.zeros(M, dtype=complex)
    w0[0] = TWO_PI
    w1[0] = 2 * math.pi ** 2
    w2[0] = 8 * math.pi ** 3 / 3
    nz = k != 0
    kk = k[nz]
    w1[nz] = -2j * math.pi / kk
    w2[nz] = -4j * math.pi ** 2 / kk + 4 * math.pi / kk ** 2
    if M % 2 == 0:
        ny = M // 2
        w1[ny] = w1[ny].real
        w2[ny] = w2[ny].real
    return w0, w1, w2


def joint_moments(dist: JointPhaseDistribution) -> dict:
    """Means, variances and covariance on a (theta_a, theta_b) grid.

    The samples are replaced by their 2-D trigonometric interpolant and the
    polynomial moments are integrated exactly against it.
    """
    if dist.axes != "ab":
        raise ValueError("joint_moments expects (theta_a, theta_b) axes")
    M1, M2 = dist.values.shape
    a = np.fft.fft2(dist.values) / (M1 * M2)
    a1 = _window_weights(M1)
    a2 = _window_weights(M2)

    def integ(p, q):
        return float(np.real(a1[p] @ a @ a2[q]))

    norm = integ(0, 0)
    ex = integ(1, 0) / norm
    ey = integ(0, 1) / norm
    exx = integ(2, 0) / norm
    eyy = integ(0, 2) / norm
    exy = integ(1, 1) / norm
    t0a, t0b = dist.window_starts()
    return {
        "norm": norm,
        "mean1": t0a + ex,
        "mean2": t0b + ey,
        "var1": exx - ex * ex,
        "var2": eyy - ey * ey,
        "cov": exy - ex * ey,
        "var_sum": (exx + eyy + 2 * exy) - (ex + ey) ** 2,
        "var_diff": (exx + eyy - 2 * exy) - (ex - ey) ** 2,
    }


def correlation_report(state: FockState2, windows=None, M: int | None = None) -> PhaseCorrelationReport:
    """Phase correlation C12 and the variances of sums and differences.

    The 4 pi quantities come from double quadrature of the joint grid; the
    mod(2 pi) variances come from the cast marginals' Fourier series.
    """
    t0a, t0b = _windows(state, windows)
    dist = joint_pb(state, (t0a, t0b), M)
    mom = joint_moments(dist)
    plus, minus = sum_difference_coefficients(state)
    _, vs = phasedist.series_moments(plus, t0a + t0b + math.pi)
    _, vd = phasedist.series_moments(minus, t0a - t0b - math.pi)
    closed = {}
    p = state.params or {}
    if state.kind == "tmsv":
        closed = tmsv_closed_forms(p["r"])
    elif state.kind == "pair_coherent":
        closed = {"C12": pair_coherent_c12(complex(p["zeta"]), int(p.get("q", 0)))}
    return PhaseCorrelationReport(mom["cov"], mom["var1"], mom["var2"], mom["mean1"], mom["mean2"],
                                  mom["var_sum"], mom["var_diff"], vs, vd, closed)


def series_correlation(state: FockState2, windows=None) -> dict:
    """Same quantities as :func:`joint_moments`, summed from the joint Fourier coefficients."""
    t0a, t0b = _windows(state, windows)
    A = joint_coefficients(state)
    N1 = (A.shape[0] - 1) // 2
    N2 = (A.shape[1] - 1) // 2
    m1 = np.arange(-N1, N1 + 1)
    m2 = np.arange(-N2, N2 + 1)
    ca, cb = t0a + math.pi, t0b + math.pi
    At = A * np.exp(-1j * m1 * ca)[:, None] * np.exp(-1j * m2 * cb)[None, :]
    s1 = np.where(m1 % 2, -1.0, 1.0)
    s2 = np.where(m2 % 2, -1.0, 1.0)
    inv1 = np.where(m1 != 0, 1.0 / np.where(m1 != 0, m1, 1), 0.0)
    inv2 = np.where(m2 != 0, 1.0 / np.where(m2 != 0, m2, 1), 0.0)
    ex = float(np.real(np.sum(At[:, N2] * 1j * s1 * inv1)))
    ey = float(np.real(np.sum(At[N1, :] * 1j * s2 * inv2)))
    exx = math.pi ** 2 / 3 + float(np.real(np.sum(At[:, N2] * 2 * s1 * inv1 ** 2)))
    eyy = math.pi ** 2 / 3 + float(np.real(np.sum(At[N1, :] * 2 * s2 * inv2 ** 2)))
    exy = -float(np.real(np.sum(At * (s1 * inv1)[:, None] * (s2 * inv2)[None, :])))
    return {"mean1": ca + ex, "mean2": cb + ey, "var1": exx - ex * ex, "var2": eyy - ey * ey,
            "cov": exy - ex * ey}


def min_variance_window(state: FockState2, M: int = 256) -> tuple[float, float]:
    """Common shift of both windows (on an M-point grid) minimising var(Phi_1 + Phi_2)."""
    t0a, t0b = default_windows(state)
    best = None
    for k in range(M):
        d = -math.pi + TWO_PI * k / M
        mom = series_correlation(state, (t0a + d, t0b + d))
        v = mom["var1"] + mom["var2"] + 2 * mom["cov"]
        if best is None or v < best[0] - 1e-14:
            best = (v, d)
    return best[1], best[0]


# ---------------------------------------------------------------------------
# closed forms


def tmsv_closed_forms(r: float) -> dict:
    """C12, the 4 pi sum variance and the mod(2 pi) sum variance of the two-mode squeezed vacuum."""
    t = math.tanh(r)
    c12 = -2.0 * specfun.dilog(1.0 - t)
    return {
        "C12": c12,
        "var1": math.pi ** 2 / 3,
        "var2": math.pi ** 2 / 3,
        "var_sum_4pi": 2 * math.pi ** 2 / 3 - 4 * specfun.dilog(1.0 - t),
        "var_sum_2pi": math.pi ** 2 / 3 + 4 * specfun.dilog(1.0 + t),
        "var_diff_2pi": math.pi ** 2 / 3,
    }


def tmsv_c12_series(r: float, nmax: int | None = None) -> float:
    """-2 cosh^-2 r sum_{n>k} tanh^{n+k} r / (n-k)^2, summed directly."""
    t = math.tanh(r)
    if nmax is None:
        nmax = 50 if t == 0 else int(math.ceil(math.log(1e-18) / math.log(t))) + 10
    n = np.arange(nmax + 1)
    d = n[:, None] - n[None, :]
    tt = t ** (n[:, None] + n[None, :])
    terms = np.where(d > 0, tt / np.where(d > 0, d, 1) ** 2, 0.0)
    return float(-2.0 / math.cosh(r) ** 2 * terms.sum())


def tmsv_sum_marginal(theta_plus, r: float, phi: float = 0.0) -> np.ndarray:
    t = math.tanh(r)
    return 1.0 / (TWO_PI * math.cosh(r) ** 2 * (1 + t * t - 2 * t * np.cos(np.asarray(theta_plus) - 2 * phi)))


def pair_coherent_weights(zeta: complex, q: int = 0, nmax: int | None = None) -> np.ndarray:
    from .states import pair_coherent

    return np.abs(pair_coherent(zeta, q, nmax).amp)


def pair_coherent_c12(zeta: complex, q: int = 0) -> float:
    """-2 sum_{n>k} b_n b_k / (n-k)^2."""
    b = pair_coherent_weights(zeta, q)
    n = np.arange(b.size)
    d = n[:, None] - n[None, :]
    return float(-2.0 * np.sum(np.where(d > 0, np.outer(b, b) / np.where(d > 0, d, 1) ** 2, 0.0)))


def pair_coherent_sum_marginal(theta_plus, zeta: complex, q: int = 0, s: float | None = None) -> np.ndarray:
    """Cast phase-sum marginal; with ``s`` the s-parametrized version."""
    b = pair_coherent_weights(zeta, q)
    n = np.arange(b.size)
    x = np.asarray(theta_plus, dtype=float) - np.angle(zeta)
    coeffs = np.array([np.dot(b[m:], b[: b.size - m]) for m in range(b.size)], dtype=complex)
    if s is not None:
        for m in range(1, b.size):
            k = n[: b.size - m]
            g1 = np.array([phasedist.g_coefficient(int(kk + m), int(kk), s) for kk in k])
            g2 = np.array([phasedist.g_coefficient(int(kk + m + q), int(kk + q), s) for kk in k])
            coeffs[m] = np.dot(b[m:] * b[: b.size - m], g1 * g2)
    return phasedist.evaluate_series(coeffs, x)


def sg_exponential_expectations(r: float, phi: float = 0.0, mmax: int = 3) -> dict:
    """<exp(i m1 Phi_1) exp(i m2 Phi_2)> and sum-phase trig moments for the TMSV."""
    t = math.tanh(r)
    z = complex(math.cos(2 * phi), math.sin(2 * phi)) * t
    table = {(m1, m2): (z ** m1 if m1 == m2 else 0j) for m1 in range(mmax + 1) for m2 in range(mmax + 1)}
    return {
        "table": table,
        "cos": t * math.cos(2 * phi),
        "sin": t * math.sin(2 * phi),
        "cos2": 0.5 + 0.5 * t * t * math.cos(4 * phi),
        "sin2": 0.5 - 0.5 * t * t * math.cos(4 * phi),
        "var_cos": 0.5 / math.cosh(r) ** 2,
        "var_sin": 0.5 / math.cosh(r) ** 2,
    }


def sg_expectation(state: FockState2, m1: int, m2: int) -> complex:
    """<E1^m1 E2^m2> with the lowering exponentials E = sum_n |n><n+1| on each mode."""
    c = state.dense()
    n1, n2 = c.shape
    if m1 >= n1 or m2 >= n2:
        return 0j
    return complex(np.sum(np.conj(c[: n1 - m1, : n2 - m2]) * c[m1:, m2:]))


# ---------------------------------------------------------------------------
# Kerr two-mode propagation


def kerr_two_mode(alpha1: complex, alpha2: complex, d: float, tau: float,
                  N1: int | None = None, N2: int | None = None) -> FockState2:
    """Coherent input after exp{i tau/2 [n1(n1-1) + n2(n2-1) + 4 d n1 n2]}."""
    a = coherent(alpha1, N1)
    b = coherent(alpha2, N2)
    n1 = np.arange(a.amplitudes.size)
    n2 = np.arange(b.amplitudes.size)
    c = np.outer(a.amplitudes * kerr_phases(n1, tau), b.amplitudes * kerr_phases(n2, tau))
    c = c * np.exp(2j * tau * d * np.outer(n1, n2))
    params = {"alpha1": complex(alpha1), "alpha2": complex(alpha2), "d": float(d), "tau": float(tau)}
    tail = 1.0 - (1.0 - a.tail_mass) * (1.0 - b.tail_mass)
    return FockState2.from_dense(c, "kerr2", params, tail)


def _f_matrix(b_i: np.ndarray, b_j: np.ndarray, d: float, tau: float) -> np.ndarray:
    """f_ij indexed [n_i, n_i', n_j + n_j'] for n_i > n_i'."""
    n = np.arange(b_i.size)
    diff = n[:, None] - n[None, :]
    sgn = np.where(diff % 2, -1.0, 1.0)
    base = np.where(diff > 0, 2 * np.outer(b_i, b_i) * sgn / np.where(diff > 0, diff, 1), 0.0)
    sums = np.arange(2 * b_j.size - 1)
    arg = 0.5 * tau * diff[:, :, None] * ((n[:, None] + n[None, :] - 1)[:, :, None] + 2 * d * sums[None, None, :])
    return base[:, :, None] * np.sin(arg)


def kerr_correlation(alpha1: complex, alpha2: complex, d: float, tau: float,
                     N1: int | None = None, N2: int | None = None) -> float:
    """Series C12(tau) for the Kerr two-mode state, built from the f_ij factors."""
    b1 = np.abs(coherent(alpha1, N1).amplitudes)
    b2 = np.abs(coherent(alpha2, N2).amplitudes)
    f12 = _f_matrix(b1, b2, d, tau)   # [n1, n1', n2 + n2']
    f21 = _f_matrix(b2, b1, d, tau)   # [n2, n2', n1 + n1']
    n1 = np.arange(b1.size)
    n2 = np.arange(b2.size)
    s1 = n1[:, None] + n1[None, :]
    s2 = n2[:, None] + n2[None, :]
    # first term: sum over n1 > n1', n2 > n2' of f12(n1, n1'; n2 + n2') f21(n2, n2'; n1 + n1')
    f12_g = f12[:, :, s2]          # [n1, n1', n2, n2']
    f21_g = f21[:, :, s1]          # [n2, n2', n1, n1']
    first = float(np.einsum("abcd,cdab->", f12_g, f21_g))
    mean1 = float(np.einsum("abc,c->", f12[:, :, 2 * n2], b2 ** 2))
    mean2 = float(np.einsum("abc,c->", f21[:, :, 2 * n1], b1 ** 2))
    return first - mean1 * mean2


def kerr_trajectory(alpha1: complex, alpha2: complex, d: float, taus, N1: int | None = None,
                    N2: int | None = None) -> dict:
    """C12 and the phase-difference variance along a tau sweep (series route)."""
    from concurrent.futures import ThreadPoolExecutor

    from .util import thread_count

    taus = np.asarray(taus, dtype=float)

    def one(tau):
        st = kerr_two_mode(alpha1, alpha2, d, tau, N1, N2)
        mom = series_correlation(st)
        return mom["cov"], mom["var1"] + mom["var2"] - 2 * mom["cov"]

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = list(pool.map(one, taus))
    return {"tau": taus, "C12": np.array([r[0] for r in rows]), "var_diff": np.array([r[1] for r in rows])}


def count_peaks(values: np.ndarray, rel: float = 0.1) -> int:
    """Number of periodic 2-D local maxima above rel * global maximum."""
    v = values
    top = v.max()
    is_max = v > rel * top
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            if di or dj:
                is_max &= v >= np.roll(np.roll(v, di, axis=0), dj, axis=1)
    return int(np.count_nonzero(is_max))
