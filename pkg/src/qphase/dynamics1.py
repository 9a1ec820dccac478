"""Single-mode dynamics: the Kerr (anharmonic) oscillator and the Jaynes-Cummings model."""
from __future__ import annotations

import cmath
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import phasedist, specfun
from .states import DensityMatrix, FockState, coherent, kitten
from .util import thread_count

# ---------------------------------------------------------------------------
# anharmonic oscillator


def kerr_phases(n: np.ndarray, tau: float) -> np.ndarray:
    return np.exp(0.5j * tau * n * (n - 1))


def anharmonic_evolve(state: FockState, tau: float) -> FockState:
    """Evolve under the Kerr Hamiltonian: c_n -> c_n exp(i tau n(n-1)/2)."""
    n = np.arange(state.amplitudes.size)
    params = {"tau": float(tau), "initial_kind": state.kind}
    params.update(state.params)
    return FockState(state.amplitudes * kerr_phases(n, tau), "anharmonic", params, state.tail_mass)


def anharmonic_pb_distribution(state: FockState, tau: float, theta0: float | None = None,
                               M: int = phasedist.DEFAULT_M) -> phasedist.PhaseDistribution:
    return phasedist.pb_distribution(anharmonic_evolve(state, tau), theta0, M)


def partial_phase(state: FockState, tol: float = 1e-10) -> float:
    """theta_ref such that c_n = |c_n| e^{i n theta_ref}; raises if there is none."""
    c = state.amplitudes
    nz = np.nonzero(np.abs(c) > 1e-300)[0]
    if nz.size < 2:
        return 0.0
    k0, k1 = nz[0], nz[1]
    ref = cmath.phase(c[k1] / c[k0]) / (k1 - k0)
    n = np.arange(c.size)
    resid = c * np.exp(-1j * n * ref)
    resid = resid * np.exp(-1j * cmath.phase(resid[k0]))
    if np.max(np.abs(resid.imag)) > tol or np.any(resid.real < -tol):
        raise ValueError("state amplitudes are not of the form |c_n| e^{i n theta}")
    return ref


def anharmonic_mean_variance(state: FockState, tau: float) -> tuple[float, float]:
    """Pegg-Barnett mean phase and variance of the Kerr-evolved state, by series.

    The window is symmetric around the input phase theta_ref, and the input
    must have amplitudes |c_n| e^{i n theta_ref} (coherent states do).
    """
    ref = partial_phase(state)
    b = np.abs(state.amplitudes)
    n = np.arange(b.size)
    d = n[:, None] - n[None, :]
    upper = d > 0
    q = 0.5 * tau * (n * (n - 1))
    arg = q[:, None] - q[None, :]
    bb = np.outer(b, b)
    sgn = np.where(d % 2, -1.0, 1.0)
    dd = np.where(upper, d, 1)
    mean_part = 2.0 * np.sum(np.where(upper, bb * sgn / dd * np.sin(arg), 0.0))
    var = math.pi ** 2 / 3 + 4.0 * np.sum(np.where(upper, bb * sgn / dd ** 2 * np.cos(arg), 0.0))
    return ref - mean_part, float(var - mean_part ** 2)


def anharmonic_quasidist(alpha0: complex, tau: float, s: float, alpha) -> np.ndarray:
    """Closed-form quasiprobability of the Kerr-evolved coherent state."""
    alpha = np.asarray(alpha, dtype=complex)
    a0 = abs(alpha0)
    th0 = cmath.phase(alpha0)
    r = np.abs(alpha)
    th = np.angle(alpha)
    N = int(math.ceil(a0 * a0 + 15 * math.sqrt(a0 * a0 + 1))) + 20
    pref = 2.0 / (1 - s)
    y = 4.0 / (1 - s) * r * a0
    # everything is multiplied by exp(-2(|a0|^2+|a|^2)/(1-s)); fold that into each term
    base = -pref * (a0 * a0 + r * r)
    total = specfun.bessel_i0e(y) * np.exp(base + y)
    q = np.full_like(r, 1 + s)
    with np.errstate(divide="ignore"):
        logr = np.log(r)
    for n in range(N + 1):
        for m in range(n + 1, N + 1):
            lag = specfun.laguerre_homogeneous(n, m - n, 4 * r * r / (1 - s), q)
            logc = ((1 + s) / (1 - s)) * a0 * a0 + (m + n) * math.log(a0) - math.lgamma(m + 1)
            logc += (m - n) * math.log(pref) - n * math.log(1 - s)
            with np.errstate(over="ignore", invalid="ignore"):
                mag = np.exp(base + logc + (m - n) * logr)
            ang = (m - n) * (th0 - th) + 0.5 * tau * (m * (m - 1) - n * (n - 1))
            total = total + 2 * np.nan_to_num(mag * lag) * (-1) ** n * np.cos(ang)
    return pref * total / math.pi


def fractional_revival_coefficients(M: int, N: int) -> tuple[np.ndarray, np.ndarray]:
    """Weights c_k and phases phi_k = pi k / N, k = 1..2N, of the superposition
    reached at tau = 2 pi M / N."""
    if N < 2 or math.gcd(M, N) != 1:
        raise ValueError("fractional revivals need N >= 2 and gcd(M, N) = 1")
    k = np.arange(1, 2 * N + 1)
    n = np.arange(1, 2 * N + 1)
    ph = -1j * math.pi / N * (np.outer(k, n) - M * (n * (n - 1))[None, :])
    c = np.exp(ph).sum(axis=1) / (2 * N)
    return c, math.pi * k / N


def revival_superposition(alpha0: complex, M: int, N: int, nmax: int | None = None) -> FockState:
    c, phis = fractional_revival_coefficients(M, N)
    return kitten(alpha0, phis, c, N=nmax)


def overlap(a: FockState, b: FockState) -> float:
    n = min(a.amplitudes.size, b.amplitudes.size)
    return float(abs(np.vdot(a.amplitudes[:n], b.amplitudes[:n])) ** 2)


def rotational_symmetry_defect(dist: phasedist.PhaseDistribution, N: int) -> float:
    """max |P(theta + 2 pi / N) - P(theta)| on the sampling grid (M divisible by N)."""
    M = dist.values.size
    if M % N:
        raise ValueError("grid size must be a multiple of N")
    return float(np.max(np.abs(np.roll(dist.values, -M // N) - dist.values)))


# ---------------------------------------------------------------------------
# Jaynes-Cummings model


@dataclass
class JCMState:
    """Atom-field state sum_n c_n [cos(sqrt n gt)|n,g> - i sin(sqrt n gt)|n-1,e>]."""

    gt: float
    ground: np.ndarray
    excited: np.ndarray
    field: FockState

    def norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self.ground) ** 2) + np.sum(np.abs(self.excited) ** 2)))

    def reduced_field(self) -> DensityMatrix:
        rho = np.outer(self.ground, self.ground.conj()) + np.outer(self.excited, self.excited.conj())
        return DensityMatrix(rho, "jcm_field", {"gt": self.gt, **self.field.params})

    def mean_photon(self) -> float:
        n = np.arange(self.ground.size)
        return float(np.dot(n, np.abs(self.ground) ** 2) + np.dot(n, np.abs(self.excited) ** 2))

    def inversion(self) -> float:
        return float(np.sum(np.abs(self.excited) ** 2) - np.sum(np.abs(self.ground) ** 2))


def jcm_evolve(alpha0: complex, gt: float, N: int | None = None) -> JCMState:
    """Resonant JCM with the atom in its ground state and a coherent field."""
    field = coherent(alpha0, N)
    return jcm_from_field(field, gt)


def jcm_from_field(field: FockState, gt: float) -> JCMState:
    c = field.amplitudes
    n = np.arange(c.size)
    ang = np.sqrt(n) * gt
    ground = c * np.cos(ang)
    excited = np.zeros_like(c)
    excited[:-1] = -1j * c[1:] * np.sin(ang[1:])
    return JCMState(float(gt), ground, excited, field)


def jcm_fourier_coefficients(state: JCMState) -> np.ndarray:
    return phasedist.fourier_coefficients(state.reduced_field())


def jcm_phase_distribution(state: JCMState, theta0: float | None = None,
                           M: int = phasedist.DEFAULT_M) -> phasedist.PhaseDistribution:
    """Pegg-Barnett distribution of the field after tracing out the atom."""
    if theta0 is None:
        theta0 = phasedist.default_theta0(state.field)
    return phasedist.pb_distribution(state.reduced_field(), theta0, M)


def jcm_counter_rotating(state: JCMState, theta0: float | None = None,
                         M: int = phasedist.DEFAULT_M) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(theta, P_plus, P_minus): the two satellite distributions whose mean is P."""
    if theta0 is None:
        theta0 = phasedist.default_theta0(state.field)
    c = state.field.amplitudes
    n = np.arange(c.size)
    sq = np.sqrt(n)
    out = []
    for sign in (1, -1):
        rotated = FockState(c * np.exp(-1j * sign * sq * state.gt))
        out.append(phasedist.pb_distribution(rotated, theta0, M).values)
    return phasedist.theta_grid(theta0, M), out[0], out[1]


def _jcm_weights(b: np.ndarray):
    n = np.arange(b.size)
    d = n[:, None] - n[None, :]
    upper = d > 0
    sgn = np.where(d % 2, -1.0, 1.0)
    w = np.where(upper, np.outer(b, b) * sgn / np.where(upper, d, 1) ** 2, 0.0)
    return w, np.subtract.outer(np.sqrt(n), np.sqrt(n))


def jcm_phase_variance(state: JCMState) -> float:
    """Series for the phase variance in the window symmetric about arg(alpha0)."""
    partial_phase(state.field)  # the series needs amplitudes |c_n| e^{i n theta0}
    w, dsq = _jcm_weights(np.abs(state.field.amplitudes))
    return float(math.pi ** 2 / 3 + 4 * np.sum(w * np.cos(dsq * state.gt)))


@dataclass
class JCMTrajectory:
    T: np.ndarray
    gt: np.ndarray
    mean_n: np.ndarray
    phase_mean: np.ndarray
    phase_variance: np.ndarray
    envelope: np.ndarray


def jcm_trajectory(alpha0: complex, T: np.ndarray, N: int | None = None) -> JCMTrajectory:
    """Mean photon number and phase moments on a grid of scaled times T = gt / (2 pi |alpha0|)."""
    field = coherent(alpha0, N)
    b = np.abs(field.amplitudes)
    ref = partial_phase(field)
    n = np.arange(b.size)
    sq = np.sqrt(n)
    T = np.asarray(T, dtype=float)
    gt = 2 * math.pi * abs(alpha0) * T
    w, dsq = _jcm_weights(b)
    nbar = float(np.dot(n, b ** 2))

    def one(g):
        return math.pi ** 2 / 3 + 4 * np.sum(w * np.cos(dsq * g))

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        var = np.array(list(pool.map(one, gt)))
    mean_n = nbar - (np.sin(np.outer(gt, sq)) ** 2) @ (b ** 2)
    envelope = 0.5 * np.abs(np.exp(2j * np.outer(gt, sq)) @ (b ** 2))
    # the reduced field keeps a symmetric distribution around arg(alpha0), so the mean is fixed
    phase_mean = np.full(T.size, ref)
    return JCMTrajectory(T, gt, mean_n, phase_mean, var, envelope)


def local_extrema(y: np.ndarray) -> np.ndarray:
    """Indices where the centred finite difference changes sign.

    Each sign change between samples i-1 and i gives one extremum, placed at
    whichever of the two has the smaller centred difference.
    """
    y = np.asarray(y, dtype=float)
    c = np.zeros_like(y)
    c[1:-1] = 0.5 * (y[2:] - y[:-2])
    idx = []
    for i in range(2, y.size - 1):
        if c[i - 1] * c[i] < 0:
            idx.append(i - 1 if abs(c[i - 1]) < abs(c[i]) else i)
        elif c[i] == 0 and c[i - 1] != 0:
            idx.append(i)
    return np.array(sorted(set(idx)), dtype=int)


def revival_centers(traj: JCMTrajectory, count: int = 2) -> list[float]:
    """Scaled times of the first ``count`` revivals of <n>.

    The oscillating part of <n> is (1/2) Re sum_n b_n^2 e^{2i sqrt(n) gt}; the
    revival centre is where its modulus peaks inside [k - 1/2, k + 1/2].
    """
    out = []
    for k in range(1, count + 1):
        mask = (traj.T >= k - 0.5) & (traj.T <= k + 0.5)
        if not np.any(mask):
            break
        i = np.argmax(np.where(mask, traj.envelope, -np.inf))
        out.append(float(traj.T[i]))
    return out


def nearest_variance_extremum(traj: JCMTrajectory, T_target: float) -> float:
    idx = local_extrema(traj.phase_variance)
    if idx.size == 0:
        return math.nan
    Ts = traj.T[idx]
    return float(Ts[np.argmin(np.abs(Ts - T_target))])
