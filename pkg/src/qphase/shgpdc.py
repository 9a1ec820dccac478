"""Second-harmonic generation and down-conversion with a quantized pump.

The interaction g(b^+ a^2 + b a^+2) conserves n_a + 2 n_b, so the field space
splits into finite blocks.  Each block is a real symmetric tridiagonal matrix;
it is diagonalized once with the implicit-QL solver and cached.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import phasedist, twomode
from .phasedist import PhaseDistribution
from .states import FockState, FockState2, coherent
from .tridiag import tqli
from .util import thread_count

SHG = "shg"
PDC = "pdc"


@dataclass(frozen=True)
class HamiltonianBlock:
    """One conserved-excitation block, in units of hbar g.

    SHG: basis |n - 2k, k>, k = 0..[n/2].  PDC: basis |2k, n - k>, k = 0..n.
    ``U[:, i]`` is the eigenvector of ``eigenvalues[i]`` (ascending).
    """

    process: str
    n: int
    offdiag: np.ndarray
    eigenvalues: np.ndarray
    U: np.ndarray

    @property
    def dim(self) -> int:
        return self.eigenvalues.size

    def matrix(self) -> np.ndarray:
        return np.diag(self.offdiag, 1) + np.diag(self.offdiag, -1)

    def basis(self) -> list[tuple[int, int]]:
        if self.process == SHG:
            return [(self.n - 2 * k, k) for k in range(self.dim)]
        return [(2 * k, self.n - k) for k in range(self.dim)]

    def symmetry_defect(self) -> float:
        """max |lambda_i + lambda_{D-1-i}| over the ascending spectrum."""
        lam = self.eigenvalues
        return float(np.max(np.abs(lam + lam[::-1])))

    def pairing_defect(self) -> float:
        """max |U_ki U_0i - (-1)^k U_k,D-1-i U_0,D-1-i|."""
        U = self.U
        k = np.arange(self.dim)[:, None]
        left = U * U[0][None, :]
        right = np.where(k % 2, -1.0, 1.0) * (U[:, ::-1] * U[0, ::-1][None, :])
        return float(np.max(np.abs(left - right)))

    def orthogonality_defect(self) -> float:
        return float(np.max(np.abs(self.U.T @ self.U - np.eye(self.dim))))


def block_offdiag(n: int, process: str = SHG) -> np.ndarray:
    if n < 0:
        raise ValueError("block label must be non-negative")
    if process == SHG:
        k = np.arange(n // 2)
        return np.sqrt((k + 1.0) * (n - 2 * k) * (n - 2 * k - 1))
    if process == PDC:
        k = np.arange(n)
        return np.sqrt((2 * k + 1.0) * (2 * k + 2) * (n - k))
    raise ValueError(f"unknown process {process!r}")


@lru_cache(maxsize=None)
def build_block(n: int, process: str = SHG) -> HamiltonianBlock:
    off = block_offdiag(n, process)
    dim = off.size + 1
    lam, U = tqli(np.zeros(dim), off)
    # fix the sign of each eigenvector so that U_0i >= 0
    sgn = np.where(U[0] < 0, -1.0, 1.0)
    U = U * sgn[None, :]
    for arr in (off, lam, U):
        arr.setflags(write=False)
    return HamiltonianBlock(process, n, off, lam, U)


def evolution_coeffs(block: HamiltonianBlock, gt: float) -> np.ndarray:
    """d_k(t) = sum_i exp(-i gt lambda_i) U_ki U_0i."""
    return (block.U * np.exp(-1j * gt * block.eigenvalues)[None, :]) @ block.U[0]


@dataclass
class EvolvedTwoModeField:
    """Field after time gt from a populated input mode and an empty partner.

    For SHG ``c`` is the input of mode a and block n holds |n - 2k, k>; for
    PDC ``c`` is the input of mode b and block n holds |2k, n - k>.
    """

    process: str
    c: np.ndarray
    gt: float
    d: list
    phi_a: float
    phi_b: float

    def to_state(self) -> FockState2:
        rows, cols, amps = [], [], []
        for n, (cn, dn) in enumerate(zip(self.c, self.d)):
            k = np.arange(dn.size)
            if self.process == SHG:
                rows.append(n - 2 * k)
                cols.append(k)
            else:
                rows.append(2 * k)
                cols.append(n - k)
            amps.append(cn * dn)
        return FockState2(np.concatenate(rows), np.concatenate(cols), np.concatenate(amps), self.process,
                          {"gt": self.gt, "phi_a": self.phi_a, "phi_b": self.phi_b})

    def windows(self) -> tuple[float, float]:
        return self.phi_a - math.pi, self.phi_b - math.pi

    def unitarity_defect(self) -> float:
        return float(max(abs(np.sum(np.abs(dn) ** 2) - 1.0) for dn in self.d))

    def parity_defect(self) -> float:
        """max of |Re d_k| over odd k and |Im d_k| over even k."""
        worst = 0.0
        for dn in self.d:
            k = np.arange(dn.size)
            worst = max(worst, float(np.max(np.where(k % 2, np.abs(dn.real), np.abs(dn.imag)))))
        return worst

    def mean_photons(self) -> tuple[float, float]:
        return self.to_state().mean_photons()

    def excitation(self) -> float:
        """<n_a> + 2 <n_b>."""
        na, nb = self.mean_photons()
        return na + 2 * nb


def _blocks(labels, process):
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(lambda n: build_block(n, process), labels))


def _evolve(process: str, inp: FockState, gt: float, phi_a: float, phi_b: float) -> EvolvedTwoModeField:
    c = inp.amplitudes
    blocks = _blocks(range(c.size), process)
    d = [evolution_coeffs(blk, gt) for blk in blocks]
    return EvolvedTwoModeField(process, c, float(gt), d, phi_a, phi_b)


def shg_evolve(alpha0: complex, gt: float, N: int | None = None,
               phase_relation: float = 0.5 * math.pi) -> EvolvedTwoModeField:
    """Coherent fundamental |alpha0> and vacuum harmonic, evolved for time gt.

    The phase windows are centred on phi_a = arg alpha0 and phi_b with
    2 phi_a - phi_b = ``phase_relation``.
    """
    inp = coherent(alpha0, N)
    phi_a = float(np.angle(alpha0)) if alpha0 != 0 else 0.0
    return _evolve(SHG, inp, gt, phi_a, 2 * phi_a - phase_relation)


def pdc_evolve(beta0: complex, gt: float, N: int | None = None,
               phase_relation: float = 0.5 * math.pi) -> EvolvedTwoModeField:
    """Coherent pump |beta0> and vacuum signal, evolved for time gt."""
    inp = coherent(beta0, N)
    phi_b = float(np.angle(beta0)) if beta0 != 0 else 0.0
    return _evolve(PDC, inp, gt, 0.5 * (phi_b + phase_relation), phi_b)


def evolve_from(process: str, inp: FockState, gt: float, phi_a: float = 0.0,
                phi_b: float | None = None) -> EvolvedTwoModeField:
    """Generic input amplitudes for the populated mode."""
    if phi_b is None:
        phi_b = 2 * phi_a - 0.5 * math.pi
    return _evolve(process, inp, gt, phi_a, phi_b)


def joint_phase(field: EvolvedTwoModeField, windows=None, M: int | None = None) -> twomode.JointPhaseDistribution:
    return twomode.joint_pb(field.to_state(), field.windows() if windows is None else windows, M)


def pdc_variances(field: EvolvedTwoModeField) -> tuple[float, float]:
    """Signal and pump phase variances summed block by block."""
    if field.process != PDC:
        raise ValueError("pdc_variances needs a down-conversion field")
    b = np.abs(field.c)
    rel = 2 * field.phi_a - field.phi_b
    va = math.pi ** 2 / 3
    vb = math.pi ** 2 / 3
    N = b.size
    for n in range(N):
        for n2 in range(n):
            m = n - n2
            dn, dn2 = field.d[n], field.d[n2]
            k = np.arange(n2 + 1)
            sa = np.dot(dn[k + m], np.conj(dn2[k]))
            sb = np.dot(dn[k], np.conj(dn2[k]))
            pre = b[n] * b[n2] / m ** 2
            va += pre * float(np.real(np.exp(-1j * m * rel) * sa))
            vb += 4 * pre * (-1) ** m * float(np.real(sb))
    return va, vb


def marginal_coefficients(field: EvolvedTwoModeField) -> tuple[np.ndarray, np.ndarray]:
    """Fourier coefficients of the reduced phase distributions of modes a and b."""
    c = field.to_state().dense()
    na, nb = c.shape
    ca = np.array([np.sum(c[m:, :] * np.conj(c[: na - m, :])) for m in range(na)])
    cb = np.array([np.sum(c[:, m:] * np.conj(c[:, : nb - m])) for m in range(nb)])
    return ca, cb


def marginals(field: EvolvedTwoModeField, M: int = phasedist.DEFAULT_M) -> tuple[PhaseDistribution, PhaseDistribution]:
    ca, cb = marginal_coefficients(field)
    t0a, t0b = field.windows()
    pa = phasedist.evaluate_on_grid(ca, t0a, M)
    pb = phasedist.evaluate_on_grid(cb, t0b, M)
    return (PhaseDistribution(phasedist.theta_grid(t0a, M), pa, t0a, "pb", None, ca),
            PhaseDistribution(phasedist.theta_grid(t0b, M), pb, t0b, "pb", None, cb))


def phase_variances(field: EvolvedTwoModeField) -> tuple[float, float]:
    """(var_a, var_b) by series; PDC uses its block sums, SHG the marginal series."""
    if field.process == PDC:
        return pdc_variances(field)
    ca, cb = marginal_coefficients(field)
    t0a, t0b = field.windows()
    return phasedist.series_moments(ca, t0a)[1], phasedist.series_moments(cb, t0b)[1]


def ideal_squeezed_variance(r: float) -> float:
    """Pegg-Barnett variance of the squeezed vacuum in the window centred between its peaks."""
    from .states import squeezed

    st = squeezed(0.0, r, 0.0)
    return phasedist.series_moments(phasedist.fourier_coefficients(st), -math.pi)[1]


def variance_trajectory(process: str, amp: complex, gts, N: int | None = None) -> dict:
    gts = np.asarray(gts, dtype=float)
    evolve = shg_evolve if process == SHG else pdc_evolve

    def one(gt):
        f = evolve(amp, gt, N)
        va, vb = phase_variances(f)
        na, nb = f.mean_photons()
        return va, vb, na, nb

    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        rows = np.array(list(pool.map(one, gts)))
    return {"gt": gts, "var_a": rows[:, 0], "var_b": rows[:, 1], "mean_a": rows[:, 2], "mean_b": rows[:, 3]}


def block_spectrum_rows(n: int, process: str = SHG) -> list[tuple[int, float, float]]:
    """(i, lambda_i, U_0i) rows for CSV dumps."""
    blk = build_block(n, process)
    return [(i, float(blk.eigenvalues[i]), float(blk.U[0, i])) for i in range(blk.dim)]
