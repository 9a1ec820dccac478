import math

import numpy as np
import pytest
import scipy.linalg as sl
from hypothesis import given, settings
from hypothesis import strategies as st

from qphase import phasedist as pd
from qphase import shgpdc as sp
from qphase import states


def _dense_hamiltonian(process, nmax):
    """b^+ a^2 + b a^+2 on the states reachable from |n, 0> (SHG) or |0, n> (PDC) with n <= nmax."""
    if process == sp.SHG:
        basis = [(na, nb) for na in range(nmax + 1) for nb in range(nmax + 1) if na + 2 * nb <= nmax]
    else:
        basis = [(na, nb) for na in range(0, 2 * nmax + 1, 2) for nb in range(nmax + 1) if na // 2 + nb <= nmax]
    index = {b: i for i, b in enumerate(basis)}
    H = np.zeros((len(basis), len(basis)))
    for (na, nb), i in index.items():
        # b^+ a^2 |na, nb> = sqrt(na (na-1) (nb+1)) |na-2, nb+1>
        tgt = (na - 2, nb + 1)
        if na >= 2 and tgt in index:
            v = math.sqrt(na * (na - 1) * (nb + 1))
            H[index[tgt], i] += v
            H[i, index[tgt]] += v
    return basis, H


@pytest.mark.parametrize("process", [sp.SHG, sp.PDC])
@pytest.mark.parametrize("n", [0, 1, 2, 5, 12, 31])
def test_block_spectrum_vs_eigh(process, n):
    blk = sp.build_block(n, process)
    np.testing.assert_allclose(blk.eigenvalues, np.linalg.eigvalsh(blk.matrix()), atol=1e-10 * max(1, n ** 1.5))
    assert blk.orthogonality_defect() < 1e-12
    assert blk.symmetry_defect() < 1e-10 * max(1, n ** 1.5)
    assert blk.pairing_defect() < 1e-12
    assert np.all(blk.U[0] >= 0)


def test_block_offdiag_values():
    np.testing.assert_allclose(sp.block_offdiag(4, sp.SHG), [math.sqrt(12), math.sqrt(4)])
    np.testing.assert_allclose(sp.block_offdiag(2, sp.PDC), [math.sqrt(4), math.sqrt(12)])
    with pytest.raises(ValueError):
        sp.block_offdiag(-1)
    with pytest.raises(ValueError):
        sp.block_offdiag(3, "thg")


def test_blocks_are_cached_and_read_only():
    a = sp.build_block(9, sp.SHG)
    assert sp.build_block(9, sp.SHG) is a
    with pytest.raises(ValueError):
        a.U[0, 0] = 1.0


@pytest.mark.parametrize("process", [sp.SHG, sp.PDC])
def test_evolution_vs_dense_exponential(process):
    inp = states.coherent(1.1 + 0.4j, N=14)
    gt = 0.37
    basis, H = _dense_hamiltonian(process, 14)
    psi0 = np.zeros(len(basis), dtype=complex)
    for i, (na, nb) in enumerate(basis):
        n = na if process == sp.SHG else nb
        if (process == sp.SHG and nb == 0) or (process == sp.PDC and na == 0):
            psi0[i] = inp.amplitudes[n]
    psi = sl.expm(-1j * gt * H) @ psi0
    dense = sp.evolve_from(process, inp, gt).to_state().dense()
    for i, (na, nb) in enumerate(basis):
        got = dense[na, nb] if na < dense.shape[0] and nb < dense.shape[1] else 0.0
        assert abs(got - psi[i]) < 1e-12


@given(st.floats(0.3, 3.0), st.floats(0.0, 3.0))
@settings(max_examples=20)
def test_shg_invariants(a, gt):
    f = sp.shg_evolve(a, gt)
    assert f.unitarity_defect() < 1e-12
    assert f.parity_defect() < 1e-12
    assert f.excitation() == pytest.approx(a * a, abs=1e-8)


@given(st.floats(0.3, 2.5), st.floats(0.0, 2.0))
@settings(max_examples=20)
def test_pdc_invariants(b, gt):
    f = sp.pdc_evolve(b, gt)
    assert f.unitarity_defect() < 1e-12
    assert f.parity_defect() < 1e-12
    assert f.excitation() == pytest.approx(2 * b * b, abs=1e-8)


def test_shg_short_time_harmonic_growth():
    a, gt = 2.0, 1e-3
    _, nb = sp.shg_evolve(a, gt).mean_photons()
    assert nb == pytest.approx(gt ** 2 * a ** 4, rel=1e-4)


def test_pdc_block_variances_vs_marginal_series():
    f = sp.pdc_evolve(1.5j, 0.3)
    va, vb = sp.pdc_variances(f)
    ca, cb = sp.marginal_coefficients(f)
    t0a, t0b = f.windows()
    assert va == pytest.approx(pd.series_moments(ca, t0a)[1], abs=1e-10)
    assert vb == pytest.approx(pd.series_moments(cb, t0b)[1], abs=1e-10)


def test_pdc_variances_needs_pdc():
    with pytest.raises(ValueError):
        sp.pdc_variances(sp.shg_evolve(1.0, 0.2))


def test_marginals_normalized_and_match_joint():
    f = sp.shg_evolve(1.5, 0.4)
    pa, pb = sp.marginals(f, M=128)
    assert pa.integral() == pytest.approx(1.0, abs=1e-12) and pb.integral() == pytest.approx(1.0, abs=1e-12)
    joint = sp.joint_phase(f, M=128)
    np.testing.assert_allclose(joint.values.sum(axis=1) * joint.step, pa.values, atol=1e-12)


def test_ideal_squeezed_variance():
    assert sp.ideal_squeezed_variance(0.0) == pytest.approx(math.pi ** 2 / 3, abs=1e-12)
    v = [sp.ideal_squeezed_variance(r) for r in (0.2, 0.6, 1.2)]
    assert v[0] > v[1] > v[2]


def test_pdc_early_signal_matches_ideal_squeezing():
    beta, gt = 3.0, 0.05
    va, _ = sp.phase_variances(sp.pdc_evolve(beta, gt))
    assert va == pytest.approx(sp.ideal_squeezed_variance(2 * beta * gt), abs=5e-3)


def test_variance_trajectory():
    out = sp.variance_trajectory(sp.SHG, 1.2, [0.0, 0.1])
    assert out["var_a"][0] == pytest.approx(pd.pb_distribution(states.coherent(1.2), M=1024).mean_variance()[1],
                                            abs=1e-10)
    assert out["mean_b"][0] == pytest.approx(0.0, abs=1e-15)


def test_block_spectrum_rows():
    rows = sp.block_spectrum_rows(4)
    assert [r[0] for r in rows] == [0, 1, 2]
    assert sum(r[2] ** 2 for r in rows) == pytest.approx(1.0)
