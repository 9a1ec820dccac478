import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from qphase.tridiag import tqli


def _dense(d, e):
    return np.diag(d) + np.diag(e, 1) + np.diag(e, -1)


@given(st.integers(1, 30).flatmap(lambda n: st.tuples(
    arrays(float, n, elements=st.floats(-10, 10)), arrays(float, max(n - 1, 0), elements=st.floats(-10, 10)))))
def test_matches_numpy_eigh(de):
    d, e = de
    lam, U = tqli(d, e)
    ref = np.linalg.eigvalsh(_dense(d, e))
    np.testing.assert_allclose(lam, ref, atol=1e-10 * max(1.0, np.max(np.abs(ref))))
    np.testing.assert_allclose(U.T @ U, np.eye(d.size), atol=1e-10)
    np.testing.assert_allclose(_dense(d, e) @ U, U * lam, atol=1e-9 * max(1.0, np.max(np.abs(ref))))


def test_ascending_order_and_values_only():
    d = np.zeros(6)
    e = np.sqrt(np.arange(1, 6))
    lam = tqli(d, e, vectors=False)
    assert np.all(np.diff(lam) > 0)
    # these are the roots of the Hermite polynomial He_6
    from numpy.polynomial.hermite_e import hermeroots

    np.testing.assert_allclose(lam, np.sort(hermeroots([0] * 6 + [1])), atol=1e-12)


def test_single_element():
    lam, U = tqli([3.0], [])
    assert lam[0] == 3.0 and U[0, 0] == 1.0


def test_degenerate_blocks():
    lam, U = tqli(np.ones(4), np.array([0.0, 1.0, 0.0]))
    np.testing.assert_allclose(lam, [0, 1, 1, 2], atol=1e-14)
    np.testing.assert_allclose(U.T @ U, np.eye(4), atol=1e-14)


def test_iteration_budget_enforced():
    from qphase.tridiag import ConvergenceError

    with pytest.raises(ConvergenceError):
        tqli(np.arange(50.0), np.ones(49), max_iter=0)
