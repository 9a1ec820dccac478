"""Symmetric tridiagonal eigenproblem by implicit QL with Wilkinson shifts."""
from __future__ import annotations

import math

import numpy as np


class ConvergenceError(ArithmeticError):
    """The QL sweep did not converge within the iteration budget."""


def tqli(diag, offdiag, vectors: bool = True, max_iter: int = 60):
    """Eigen-decomposition of the symmetric tridiagonal matrix (diag, offdiag).

    Returns eigenvalues in ascending order and, if requested, the matrix whose
    columns are the matching orthonormal eigenvectors.
    """
    d = np.array(diag, dtype=float)
    n = d.size
    e = np.zeros(n)
    e[: n - 1] = np.asarray(offdiag, dtype=float)[: n - 1]
    z = np.eye(n) if vectors else None
    eps = np.finfo(float).eps
    # floor for the deflation test, so zero diagonals with tiny couplings still split
    floor = eps * eps * max(float(np.max(np.abs(d) + np.abs(e))) if n else 0.0, np.finfo(float).tiny)

    for l in range(n):
        it = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(e[m]) <= eps * dd + floor:
                    break
                m += 1
            if m == l:
                break
            it += 1
            if it > max_iter:
                raise ConvergenceError(f"no convergence for eigenvalue {l}")
            g = (d[l + 1] - d[l]) / (2.0 * e[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + e[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            i = m - 1
            underflow = False
            while i >= l:
                f = s * e[i]
                b = c * e[i]
                r = math.hypot(f, g)
                e[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    e[m] = 0.0
                    underflow = True
                    break
                s = f / r
                c = g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                if vectors:
                    zi = z[:, i].copy()
                    zi1 = z[:, i + 1]
                    z[:, i] = c * zi - s * zi1
                    z[:, i + 1] = s * zi + c * zi1
                i -= 1
            if underflow:
                continue
            d[l] -= p
            e[l] = g
            e[m] = 0.0

    order = np.argsort(d, kind="stable")
    d = d[order]
    if not vectors:
        return d
    z = z[:, order]
    return d, _reorthogonalize(d, z)


def _reorthogonalize(vals: np.ndarray, vecs: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    # clusters of nearly equal eigenvalues can lose orthogonality; QR inside each cluster
    n = vals.size
    i = 0
    while i < n:
        j = i + 1
        while j < n and vals[j] - vals[j - 1] < tol * max(1.0, abs(vals[j])):
            j += 1
        if j - i > 1:
            q, _ = np.linalg.qr(vecs[:, i:j])
            vecs[:, i:j] = q
        i = j
    return vecs
