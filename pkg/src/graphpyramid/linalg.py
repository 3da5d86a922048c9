"""Sparse symmetric solvers: Jacobi-preconditioned conjugate gradients.

The block variant runs independent CG recurrences on every column of a
right-hand-side matrix at once, so one sparse product per iteration serves
all columns. Columns stop updating once they meet the tolerance.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .errors import SolverFailure

CG_TOL = 1e-10


def _diag_preconditioner(a) -> np.ndarray:
    d = np.asarray(a.diagonal(), dtype=float).copy()
    d[d <= 0] = 1.0
    return 1.0 / d


def block_cg(a, b, tol: float = CG_TOL, maxiter: int | None = None, x0=None, precondition: bool = True):
    """Solve ``a @ x = b`` for symmetric positive (semi)definite ``a``.

    Parameters
    ----------
    a : sparse matrix or LinearOperator-like with ``@``
    b : ndarray, shape (n,) or (n, k)
        Right-hand side(s). For semidefinite ``a`` each column must lie in the
        range of ``a``.
    tol : float
        Relative residual target ``||b - a x|| <= tol * ||b||`` per column.
    maxiter : int, optional
        Defaults to ``10 * n``.

    Returns
    -------
    x : ndarray shaped like ``b``
    iterations : int

    Raises
    ------
    SolverFailure
        If some column misses the tolerance after ``maxiter`` iterations.
    """
    b = np.asarray(b, dtype=float)
    vector = b.ndim == 1
    bm = b[:, None] if vector else b
    n, k = bm.shape
    if maxiter is None:
        maxiter = 10 * max(n, 1)
    minv = _diag_preconditioner(a)[:, None] if precondition else np.ones((n, 1))

    x = np.zeros_like(bm) if x0 is None else np.array(x0, dtype=float).reshape(n, k)
    r = bm - a @ x if x0 is not None else bm.copy()
    bnorm = np.linalg.norm(bm, axis=0)
    target = tol * np.where(bnorm > 0, bnorm, 1.0)
    active = np.linalg.norm(r, axis=0) > target
    z = minv * r
    p = z.copy()
    rz = np.einsum("ij,ij->j", r, z)
    it = 0
    while active.any() and it < maxiter:
        cols = np.flatnonzero(active)
        pa = p[:, cols]
        q = a @ pa
        denom = np.einsum("ij,ij->j", pa, q)
        bad = denom <= 0
        if bad.any():
            # exact breakdown: only possible once the residual is already zero
            denom = np.where(bad, 1.0, denom)
        alpha = np.where(bad, 0.0, rz[cols] / denom)
        x[:, cols] += alpha * pa
        r[:, cols] -= alpha * q
        z_c = minv * r[:, cols]
        rz_new = np.einsum("ij,ij->j", r[:, cols], z_c)
        beta = np.where(rz[cols] != 0, rz_new / np.where(rz[cols] != 0, rz[cols], 1.0), 0.0)
        p[:, cols] = z_c + beta * pa
        rz[cols] = rz_new
        it += 1
        done = np.linalg.norm(r[:, cols], axis=0) <= target[cols]
        done |= bad
        active[cols[done]] = False
    if active.any():
        res = float(np.max(np.linalg.norm(r[:, active], axis=0) / np.where(bnorm[active] > 0, bnorm[active], 1.0)))
        raise SolverFailure(f"CG did not converge in {maxiter} iterations (relative residual {res:.2e})",
                            iterations=it, residual=res)
    return (x[:, 0] if vector else x), it


def cg(a, b, tol: float = CG_TOL, maxiter: int | None = None, x0=None):
    """Single right-hand-side convenience wrapper around :func:`block_cg`."""
    x, _ = block_cg(a, b, tol=tol, maxiter=maxiter, x0=x0)
    return x


class SPDFactor:
    """Reusable exact solver for a fixed sparse SPD matrix.

    Dense Cholesky below ``dense_below`` rows, sparse LU otherwise.
    """

    def __init__(self, a, dense_below: int = 2000):
        a = sp.csc_matrix(a, dtype=float)
        self.n = a.shape[0]
        self._dense = None
        self._lu = None
        if self.n == 0:
            return
        if self.n < dense_below:
            self._dense = sla.cho_factor(a.toarray(), lower=True, check_finite=False)
        else:
            from scipy.sparse.linalg import splu
            self._lu = splu(a)

    def solve(self, b):
        b = np.asarray(b, dtype=float)
        if self.n == 0:
            return b.copy()
        if self._dense is not None:
            return sla.cho_solve(self._dense, b, check_finite=False)
        return self._lu.solve(b)
