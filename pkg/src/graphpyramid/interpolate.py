"""Variational-spline interpolation with Green's functions of ``L + eps I``."""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .downsample import VertexMask
from .errors import DimensionMismatch
from .graph import Laplacian
from .linalg import CG_TOL, SPDFactor, block_cg
from .reduce import _split, schur_apply
from .spectral import FilterKernel, apply_filter_chebyshev, estimate_lambda_max


def _regularized(L, epsilon: float) -> sp.csr_matrix:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    m = L.matrix if isinstance(L, Laplacian) else sp.csr_matrix(L)
    return (m + epsilon * sp.identity(m.shape[0], format="csr")).tocsr()


def laplacian_fingerprint(L) -> str:
    """Short content hash identifying the Laplacian an interpolant was fitted on."""
    m = (L.matrix if isinstance(L, Laplacian) else sp.csr_matrix(L)).tocsr()
    h = hashlib.sha1()
    for arr in (m.indptr, m.indices, m.data):
        h.update(np.ascontiguousarray(arr).tobytes())
    return h.hexdigest()[:16]


def green_kernel_of(epsilon: float) -> FilterKernel:
    return FilterKernel(lambda lam: 1.0 / (lam + epsilon), "inverse", (epsilon,))


def green_function(L, epsilon: float, j: int, tol: float = CG_TOL) -> np.ndarray:
    """``phi_j`` solving ``(L + eps I) phi_j = delta_j`` by conjugate gradients."""
    a = _regularized(L, epsilon)
    delta = np.zeros(a.shape[0])
    delta[j] = 1.0
    return block_cg(a, delta, tol=tol)[0]


@dataclass(frozen=True, eq=False)
class SplineInterpolant:
    """Green's-function coefficients ``alpha`` indexed by the kept vertices."""

    alpha: np.ndarray
    mask: VertexMask
    epsilon: float
    graph_ref: str


def fit_spline(f_kept, L, mask: VertexMask, epsilon: float, tol: float = CG_TOL) -> SplineInterpolant:
    """Coefficients matching ``f_kept`` on the kept set.

    ``alpha = K(L + eps I, V1) f_kept``: the Kron reduction of the
    regularized Laplacian applied to the data, which needs one solve with the
    eliminated block.
    """
    f_kept = np.asarray(f_kept, dtype=float)
    if mask.n_kept < 1:
        raise DimensionMismatch("need at least one kept vertex")
    if f_kept.shape[0] != mask.n_kept:
        raise DimensionMismatch(f"got {f_kept.shape[0]} values for {mask.n_kept} kept vertices")
    a = _regularized(L, epsilon)
    alpha = schur_apply(a, mask, f_kept, tol=tol)
    return SplineInterpolant(alpha, mask, float(epsilon), laplacian_fingerprint(L))


def interpolate(spline: SplineInterpolant, L, method: str = "exact", order: int = 50,
                tol: float = CG_TOL) -> np.ndarray:
    """Evaluate ``Phi_V1 alpha`` on every vertex.

    ``method="exact"`` solves ``(L + eps I) x = upsample(alpha)``;
    ``method="chebyshev"`` filters the upsampled coefficients with the
    polynomial approximation of ``1 / (lambda + eps)`` of the given order.
    """
    if laplacian_fingerprint(L) != spline.graph_ref:
        raise ValueError("interpolant was fitted on a different Laplacian")
    up = spline.mask.upsample(spline.alpha)
    if method == "exact":
        return block_cg(_regularized(L, spline.epsilon), up, tol=tol)[0]
    if method == "chebyshev":
        bound = estimate_lambda_max(L)
        return apply_filter_chebyshev(up, green_kernel_of(spline.epsilon), L, order, bound)
    raise ValueError(f"unknown interpolation method {method!r}")


class SplineOperator:
    """Factorized interpolation operator for repeated use on one graph level.

    ``predict(z)`` is ``Phi_V1 Phi_V1V1^{-1} z`` (interpolate kept-set values
    to every vertex) and ``adjoint`` its transpose. Both reuse one
    factorization of ``L + eps I`` and one of its eliminated block.
    """

    def __init__(self, L, mask: VertexMask, epsilon: float):
        self.mask = mask
        self.epsilon = float(epsilon)
        self._a = _regularized(L, epsilon)
        self._full = SPDFactor(self._a)
        self._a11, self._a1c, acc = _split(self._a, mask)
        self._acc = SPDFactor(acc)

    def coefficients(self, z):
        """Kron-reduced regularized Laplacian applied to ``z``."""
        return self._a11 @ z - self._a1c @ self._acc.solve(self._a1c.T @ z)

    def predict(self, z):
        z = np.asarray(z, dtype=float)
        return self._full.solve(self.mask.upsample(self.coefficients(z)))

    def adjoint(self, w):
        w = np.asarray(w, dtype=float)
        return self.coefficients(self.mask.downsample(self._full.solve(w)))
