"""Laplacian eigendecomposition, graph Fourier transform and spectral filtering."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sp

from .errors import (
    BadSpectrumBound,
    DimensionMismatch,
    KernelNotFinite,
    NoConvergence,
    TooLarge,
)
from .graph import Laplacian

DENSE_CAP = 5000
CHEBYSHEV_ORDER = 50
QUADRATURE_POINTS = 1000


def _matrix(L):
    return L.matrix if isinstance(L, Laplacian) else sp.csr_matrix(L)


def canonicalize_sign(v: np.ndarray, rtol: float = 1e-9) -> np.ndarray:
    """Flip ``v`` so its largest-magnitude entry is positive.

    Entries within ``rtol`` of the maximum magnitude count as tied; the tie
    goes to the lowest index.
    """
    v = np.asarray(v, dtype=float)
    mag = np.abs(v)
    top = mag.max()
    if top == 0:
        return v.copy()
    idx = int(np.flatnonzero(mag >= top * (1 - rtol))[0])
    return -v if v[idx] < 0 else v.copy()


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def lambda_max(self) -> float:
        return float(self.eigenvalues[-1])

    @property
    def u_max(self) -> np.ndarray:
        return self.eigenvectors[:, -1]


def dense_eigendecomposition(L, cap: int = DENSE_CAP) -> SpectralDecomposition:
    """Full eigendecomposition of a (small) symmetric Laplacian.

    Eigenvalues ascend; each eigenvector is sign-canonicalized so repeated
    runs agree exactly.
    """
    m = _matrix(L)
    n = m.shape[0]
    if n > cap:
        raise TooLarge(f"dense eigendecomposition capped at {cap} vertices, got {n}")
    dense = m.toarray()
    dense = 0.5 * (dense + dense.T)
    lam, u = np.linalg.eigh(dense)
    for k in range(n):
        u[:, k] = canonicalize_sign(u[:, k])
    return SpectralDecomposition(lam, u)


def power_method(L, seed=None, max_iters: int | None = None, polarity_window: int = 10,
                 shift: float | str | None = None, x0=None, residual_tol: float | None = None,
                 rq_rtol: float | None = 1e-6):
    """Estimate the largest eigenpair by normalized power iteration.

    Iteration stops once the sign pattern of the iterate has been unchanged
    for ``polarity_window`` consecutive steps, since downstream consumers only
    need polarities. With ``shift="trace"`` the iteration runs on
    ``L - s I`` with ``s = trace(L) / (2 n)``, which never exceeds
    ``lambda_max / 2`` and so keeps ``lambda_max`` dominant.

    A step only counts towards the window when the Rayleigh quotient moved
    by at most ``rq_rtol`` (relative); without this, a start vector weighted
    towards the second eigenvector can show stable signs long before
    ``u_max`` dominates. ``rq_rtol=None`` gives pure sign stability.
    Entries of ``u_max`` close to zero need more: ``residual_tol`` also
    requires ``||L x - lam x|| <= residual_tol * lam`` before stopping.

    Returns
    -------
    lam : float
        Rayleigh quotient of the final iterate (computed with ``L`` itself).
    u : ndarray
        Unit-norm, sign-canonicalized final iterate.

    Raises
    ------
    NoConvergence
        If the polarity is still changing after ``max_iters``; the exception
        carries the last iterate.
    """
    m = _matrix(L)
    n = m.shape[0]
    if n < 2:
        raise DimensionMismatch("power method needs at least two vertices")
    if max_iters is None:
        max_iters = int(20 * math.sqrt(n) + 200)
    if shift == "trace":
        s = float(m.diagonal().sum()) / (2 * n)
    else:
        s = float(shift or 0.0)
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n) if x0 is None else np.array(x0, dtype=float)
    x /= np.linalg.norm(x)
    signs = x >= 0
    stable = 0
    it = 0
    y = m @ x
    rq_prev = float(x @ y)
    while it < max_iters:
        if s:
            y = y - s * x
        norm = np.linalg.norm(y)
        if norm == 0:
            break
        x = y / norm
        it += 1
        y = m @ x
        rq = float(x @ y)
        settled = rq_rtol is None or abs(rq - rq_prev) <= rq_rtol * abs(rq)
        if residual_tol is not None:
            settled = settled and np.linalg.norm(y - rq * x) <= residual_tol * abs(rq)
        rq_prev = rq
        new_signs = x >= 0
        if np.array_equal(new_signs, signs) and settled:
            stable += 1
            if stable >= polarity_window:
                break
        else:
            stable = 0
            signs = new_signs
    lam = float(x @ (m @ x))
    x = canonicalize_sign(x)
    if stable < polarity_window:
        raise NoConvergence(f"sign pattern still changing after {it} iterations",
                            vector=x, eigenvalue=lam, iterations=it)
    return lam, x


def estimate_lambda_max(L, seed=0, rtol: float = 1e-8, max_iters: int = 5000, margin: float = 1.01) -> float:
    """Upper bound on ``lambda_max`` for Chebyshev filtering.

    ``margin`` times a converged power-iteration Rayleigh quotient, never
    exceeding the Gershgorin bound.
    """
    m = _matrix(L)
    n = m.shape[0]
    gersh = float(np.max(np.asarray(abs(m).sum(axis=1)).ravel())) if n else 0.0
    if n < 2:
        return gersh
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(n)
    x /= np.linalg.norm(x)
    lam = 0.0
    for _ in range(max_iters):
        y = m @ x
        new = float(x @ y)
        norm = np.linalg.norm(y)
        if norm == 0:
            break
        x = y / norm
        if abs(new - lam) <= rtol * abs(new):
            lam = new
            break
        lam = new
    return min(margin * lam, gersh) if gersh > 0 else margin * lam


def _check_len(f, n):
    f = np.asarray(f, dtype=float)
    if f.shape[0] != n:
        raise DimensionMismatch(f"signal has length {f.shape[0]}, expected {n}")
    return f


def graph_fourier(f, dec: SpectralDecomposition) -> np.ndarray:
    """Coefficients ``<f, u_l>`` in the Laplacian eigenbasis."""
    f = _check_len(f, dec.n)
    return dec.eigenvectors.T @ f


def inverse_graph_fourier(fhat, dec: SpectralDecomposition) -> np.ndarray:
    fhat = _check_len(fhat, dec.n)
    return dec.eigenvectors @ fhat


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class FilterKernel:
    """Real-valued spectral kernel defined on the nonnegative reals.

    ``exact_only`` marks discontinuous kernels that must not be handed to
    the polynomial approximation.
    """

    func: Callable[[np.ndarray], np.ndarray]
    name: str = "custom"
    params: tuple = ()
    exact_only: bool = False
    extra: dict = field(default_factory=dict)

    def __call__(self, lam):
        lam = np.asarray(lam, dtype=float)
        out = np.asarray(self.func(lam), dtype=float)
        return np.broadcast_to(out, lam.shape).astype(float)

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        return self.name + ":" + ",".join(repr(float(p)) for p in self.params)

    def __repr__(self):
        return f"FilterKernel({self.spec})"


def green_kernel(tau: float) -> FilterKernel:
    """Lowpass ``tau / (tau + lambda)``."""
    tau = float(tau)
    if not tau > 0:
        raise ValueError("green kernel needs tau > 0")
    return FilterKernel(lambda lam: tau / (tau + lam), "green", (tau,))


def heat_kernel(t: float) -> FilterKernel:
    t = float(t)
    if not t >= 0:
        raise ValueError("heat kernel needs t >= 0")
    return FilterKernel(lambda lam: np.exp(-t * lam), "heat", (t,))


def ideal_lowpass(cutoff: float) -> FilterKernel:
    cutoff = float(cutoff)
    return FilterKernel(lambda lam: (lam <= cutoff).astype(float), "ideal-low", (cutoff,), exact_only=True)


def constant_kernel(c: float) -> FilterKernel:
    c = float(c)
    return FilterKernel(lambda lam: np.full(np.shape(lam), c), "constant", (c,))


def polynomial_kernel(coeffs) -> FilterKernel:
    """``sum_k coeffs[k] * lambda**k``."""
    coeffs = tuple(float(c) for c in coeffs)
    return FilterKernel(lambda lam: np.polynomial.polynomial.polyval(lam, coeffs), "poly", coeffs)


PRESETS = {"green": green_kernel, "heat": heat_kernel, "ideal-low": ideal_lowpass}


def parse_kernel(spec: str) -> FilterKernel:
    """Parse a preset string such as ``"green:0.5"`` or ``"heat:2"``."""
    name, _, arg = spec.partition(":")
    if name not in PRESETS or not arg:
        raise ValueError(f"unknown filter preset {spec!r}; expected one of green:tau, heat:t, ideal-low:c")
    return PRESETS[name](float(arg))


# ---------------------------------------------------------------------------
# filtering
# ---------------------------------------------------------------------------


def apply_filter_exact(f, h: FilterKernel, dec: SpectralDecomposition) -> np.ndarray:
    """``U diag(h(lambda)) U^T f``. ``f`` may hold several signals as columns."""
    f = _check_len(f, dec.n)
    response = h(dec.eigenvalues)
    if not np.all(np.isfinite(response)):
        raise KernelNotFinite(f"{h!r} is not finite on the spectrum")
    u = dec.eigenvectors
    coeff = u.T @ f
    coeff = response[:, None] * coeff if coeff.ndim == 2 else response * coeff
    return u @ coeff


def chebyshev_coefficients(h: FilterKernel, order: int, lambda_max_bound: float,
                           points: int = QUADRATURE_POINTS) -> np.ndarray:
    """Chebyshev expansion of ``h`` on ``[0, lambda_max_bound]`` by Gauss-Chebyshev quadrature."""
    if not lambda_max_bound > 0:
        raise BadSpectrumBound(f"lambda_max bound must be positive, got {lambda_max_bound}")
    if h.exact_only:
        raise ValueError(f"{h!r} is only supported by exact filtering")
    half = lambda_max_bound / 2
    theta = np.pi * (np.arange(points) + 0.5) / points
    samples = h(half * np.cos(theta) + half)
    if not np.all(np.isfinite(samples)):
        raise KernelNotFinite(f"{h!r} is not finite on [0, {lambda_max_bound}]")
    k = np.arange(order + 1)
    return 2.0 / points * np.cos(np.outer(k, theta)) @ samples


def chebyshev_apply(L, coeffs: np.ndarray, f, lambda_max_bound: float) -> np.ndarray:
    """Evaluate a Chebyshev series of the Laplacian on ``f`` with ``len(coeffs) - 1`` products."""
    m = _matrix(L)
    f = _check_len(f, m.shape[0])
    half = lambda_max_bound / 2

    def shifted(v):
        return (m @ v - half * v) / half

    t_prev = f
    out = 0.5 * coeffs[0] * t_prev
    if len(coeffs) == 1:
        return out
    t_cur = shifted(f)
    out = out + coeffs[1] * t_cur
    for c in coeffs[2:]:
        t_prev, t_cur = t_cur, 2 * shifted(t_cur) - t_prev
        out = out + c * t_cur
    return out


def apply_filter_chebyshev(f, h: FilterKernel, L, K: int = CHEBYSHEV_ORDER,
                           lambda_max_bound: float | None = None) -> np.ndarray:
    """Approximate ``h(L) f`` with an order-``K`` Chebyshev polynomial.

    Costs ``K`` sparse products with ``L``. When ``lambda_max_bound`` is not
    given it is estimated with :func:`estimate_lambda_max`.
    """
    if K < 1:
        raise ValueError("Chebyshev order must be >= 1")
    if lambda_max_bound is None:
        lambda_max_bound = estimate_lambda_max(L)
    coeffs = chebyshev_coefficients(h, K, lambda_max_bound)
    return chebyshev_apply(L, coeffs, f, lambda_max_bound)
