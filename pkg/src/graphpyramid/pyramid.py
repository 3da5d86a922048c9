"""Multiscale Laplacian pyramid for signals on graphs.

One level maps ``x`` (on graph ``L``) to a coarse approximation
``x_next = S_d H x`` on the kept vertices and a prediction error
``y = x - P x_next``, where ``H`` is a spectral lowpass filter, ``S_d``
restricts to the kept set and ``P`` is spline interpolation back to the
full vertex set. Graph hierarchies depend only on the graph, never on the
signal, so one hierarchy serves any number of signals.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .downsample import VertexMask, median_split, select_largest_eigenvector
from .errors import BadKeepCount, DimensionMismatch, SolverFailure, TooManyLevels
from .graph import Laplacian
from .interpolate import SplineOperator
from .linalg import block_cg
from .reduce import SparsifyConfig, reduce_pipeline
from .spectral import (
    CHEBYSHEV_ORDER,
    FilterKernel,
    apply_filter_exact,
    chebyshev_apply,
    chebyshev_coefficients,
    dense_eigendecomposition,
    estimate_lambda_max,
    green_kernel,
)

EXACT_BELOW = 2000


@dataclass(frozen=True)
class PyramidConfig:
    """Settings shared by every level of a pyramid.

    ``filtering`` is ``"auto"`` (exact below ``exact_below`` vertices,
    Chebyshev above), ``"exact"`` or ``"chebyshev"``.
    """

    kernel: FilterKernel = field(default_factory=lambda: green_kernel(0.5))
    epsilon: float = 0.005
    sparsify: bool = False
    sparsify_cfg: SparsifyConfig = field(default_factory=SparsifyConfig)
    seed: int = 0
    filtering: str = "auto"
    exact_below: int = EXACT_BELOW
    chebyshev_order: int = CHEBYSHEV_ORDER

    def filtering_for(self, n: int) -> str:
        if self.filtering == "auto":
            return "exact" if n < self.exact_below else "chebyshev"
        return self.filtering


def _level_seed(seed: int, level: int, stream: int) -> int:
    return int(np.random.SeedSequence([seed, level, stream]).generate_state(1)[0])


@dataclass(frozen=True, eq=False)
class HierarchyLevel:
    laplacian: Laplacian
    mask: VertexMask
    laplacian_next: Laplacian
    sparsify_meta: dict


@dataclass(frozen=True, eq=False)
class PyramidLevelRecord:
    laplacian_next: Laplacian
    mask: VertexMask
    prediction_error: np.ndarray
    kernel: FilterKernel
    epsilon: float
    sparsify_meta: dict = field(default_factory=dict)
    filtering: str = "exact"
    lambda_max_bound: Optional[float] = None
    chebyshev_order: int = CHEBYSHEV_ORDER


@dataclass(frozen=True, eq=False)
class PyramidOutput:
    levels: list
    coarsest: np.ndarray
    n0: int

    @property
    def J(self) -> int:
        return len(self.levels)

    @property
    def sizes(self) -> list[int]:
        return [self.n0] + [lvl.laplacian_next.n for lvl in self.levels]

    @property
    def total_coefficients(self) -> int:
        return int(self.coarsest.shape[0] + sum(lvl.prediction_error.shape[0] for lvl in self.levels))

    def coefficients(self) -> np.ndarray:
        """All coefficients in (level, index) order: ``y^(0), ..., y^(J-1), x^(J)``."""
        return np.concatenate([lvl.prediction_error for lvl in self.levels] + [self.coarsest])

    def with_coefficients(self, c) -> "PyramidOutput":
        c = np.asarray(c, dtype=float)
        if c.shape[0] != self.total_coefficients:
            raise DimensionMismatch("coefficient vector has the wrong length")
        levels, start = [], 0
        for lvl in self.levels:
            m = lvl.prediction_error.shape[0]
            levels.append(replace(lvl, prediction_error=c[start:start + m].copy()))
            start += m
        return PyramidOutput(levels, c[start:].copy(), self.n0)


# ---------------------------------------------------------------------------
# single-level operator
# ---------------------------------------------------------------------------


class LevelOperator:
    """Analysis operator ``T_a`` of one level together with its synthesis inverses."""

    def __init__(self, L: Laplacian, mask: VertexMask, kernel: FilterKernel, epsilon: float,
                 filtering: str = "exact", lambda_max_bound: Optional[float] = None,
                 chebyshev_order: int = CHEBYSHEV_ORDER):
        if mask.n != L.n:
            raise DimensionMismatch(f"mask length {mask.n} differs from graph size {L.n}")
        self.L = L
        self.mask = mask
        self.kernel = kernel
        self.epsilon = epsilon
        self.filtering = filtering
        self.n = L.n
        self.m = mask.n_kept
        if filtering == "exact":
            self._dec = dense_eigendecomposition(L)
            self.lambda_max_bound = lambda_max_bound
        elif filtering == "chebyshev":
            self.lambda_max_bound = lambda_max_bound or estimate_lambda_max(L)
            self._cheb = chebyshev_coefficients(kernel, chebyshev_order, self.lambda_max_bound)
        else:
            raise ValueError(f"unknown filtering mode {filtering!r}")
        self.spline = SplineOperator(L, mask, epsilon)

    def filter(self, x):
        if self.filtering == "exact":
            return apply_filter_exact(x, self.kernel, self._dec)
        return chebyshev_apply(self.L, self._cheb, x, self.lambda_max_bound)

    def analyze(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[0] != self.n:
            raise DimensionMismatch(f"signal length {x.shape[0]} differs from graph size {self.n}")
        x_next = self.mask.downsample(self.filter(x))
        return x_next, x - self.spline.predict(x_next)

    def forward(self, x):
        """``T_a x`` stacked as one vector ``[x_next; y]``."""
        return np.concatenate(self.analyze(x))

    def adjoint(self, c):
        """``T_a^T [a; b] = H S^T a + b - H S^T P^T b`` (``H`` is symmetric)."""
        c = np.asarray(c, dtype=float)
        a, b = c[: self.m], c[self.m:]
        return self.filter(self.mask.upsample(a - self.spline.adjoint(b))) + b

    def synthesize_direct(self, x_next, y):
        return self.spline.predict(x_next) + np.asarray(y, dtype=float)

    def _normal(self):
        return LinearOperator((self.n, self.n), matvec=lambda v: self.adjoint(self.forward(v)), dtype=float)

    def synthesize_leastsquares(self, x_next, y, solver: str = "normal_cg", tol: float = 1e-10,
                                step: Optional[float] = None, iters: int = 5000):
        """``argmin_x ||T_a x - [x_next; y]||`` by CG on the normal equations or by Landweber.

        Both start from the direct synthesis. Landweber uses ``step`` or
        ``1 / sigma^2`` with ``sigma`` a power-iteration estimate of the
        largest singular value of ``T_a``.
        """
        c = np.concatenate([np.asarray(x_next, dtype=float), np.asarray(y, dtype=float)])
        if c.shape[0] != self.n + self.m:
            raise DimensionMismatch("coefficient lengths do not match this level")
        rhs = self.adjoint(c)
        x0 = self.synthesize_direct(x_next, y)
        if solver == "normal_cg":
            x, _ = block_cg(self._normal(), rhs, tol=tol, maxiter=20 * self.n + 100, x0=x0, precondition=False)
            return x
        if solver == "landweber":
            return self._landweber(rhs, x0, tol, step, iters)
        raise ValueError(f"unknown least-squares solver {solver!r}")

    def largest_singular_value(self, iters: int = 100, seed: int = 0) -> float:
        v = np.random.default_rng(seed).standard_normal(self.n)
        v /= np.linalg.norm(v)
        lam = 0.0
        for _ in range(iters):
            w = self.adjoint(self.forward(v))
            new = float(v @ w)
            v = w / np.linalg.norm(w)
            if abs(new - lam) <= 1e-10 * new:
                lam = new
                break
            lam = new
        return float(np.sqrt(lam))

    def _landweber(self, rhs, x0, tol, step, iters):
        if step is None:
            step = 1.0 / self.largest_singular_value() ** 2
        x = x0.copy()
        target = tol * max(np.linalg.norm(rhs), np.finfo(float).tiny)
        for _ in range(iters):
            grad = rhs - self.adjoint(self.forward(x))
            if np.linalg.norm(grad) <= target:
                return x
            x += step * grad
        grad = rhs - self.adjoint(self.forward(x))
        if np.linalg.norm(grad) > target:
            raise SolverFailure(f"Landweber did not reach tolerance in {iters} iterations",
                                iterations=iters, residual=float(np.linalg.norm(grad) / np.linalg.norm(rhs)))
        return x


def _record_operator(rec: PyramidLevelRecord, L: Laplacian) -> LevelOperator:
    return LevelOperator(L, rec.mask, rec.kernel, rec.epsilon, rec.filtering,
                         rec.lambda_max_bound, rec.chebyshev_order)


# ---------------------------------------------------------------------------
# graph hierarchy
# ---------------------------------------------------------------------------


def _usable(mask: VertexMask) -> bool:
    return 2 <= mask.n_kept < mask.n


def reduce_level(L: Laplacian, config: PyramidConfig, level: int = 0) -> HierarchyLevel:
    """Downsample and reduce one graph; masks that cannot be reduced fall back to a median split."""
    if L.n < 3:
        raise TooManyLevels(f"graph at level {level} has only {L.n} vertices")
    mask = select_largest_eigenvector(L, seed=_level_seed(config.seed, level, 0), fallback=True)
    if not _usable(mask):
        flipped = VertexMask(~mask.keep, mask.method + "-flipped")
        mask = flipped if _usable(flipped) else median_split(L.matrix.diagonal())
    cfg = config.sparsify_cfg.with_seed(_level_seed(config.seed, level, 1))
    L_next, info = reduce_pipeline(L, mask, cfg, config.sparsify, with_info=True)
    return HierarchyLevel(L, mask, L_next, info)


def build_hierarchy(L: Laplacian, J: int, config: PyramidConfig = PyramidConfig()) -> list[HierarchyLevel]:
    """Sequence of ``J`` (mask, reduced Laplacian) pairs starting from ``L``.

    Raises
    ------
    TooManyLevels
        When an intermediate graph has fewer than three vertices.
    """
    if J < 1:
        raise ValueError("J must be at least 1")
    out = []
    current = L
    for j in range(J):
        lvl = reduce_level(current, config, j)
        out.append(lvl)
        current = lvl.laplacian_next
    return out


# ---------------------------------------------------------------------------
# analysis
# ---------------------------------------------------------------------------


def _analyze_with(x, lvl: HierarchyLevel, config: PyramidConfig, j: int):
    filtering = config.filtering_for(lvl.laplacian.n)
    bound = None
    if filtering == "chebyshev":
        bound = estimate_lambda_max(lvl.laplacian, seed=_level_seed(config.seed, j, 2))
    op = LevelOperator(lvl.laplacian, lvl.mask, config.kernel, config.epsilon, filtering, bound,
                       config.chebyshev_order)
    x_next, y = op.analyze(x)
    rec = PyramidLevelRecord(lvl.laplacian_next, lvl.mask, y, config.kernel, config.epsilon,
                             dict(lvl.sparsify_meta), filtering, op.lambda_max_bound, config.chebyshev_order)
    return rec, x_next


def analyze_level(x, L: Laplacian, h: FilterKernel, epsilon: float,
                  sparsify_cfg: Optional[SparsifyConfig] = None, exact_filtering: bool = True,
                  seed: int = 0):
    """One analysis level: returns ``(record, x_next)``.

    Sparsification runs when ``sparsify_cfg`` is given.
    """
    config = PyramidConfig(h, epsilon, sparsify_cfg is not None, sparsify_cfg or SparsifyConfig(), seed,
                           "exact" if exact_filtering else "chebyshev")
    return _analyze_with(x, reduce_level(L, config, 0), config, 0)


def analyze(x, L: Laplacian, J: int, config: PyramidConfig = PyramidConfig(),
            hierarchy: Optional[list[HierarchyLevel]] = None) -> PyramidOutput:
    """``J``-level pyramid of ``x``; pass a prebuilt ``hierarchy`` to reuse graph work across signals."""
    x = np.asarray(x, dtype=float)
    if x.shape[0] != L.n:
        raise DimensionMismatch(f"signal length {x.shape[0]} differs from graph size {L.n}")
    if hierarchy is None:
        hierarchy = build_hierarchy(L, J, config)
    elif len(hierarchy) != J:
        raise ValueError("hierarchy depth differs from J")
    levels = []
    current = x
    for j, lvl in enumerate(hierarchy):
        rec, current = _analyze_with(current, lvl, config, j)
        levels.append(rec)
    return PyramidOutput(levels, current, L.n)


# ---------------------------------------------------------------------------
# synthesis
# ---------------------------------------------------------------------------


def level_laplacians(p: PyramidOutput, L0: Laplacian) -> list[Laplacian]:
    """``L^(0), ..., L^(J-1)``: the graphs each level's analysis ran on."""
    return [L0] + [lvl.laplacian_next for lvl in p.levels[:-1]]


def synthesize_level_direct(rec: PyramidLevelRecord, x_next, L: Laplacian) -> np.ndarray:
    """``Phi_V1 Phi_V1V1^{-1} x_next + y``; exact inverse of the analysis."""
    op = _record_operator(rec, L)
    return op.synthesize_direct(x_next, rec.prediction_error)


def synthesize_level_leastsquares(rec: PyramidLevelRecord, x_next_noisy, L: Laplacian,
                                  solver: str = "normal_cg", **kwargs) -> np.ndarray:
    """Pseudoinverse of the level's analysis operator applied to ``[x_next; y]``."""
    op = _record_operator(rec, L)
    return op.synthesize_leastsquares(x_next_noisy, rec.prediction_error, solver=solver, **kwargs)


def synthesize(p: PyramidOutput, L0: Laplacian, mode: str = "direct", solver: str = "normal_cg",
               **kwargs) -> np.ndarray:
    """Fold the pyramid from the coarsest level back to the original graph."""
    if L0.n != p.n0:
        raise DimensionMismatch("L0 does not match the pyramid's original dimension")
    x = p.coarsest
    for rec, L in reversed(list(zip(p.levels, level_laplacians(p, L0)))):
        if mode == "direct":
            x = synthesize_level_direct(rec, x, L)
        elif mode == "leastsquares":
            x = synthesize_level_leastsquares(rec, x, L, solver=solver, **kwargs)
        else:
            raise ValueError(f"unknown synthesis mode {mode!r}")
    return x


# ---------------------------------------------------------------------------
# coefficient utilities
# ---------------------------------------------------------------------------


def threshold_coefficients(p: PyramidOutput, keep_count: int) -> PyramidOutput:
    """Keep the ``keep_count`` largest-magnitude coefficients across all levels, zero the rest.

    Ties go to the earlier coefficient in (level, index) order.
    """
    total = p.total_coefficients
    if not 0 < keep_count <= total:
        raise BadKeepCount(f"keep_count must be in 1..{total}, got {keep_count}")
    c = p.coefficients()
    order = np.argsort(-np.abs(c), kind="stable")
    out = np.zeros_like(c)
    keep = order[:keep_count]
    out[keep] = c[keep]
    return p.with_coefficients(out)


def redundancy(p: PyramidOutput) -> float:
    """Total coefficient count divided by the input dimension."""
    return p.total_coefficients / p.n0


def halving_redundancy(J: int, kappa: float = 2.0) -> float:
    """Redundancy of a ``J``-level pyramid that shrinks by exactly ``kappa`` per level."""
    r = 1.0 / kappa
    return (1 - r ** (J + 1)) / (1 - r)


def relative_error(estimate, reference) -> float:
    reference = np.asarray(reference, dtype=float)
    denom = np.linalg.norm(reference)
    diff = np.linalg.norm(np.asarray(estimate, dtype=float) - reference)
    return float(diff / denom) if denom > 0 else float(diff)
