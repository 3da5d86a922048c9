"""Kron reduction, effective resistances and resistance-sampling sparsification."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp

from .downsample import VertexMask, _UnionFind
from .errors import MaskTooSmall, NotALaplacian
from .graph import Graph, Laplacian, connected_components, graph_from_adjacency, laplacian
from .linalg import CG_TOL, SPDFactor, block_cg

DENSE_BELOW = 200
CLAMP_RTOL = 1e-12
CG_BATCH = 256


@dataclass(frozen=True)
class SparsifyConfig:
    """Number of edge draws for sparsification.

    ``q`` fixes the count explicitly; otherwise it is ``round(c * N * ln N)``.
    """

    q: Optional[int] = None
    c: float = 4.0
    seed: int = 0

    def __post_init__(self):
        if self.q is not None and self.q < 1:
            raise ValueError("Q must be a positive integer")
        if not self.c > 0:
            raise ValueError("c must be positive")

    def samples(self, n: int) -> int:
        if self.q is not None:
            return int(self.q)
        return max(1, int(round(self.c * n * math.log(n)))) if n > 1 else 1

    @property
    def rule(self) -> str:
        return str(self.q) if self.q is not None else f"auto:{self.c:g}"

    @classmethod
    def parse(cls, text: str, seed: int = 0) -> "SparsifyConfig":
        """``"1000"`` or ``"auto:4"``."""
        if text.startswith("auto"):
            _, _, c = text.partition(":")
            return cls(None, float(c) if c else 4.0, seed)
        return cls(int(text), 4.0, seed)

    def with_seed(self, seed: int) -> "SparsifyConfig":
        return SparsifyConfig(self.q, self.c, seed)


def _split(L, mask: VertexMask):
    a = L.matrix if isinstance(L, Laplacian) else sp.csr_matrix(L)
    if mask.n != a.shape[0]:
        raise MaskTooSmall(f"mask has length {mask.n}, matrix has dimension {a.shape[0]}")
    k, c = mask.kept, mask.eliminated
    a = a.tocsr()
    return a[k][:, k], a[k][:, c], a[c][:, c]


def solve_block(acc, rhs, tol: float = CG_TOL, dense_below: int = DENSE_BELOW):
    """Solve ``acc @ X = rhs`` for an SPD block: Cholesky when small, batched PCG otherwise."""
    n = acc.shape[0]
    if n == 0:
        return np.zeros_like(rhs)
    if n < dense_below:
        fac = sla.cho_factor(acc.toarray(), lower=True)
        return sla.cho_solve(fac, rhs)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.ndim == 1:
        return block_cg(acc, rhs, tol=tol)[0]
    out = np.zeros_like(rhs)
    live = np.flatnonzero(np.any(rhs != 0, axis=0))
    for start in range(0, live.size, CG_BATCH):
        cols = live[start:start + CG_BATCH]
        out[:, cols] = block_cg(acc, rhs[:, cols], tol=tol)[0]
    return out


def schur_complement(A, mask: VertexMask, tol: float = CG_TOL, dense_below: int = DENSE_BELOW) -> np.ndarray:
    """Dense ``A_kk - A_kc A_cc^{-1} A_ck`` over the kept set of ``mask``."""
    a11, a1c, acc = _split(A, mask)
    if acc.shape[0] == 0:
        return a11.toarray()
    x = solve_block(acc, a1c.T.toarray(), tol=tol, dense_below=dense_below)
    s = a11.toarray() - a1c @ x
    return 0.5 * (s + s.T)


def schur_apply(A, mask: VertexMask, z, tol: float = CG_TOL, dense_below: int = DENSE_BELOW) -> np.ndarray:
    """Apply the Schur complement onto the kept set to ``z`` with a single block solve."""
    a11, a1c, acc = _split(A, mask)
    z = np.asarray(z, dtype=float)
    if acc.shape[0] == 0:
        return a11 @ z
    return a11 @ z - a1c @ solve_block(acc, a1c.T @ z, tol=tol, dense_below=dense_below)


def clamp_laplacian(s: np.ndarray, rtol: float = CLAMP_RTOL) -> sp.csr_matrix:
    """Edge weights of a computed Schur complement after dropping noise.

    Off-diagonal entries below ``rtol * d_max`` in magnitude, and any
    positive off-diagonal entries, become zero. The returned symmetric
    weight matrix defines the Laplacian whose diagonal is the negated
    off-diagonal row sum, so zero row sums hold exactly.
    """
    s = np.array(s, dtype=float)
    d_max = float(np.max(np.diag(s))) if s.size else 0.0
    np.fill_diagonal(s, 0.0)
    s[np.abs(s) < rtol * d_max] = 0.0
    s[s > 0] = 0.0
    w = sp.csr_matrix(-0.5 * (s + s.T))
    w.sort_indices()
    return w


def kron_reduce(L: Laplacian, mask: VertexMask, tol: float = CG_TOL, dense_below: int = DENSE_BELOW) -> Laplacian:
    """Schur complement of ``L`` onto the kept vertices, returned as a clean Laplacian.

    Raises
    ------
    MaskTooSmall
        Fewer than two kept or no eliminated vertices.
    SolverFailure
        The block conjugate-gradient solve did not converge.
    """
    if mask.n_kept < 2 or mask.n_kept == mask.n:
        raise MaskTooSmall(f"need >= 2 kept and >= 1 eliminated vertices, got {mask.n_kept} of {mask.n}")
    s = schur_complement(L, mask, tol=tol, dense_below=dense_below)
    return laplacian(graph_from_adjacency(clamp_laplacian(s)))


def graph_from_laplacian(L, coords=None, atol: float = 1e-10) -> Graph:
    """Weighted graph whose combinatorial Laplacian is ``L``.

    Raises
    ------
    NotALaplacian
        Asymmetric, positive off-diagonal, or nonzero row sums beyond
        ``atol * d_max``.
    """
    m = (L.matrix if isinstance(L, Laplacian) else sp.csr_matrix(L)).tocsr().astype(float)
    if m.shape[0] != m.shape[1]:
        raise NotALaplacian("matrix is not square")
    d_max = float(np.max(np.abs(m.diagonal()))) if m.shape[0] else 0.0
    scale = max(d_max, 1.0)
    if m.nnz and abs(m - m.T).max() > atol * scale:
        raise NotALaplacian("matrix is not symmetric")
    w = -m.copy()
    w.setdiag(0)
    w.eliminate_zeros()
    if w.nnz and w.data.min() < 0:
        raise NotALaplacian("positive off-diagonal entry")
    rows = np.asarray(m.sum(axis=1)).ravel()
    if rows.size and np.max(np.abs(rows)) > atol * scale:
        raise NotALaplacian("row sums are not zero")
    w = 0.5 * (w + w.T)
    return graph_from_adjacency(w, coords)


# ---------------------------------------------------------------------------
# effective resistance
# ---------------------------------------------------------------------------


def effective_resistance(L, i: int, j: int, tol: float = 1e-12) -> float:
    """``(d_i - d_j)^T L^+ (d_i - d_j)`` from one CG solve on the range of ``L``."""
    m = L.matrix if isinstance(L, Laplacian) else sp.csr_matrix(L)
    n = m.shape[0]
    if i == j:
        raise ValueError("effective resistance needs two distinct vertices")
    b = np.zeros(n)
    b[i], b[j] = 1.0, -1.0
    x, _ = block_cg(m, b, tol=tol, maxiter=20 * n)
    return float(b @ x)


def effective_resistances(L, rows, cols, dense_below: int = 3000) -> np.ndarray:
    """Resistances of many vertex pairs via the Laplacian grounded at vertex 0.

    Removing row and column 0 leaves an SPD matrix ``G`` and
    ``d_R(i, j) = (e_i - e_j)^T G^{-1} (e_i - e_j)`` with ``e_0 = 0``.
    """
    m = (L.matrix if isinstance(L, Laplacian) else sp.csr_matrix(L)).tocsc()
    n = m.shape[0]
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    grounded = m[1:, 1:]
    if n - 1 < dense_below:
        z = np.zeros((n, n))
        if n > 1:
            z[1:, 1:] = sla.cho_solve(sla.cho_factor(grounded.toarray(), lower=True), np.eye(n - 1))
        return z[rows, rows] + z[cols, cols] - 2 * z[rows, cols]
    fac = SPDFactor(grounded, dense_below=0)
    out = np.empty(rows.size)
    for start in range(0, rows.size, CG_BATCH):
        r, c = rows[start:start + CG_BATCH], cols[start:start + CG_BATCH]
        b = np.zeros((n, r.size))
        b[r, np.arange(r.size)] += 1.0
        b[c, np.arange(r.size)] -= 1.0
        x = fac.solve(b[1:])
        out[start:start + r.size] = np.einsum("ij,ij->j", b[1:], x)
    return out


# ---------------------------------------------------------------------------
# sparsification
# ---------------------------------------------------------------------------


def sampling_probabilities(g: Graph) -> np.ndarray:
    """Edge probabilities proportional to weight times effective resistance (upper-triangle order)."""
    rows, cols, w = g.edges()
    r = effective_resistances(laplacian(g), rows, cols)
    score = np.clip(r, 0.0, None) * w
    return score / score.sum()


def _repair(g_orig: Graph, rows, cols, weights, n):
    """Reconnect with a maximum-weight spanning forest of original edges across components."""
    w = sp.csr_matrix((np.concatenate([weights, weights]),
                       (np.concatenate([rows, cols]), np.concatenate([cols, rows]))), shape=(n, n))
    labels = connected_components(w)
    if labels.max() == 0:
        return rows, cols, weights, False
    uf = _UnionFind(n)
    first = np.full(labels.max() + 1, -1)
    for v in range(n):
        if first[labels[v]] < 0:
            first[labels[v]] = v
        uf.union(v, int(first[labels[v]]))
    orows, ocols, ow = g_orig.edges()
    order = np.lexsort((ocols, orows, -ow))
    add_r, add_c, add_w = [], [], []
    for e in order:
        i, j = int(orows[e]), int(ocols[e])
        if uf.find(i) != uf.find(j):
            uf.union(i, j)
            add_r.append(i)
            add_c.append(j)
            add_w.append(float(ow[e]))
    return (np.concatenate([rows, add_r]).astype(np.int64), np.concatenate([cols, add_c]).astype(np.int64),
            np.concatenate([weights, add_w]), True)


def spectral_sparsify(g: Graph, cfg: SparsifyConfig) -> Graph:
    """Resample ``g`` by drawing ``Q`` edges with probability proportional to ``w_e * R_e``.

    Every draw adds ``w_e / (Q p_e)`` to the sampled edge. A disconnected
    result is repaired (see :func:`_repair`) and flagged in ``meta``.
    """
    rows, cols, w = g.edges()
    q = cfg.samples(g.n)
    meta = {"Q": q, "seed": cfg.seed, "repaired": False}
    if rows.size == 0:
        return g.with_meta(**meta)
    p = sampling_probabilities(g)
    rng = np.random.default_rng(cfg.seed)
    draws = rng.choice(rows.size, size=q, p=p)
    counts = np.bincount(draws, minlength=rows.size)
    hit = counts > 0
    new_w = w[hit] * counts[hit] / (q * p[hit])
    r, c, nw, repaired = _repair(g, rows[hit], cols[hit], new_w, g.n)
    meta["repaired"] = repaired
    adj = sp.csr_matrix((np.concatenate([nw, nw]), (np.concatenate([r, c]), np.concatenate([c, r]))),
                        shape=(g.n, g.n))
    adj.sort_indices()
    return Graph(g.n, adj, g.coords, {**g.meta, **meta})


def reduce_pipeline(L: Laplacian, mask: VertexMask, cfg: Optional[SparsifyConfig] = None,
                    sparsify: bool = False, with_info: bool = False):
    """Kron reduction onto the kept set, optionally followed by sparsification.

    With ``with_info=True`` returns ``(laplacian, info)`` where ``info``
    holds the sparsification ``Q``, seed and repair flag (empty when not
    sparsifying).
    """
    reduced = kron_reduce(L, mask)
    info = {}
    if sparsify:
        cfg = cfg or SparsifyConfig()
        sparse_g = spectral_sparsify(graph_from_laplacian(reduced), cfg)
        reduced = laplacian(sparse_g)
        info = {k: sparse_g.meta[k] for k in ("Q", "seed", "repaired")}
    return (reduced, info) if with_info else reduced


__all__ = [
    "SparsifyConfig", "kron_reduce", "graph_from_laplacian", "effective_resistance",
    "effective_resistances", "spectral_sparsify", "reduce_pipeline", "schur_complement",
    "schur_apply", "clamp_laplacian", "sampling_probabilities",
]
