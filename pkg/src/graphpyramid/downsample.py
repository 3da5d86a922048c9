"""Vertex selection by the polarity of the largest Laplacian eigenvector."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateSplit, DimensionMismatch, NoConvergence, NotBipartite
from .graph import _as_adjacency, two_coloring
from .spectral import canonicalize_sign, power_method


@dataclass(frozen=True, eq=False)
class VertexMask:
    """Keep/eliminate indicator over the vertices of one graph.

    ``method`` records how the mask was produced (``"polarity"``,
    ``"median"`` for the repeated-eigenvalue fallback, or ``"given"``).
    """

    keep: np.ndarray
    method: str = "given"

    def __post_init__(self):
        object.__setattr__(self, "keep", np.asarray(self.keep, dtype=bool).copy())

    @classmethod
    def from_indices(cls, n: int, kept, method: str = "given") -> "VertexMask":
        keep = np.zeros(n, dtype=bool)
        keep[np.asarray(list(kept), dtype=np.int64)] = True
        return cls(keep, method)

    @property
    def n(self) -> int:
        return self.keep.shape[0]

    @property
    def kept(self) -> np.ndarray:
        return np.flatnonzero(self.keep)

    @property
    def eliminated(self) -> np.ndarray:
        return np.flatnonzero(~self.keep)

    @property
    def n_kept(self) -> int:
        return int(self.keep.sum())

    def downsample(self, x):
        """Apply the selection matrix: keep the rows of ``x`` indexed by the kept set."""
        x = np.asarray(x)
        if x.shape[0] != self.n:
            raise DimensionMismatch(f"signal length {x.shape[0]} differs from mask length {self.n}")
        return x[self.keep]

    def upsample(self, z):
        """Adjoint of :meth:`downsample`: place ``z`` on the kept set, zeros elsewhere."""
        z = np.asarray(z, dtype=float)
        if z.shape[0] != self.n_kept:
            raise DimensionMismatch(f"{z.shape[0]} values for {self.n_kept} kept vertices")
        out = np.zeros((self.n,) + z.shape[1:])
        out[self.keep] = z
        return out

    def __eq__(self, other):
        return isinstance(other, VertexMask) and np.array_equal(self.keep, other.keep)

    def __repr__(self):
        return f"VertexMask(n={self.n}, kept={self.n_kept}, method={self.method!r})"


def median_split(v: np.ndarray) -> VertexMask:
    """Keep the upper half of ``v`` (ties resolved by lower index first)."""
    v = np.asarray(v, dtype=float)
    n = v.shape[0]
    order = np.lexsort((np.arange(n), -v))
    keep = np.zeros(n, dtype=bool)
    keep[order[: (n + 1) // 2]] = True
    return VertexMask(keep, "median")


def select_largest_eigenvector(L, seed=0, fallback: bool = False, **power_kwargs) -> VertexMask:
    """Keep the vertices where the (canonicalized) largest eigenvector is nonnegative.

    The eigenvector comes from :func:`power_method`. With ``fallback=True`` a
    non-converged polarity or a one-sided split falls back to
    :func:`median_split` of the last iterate instead of raising.
    """
    try:
        _, u = power_method(L, seed=seed, **power_kwargs)
    except NoConvergence as exc:
        if not fallback:
            raise
        return median_split(exc.vector)
    keep = u >= 0
    if keep.all() or not keep.any():
        if fallback:
            return median_split(u)
        raise DegenerateSplit("largest eigenvector has a single polarity")
    return VertexMask(keep, "polarity")


def polarity_mask(u: np.ndarray) -> VertexMask:
    """Mask from an explicit eigenvector (after sign canonicalization)."""
    return VertexMask(canonicalize_sign(u) >= 0, "polarity")


class _UnionFind:
    def __init__(self, n):
        self.parent = np.arange(n)

    def find(self, i):
        root = i
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[i] != root:
            self.parent[i], i = root, self.parent[i]
        return root

    def union(self, i, j):
        ri, rj = self.find(i), self.find(j)
        if ri != rj:
            self.parent[max(ri, rj)] = min(ri, rj)


def count_strong_nodal_domains(f, g) -> tuple[int, int]:
    """Number of positive and negative strong nodal domains of ``f`` on ``g``.

    Zero-valued vertices belong to no strong domain.
    """
    a = _as_adjacency(g)
    f = np.asarray(f, dtype=float)
    if f.shape[0] != a.shape[0]:
        raise DimensionMismatch("signal length differs from vertex count")
    sign = np.sign(f)
    uf = _UnionFind(a.shape[0])
    coo = a.tocoo()
    for i, j in zip(coo.row, coo.col):
        if i < j and sign[i] != 0 and sign[i] == sign[j]:
            uf.union(i, j)
    roots_pos = {uf.find(i) for i in np.flatnonzero(sign > 0)}
    roots_neg = {uf.find(i) for i in np.flatnonzero(sign < 0)}
    return len(roots_pos), len(roots_neg)


def is_bipartition_split(mask: VertexMask, g) -> bool:
    """True iff every edge of the bipartite graph ``g`` joins a kept and an eliminated vertex."""
    a = _as_adjacency(g)
    if mask.n != a.shape[0]:
        raise DimensionMismatch("mask length differs from vertex count")
    if two_coloring(a) is None:
        raise NotBipartite("graph is not bipartite")
    coo = a.tocoo()
    return bool(np.all(mask.keep[coo.row] != mask.keep[coo.col]))
