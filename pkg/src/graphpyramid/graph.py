"""Weighted undirected graphs, their Laplacians, and the test-graph generators."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Optional

import numpy as np
import scipy.sparse as sp
from scipy.spatial import cKDTree

from .errors import (
    DisconnectedAfterRetries,
    DuplicateEdge,
    IndexOutOfRange,
    InvalidFamilyParameters,
    NonPositiveWeight,
    SelfLoop,
)

LAPLACIAN_KINDS = ("combinatorial", "normalized", "regularized")


@dataclass(frozen=True, eq=False)
class Graph:
    """Loopless weighted undirected graph.

    ``adjacency`` is a CSR matrix holding both triangles with sorted column
    indices. ``coords`` optionally carries vertex positions (used for layout
    and for coordinate-based synthetic signals); ``meta`` carries free-form
    provenance such as the sparsification repair flag.
    """

    n: int
    adjacency: sp.csr_matrix
    coords: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    @property
    def num_edges(self) -> int:
        return int(sp.triu(self.adjacency, k=1).nnz)

    def edges(self):
        """Return ``(rows, cols, weights)`` of the upper triangle, sorted by (row, col)."""
        upper = sp.triu(self.adjacency, k=1).tocsr()
        upper.sort_indices()
        coo = upper.tocoo()
        return coo.row.astype(np.int64), coo.col.astype(np.int64), coo.data.astype(float)

    def edge_list(self) -> list[tuple[int, int, float]]:
        rows, cols, weights = self.edges()
        return [(int(i), int(j), float(w)) for i, j, w in zip(rows, cols, weights)]

    @property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def neighbors(self, i: int) -> np.ndarray:
        a = self.adjacency
        return a.indices[a.indptr[i]:a.indptr[i + 1]]

    def with_meta(self, **meta) -> "Graph":
        return Graph(self.n, self.adjacency, self.coords, {**self.meta, **meta})

    def __eq__(self, other):
        if not isinstance(other, Graph) or self.n != other.n:
            return False
        a, b = self.edges(), other.edges()
        if not all(np.array_equal(x, y) for x, y in zip(a, b)):
            return False
        if (self.coords is None) != (other.coords is None):
            return False
        return self.coords is None or np.array_equal(self.coords, other.coords)

    def __repr__(self):
        return f"Graph(n={self.n}, edges={self.num_edges})"


@dataclass(frozen=True, eq=False)
class Laplacian:
    """Sparse symmetric Laplacian-type matrix tagged with its kind."""

    matrix: sp.csr_matrix
    kind: str = "combinatorial"
    epsilon: Optional[float] = None

    @property
    def n(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    @property
    def d_max(self) -> float:
        return float(self.matrix.diagonal().max()) if self.n else 0.0

    def dense(self) -> np.ndarray:
        return self.matrix.toarray()

    def __matmul__(self, other):
        return self.matrix @ other

    def regularized(self, epsilon: float) -> "Laplacian":
        if self.kind != "combinatorial":
            raise ValueError("only a combinatorial Laplacian can be regularized")
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        m = (self.matrix + epsilon * sp.identity(self.n, format="csr")).tocsr()
        m.sort_indices()
        return Laplacian(m, "regularized", float(epsilon))

    def __repr__(self):
        return f"Laplacian(n={self.n}, kind={self.kind!r}, nnz={self.matrix.nnz})"


def _csr(rows, cols, vals, n) -> sp.csr_matrix:
    m = sp.csr_matrix((vals, (rows, cols)), shape=(n, n))
    m.sum_duplicates()
    m.sort_indices()
    return m


def build_graph(n: int, edge_list: Iterable, coords=None) -> Graph:
    """Build a :class:`Graph` from ``(i, j, w)`` triples with 0-based indices.

    Raises
    ------
    SelfLoop, NonPositiveWeight, DuplicateEdge, IndexOutOfRange
    """
    n = int(n)
    if n < 1:
        raise IndexOutOfRange(f"vertex count must be positive, got {n}")
    rows, cols, vals = [], [], []
    seen = set()
    for i, j, w in edge_list:
        i, j, w = int(i), int(j), float(w)
        if not (0 <= i < n and 0 <= j < n):
            raise IndexOutOfRange(f"edge ({i}, {j}) outside 0..{n - 1}")
        if i == j:
            raise SelfLoop(f"self-loop at vertex {i}")
        if not w > 0 or not np.isfinite(w):
            raise NonPositiveWeight(f"edge ({i}, {j}) has weight {w}")
        key = (i, j) if i < j else (j, i)
        if key in seen:
            raise DuplicateEdge(f"edge {key} given twice")
        seen.add(key)
        rows += [i, j]
        cols += [j, i]
        vals += [w, w]
    if coords is not None:
        coords = np.asarray(coords, dtype=float)
        if coords.shape[0] != n:
            raise IndexOutOfRange("coords must have one row per vertex")
    return Graph(n, _csr(rows, cols, vals, n), coords)


def graph_from_adjacency(w, coords=None, meta=None) -> Graph:
    """Wrap a symmetric nonnegative weight matrix with zero diagonal as a Graph."""
    w = sp.csr_matrix(w, dtype=float)
    w.eliminate_zeros()
    if w.shape[0] != w.shape[1]:
        raise IndexOutOfRange("adjacency must be square")
    if np.any(w.diagonal() != 0):
        raise SelfLoop("adjacency has a nonzero diagonal")
    if np.any(w.data < 0):
        raise NonPositiveWeight("adjacency has negative entries")
    if abs(w - w.T).max() if w.nnz else 0.0:
        raise ValueError("adjacency is not symmetric")
    w.sort_indices()
    return Graph(w.shape[0], w, coords, dict(meta or {}))


def laplacian(g: Graph, kind: str = "combinatorial", epsilon: Optional[float] = None) -> Laplacian:
    """Combinatorial ``D - W``, normalized ``D^-1/2 (D - W) D^-1/2``, or regularized ``D - W + eps I``."""
    if kind not in LAPLACIAN_KINDS:
        raise ValueError(f"unknown Laplacian kind {kind!r}")
    if (kind == "regularized") != (epsilon is not None):
        raise ValueError("epsilon is required for, and only for, the regularized kind")
    deg = g.degrees
    lap = (sp.diags(deg) - g.adjacency).tocsr()
    if kind == "normalized":
        with np.errstate(divide="ignore"):
            inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(deg), 0.0)
        s = sp.diags(inv_sqrt)
        lap = (s @ lap @ s).tocsr()
    elif kind == "regularized":
        if not epsilon > 0:
            raise ValueError("epsilon must be positive")
        lap = (lap + epsilon * sp.identity(g.n)).tocsr()
    lap.sort_indices()
    return Laplacian(lap, kind, None if epsilon is None else float(epsilon))


def _as_adjacency(g) -> sp.csr_matrix:
    if isinstance(g, Graph):
        return g.adjacency
    if isinstance(g, Laplacian):
        m = g.matrix.copy().tocsr()
        m.setdiag(0)
        m.eliminate_zeros()
        return m
    return sp.csr_matrix(g)


def connected_components(g) -> np.ndarray:
    """Label each vertex with its component index (breadth-first, in vertex order)."""
    a = _as_adjacency(g)
    n = a.shape[0]
    labels = np.full(n, -1, dtype=np.int64)
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        labels[start] = current
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in a.indices[a.indptr[u]:a.indptr[u + 1]]:
                if labels[v] < 0:
                    labels[v] = current
                    queue.append(v)
        current += 1
    return labels


def is_connected(g) -> bool:
    labels = connected_components(g)
    return labels.size == 0 or labels.max() == 0


def two_coloring(g) -> Optional[np.ndarray]:
    """Return a 0/1 bipartition coloring by breadth-first search, or None if not bipartite."""
    a = _as_adjacency(g)
    n = a.shape[0]
    color = np.full(n, -1, dtype=np.int64)
    for start in range(n):
        if color[start] >= 0:
            continue
        color[start] = 0
        queue = deque([start])
        while queue:
            u = queue.popleft()
            for v in a.indices[a.indptr[u]:a.indptr[u + 1]]:
                if color[v] < 0:
                    color[v] = 1 - color[u]
                    queue.append(v)
                elif color[v] == color[u]:
                    return None
    return color


def is_bipartite(g) -> bool:
    return two_coloring(g) is not None


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------


def _positive_int(name, value, minimum=1):
    if int(value) != value or value < minimum:
        raise InvalidFamilyParameters(f"{name} must be an integer >= {minimum}, got {value}")
    return int(value)


def path(n: int) -> Graph:
    n = _positive_int("n", n, 2)
    coords = np.column_stack([np.arange(n, dtype=float), np.zeros(n)])
    return build_graph(n, [(i, i + 1, 1.0) for i in range(n - 1)], coords)


def ring(n: int) -> Graph:
    n = _positive_int("n", n, 3)
    t = 2 * np.pi * np.arange(n) / n
    coords = np.column_stack([np.cos(t), np.sin(t)])
    return build_graph(n, [(i, (i + 1) % n, 1.0) for i in range(n)], coords)


def complete(n: int) -> Graph:
    n = _positive_int("n", n, 2)
    t = 2 * np.pi * np.arange(n) / n
    coords = np.column_stack([np.cos(t), np.sin(t)])
    return build_graph(n, [(i, j, 1.0) for i in range(n) for j in range(i + 1, n)], coords)


def star(leaves: int) -> Graph:
    """Center vertex 0 joined to ``leaves`` pendant vertices."""
    leaves = _positive_int("leaves", leaves, 1)
    t = 2 * np.pi * np.arange(leaves) / leaves
    coords = np.vstack([[0.0, 0.0], np.column_stack([np.cos(t), np.sin(t)])])
    return build_graph(leaves + 1, [(0, i, 1.0) for i in range(1, leaves + 1)], coords)


def grid(rows: int, cols: int, wrap: bool = False) -> Graph:
    """Rectangular 4-connected grid; vertex ``r * cols + c``. ``wrap`` gives the torus."""
    minimum = 3 if wrap else 1
    rows = _positive_int("rows", rows, minimum)
    cols = _positive_int("cols", cols, minimum)
    if rows * cols < 2:
        raise InvalidFamilyParameters("grid needs at least two vertices")
    edges = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols or wrap:
                edges.append((v, r * cols + (c + 1) % cols, 1.0))
            if r + 1 < rows or wrap:
                edges.append((v, ((r + 1) % rows) * cols + c, 1.0))
    rr, cc = np.divmod(np.arange(rows * cols), cols)
    coords = np.column_stack([cc.astype(float), -rr.astype(float)])
    return build_graph(rows * cols, edges, coords)


def balanced_tree(branching: int, depth: int) -> Graph:
    """Complete ``branching``-ary tree of the given depth, breadth-first numbering from root 0."""
    branching = _positive_int("branching", branching, 1)
    depth = _positive_int("depth", depth, 1)
    edges = []
    levels = [[0]]
    nxt = 1
    for _ in range(depth):
        layer = []
        for parent in levels[-1]:
            for _ in range(branching):
                edges.append((parent, nxt, 1.0))
                layer.append(nxt)
                nxt += 1
        levels.append(layer)
    coords = np.zeros((nxt, 2))
    for d, layer in enumerate(levels):
        xs = np.linspace(0.0, 1.0, len(layer) + 2)[1:-1]
        coords[layer, 0] = xs
        coords[layer, 1] = -d
    return build_graph(nxt, edges, coords)


def tree_depths(branching: int, depth: int) -> np.ndarray:
    """Depth of every vertex of :func:`balanced_tree` (same numbering)."""
    out = [0]
    for d in range(1, depth + 1):
        out += [d] * branching ** d
    return np.array(out)


def k_rbg(k: int, n: int, seed=None, max_tries: int = 200) -> Graph:
    """Random connected unweighted k-regular bipartite graph.

    Vertices ``0 .. n/2 - 1`` form one side and ``n/2 .. n - 1`` the other.
    A random Hamiltonian cycle guarantees connectivity (for ``k >= 2``); the
    remaining ``k - 2`` perfect matchings are drawn at random without
    repeating an edge.
    """
    k = _positive_int("k", k, 1)
    n = _positive_int("n", n, 2)
    if n % 2:
        raise InvalidFamilyParameters("k_rbg requires an even vertex count")
    half = n // 2
    if k > half or (k == 1 and half > 1):
        raise InvalidFamilyParameters(f"no connected {k}-regular bipartite graph on {n} vertices")
    rng = np.random.default_rng(seed)
    if k == 1:
        return build_graph(2, [(0, 1, 1.0)])
    if k == half:
        return build_graph(n, [(i, half + j, 1.0) for i in range(half) for j in range(half)])
    for _ in range(max_tries):
        left = rng.permutation(half)
        right = rng.permutation(half) + half
        pairs = set()
        for t in range(half):
            pairs.add((int(left[t]), int(right[t])))
            pairs.add((int(left[(t + 1) % half]), int(right[t])))
        ok = True
        for _ in range(k - 2):
            for _attempt in range(max_tries):
                perm = rng.permutation(half) + half
                cand = {(i, int(perm[i])) for i in range(half)}
                if not cand & pairs:
                    pairs |= cand
                    break
            else:
                ok = False
                break
        if ok and len(pairs) == k * half:
            return build_graph(n, [(i, j, 1.0) for i, j in sorted(pairs)])
    raise InvalidFamilyParameters(f"could not realize a {k}-regular bipartite graph on {n} vertices")


def random_geometric(n: int, radius: float, seed=None, max_retries: int = 30, growth: float = 1.1) -> Graph:
    """Sensor-style graph: uniform points in the unit square, Gaussian weights within ``radius``.

    ``w_ij = exp(-d_ij^2 / (2 sigma^2))`` with ``sigma = radius / 2`` for
    ``d_ij <= radius``. If the result is disconnected the radius grows by
    ``growth`` (same points) up to ``max_retries`` times.
    """
    n = _positive_int("n", n, 2)
    if not radius > 0:
        raise InvalidFamilyParameters(f"radius must be positive, got {radius}")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(size=(n, 2))
    tree = cKDTree(pts)
    r = float(radius)
    for attempt in range(max_retries + 1):
        pairs = tree.query_pairs(r, output_type="ndarray")
        if len(pairs):
            pairs = pairs[np.lexsort((pairs[:, 1], pairs[:, 0]))]
            d2 = np.sum((pts[pairs[:, 0]] - pts[pairs[:, 1]]) ** 2, axis=1)
            sigma = r / 2
            w = np.exp(-d2 / (2 * sigma ** 2))
            rows = np.concatenate([pairs[:, 0], pairs[:, 1]])
            cols = np.concatenate([pairs[:, 1], pairs[:, 0]])
            g = Graph(n, _csr(rows, cols, np.concatenate([w, w]), n), pts,
                      {"radius": r, "retries": attempt})
            if is_connected(g):
                return g
        r *= growth
    raise DisconnectedAfterRetries(f"random geometric graph still disconnected at radius {r:.4g}")


GENERATORS = {
    "path": path,
    "ring": ring,
    "grid": grid,
    "balanced_tree": balanced_tree,
    "k_rbg": k_rbg,
    "random_geometric": random_geometric,
    "complete": complete,
    "star": star,
}


def generate(family: str, **params) -> Graph:
    """Dispatch to a named generator, e.g. ``generate("grid", rows=4, cols=4, wrap=True)``."""
    key = family.replace("-", "_")
    if key not in GENERATORS:
        raise InvalidFamilyParameters(f"unknown graph family {family!r}")
    try:
        return GENERATORS[key](**params)
    except TypeError as exc:
        raise InvalidFamilyParameters(str(exc)) from exc
