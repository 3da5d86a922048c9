import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings, strategies as st

from conftest import dense_laplacian
from graphpyramid.errors import (
    DisconnectedAfterRetries,
    DuplicateEdge,
    IndexOutOfRange,
    InvalidFamilyParameters,
    NonPositiveWeight,
    SelfLoop,
)
from graphpyramid.graph import (
    balanced_tree,
    build_graph,
    complete,
    connected_components,
    generate,
    graph_from_adjacency,
    grid,
    is_bipartite,
    is_connected,
    k_rbg,
    laplacian,
    path,
    random_geometric,
    ring,
    star,
    two_coloring,
)


class TestBuildGraph:
    def test_k2(self):
        g = build_graph(2, [(0, 1, 1.0)])
        assert g.n == 2 and g.num_edges == 1
        assert g.edge_list() == [(0, 1, 1.0)]

    def test_p4(self):
        g = build_graph(4, [(0, 1, 1), (1, 2, 1), (2, 3, 1)])
        assert g.edge_list() == path(4).edge_list()

    def test_reversed_pairs_are_normalized(self):
        g = build_graph(3, [(1, 0, 2.0), (2, 1, 3.0)])
        assert g.edge_list() == [(0, 1, 2.0), (1, 2, 3.0)]

    def test_adjacency_symmetric_sorted(self):
        g = build_graph(4, [(3, 0, 1.0), (2, 1, 0.5), (0, 2, 2.0)])
        a = g.adjacency
        assert (a != a.T).nnz == 0
        assert a.has_sorted_indices

    @pytest.mark.parametrize("edges, exc", [
        ([(0, 0, 1.0)], SelfLoop),
        ([(0, 1, 0.0)], NonPositiveWeight),
        ([(0, 1, -1.0)], NonPositiveWeight),
        ([(0, 1, 1.0), (1, 0, 2.0)], DuplicateEdge),
        ([(0, 3, 1.0)], IndexOutOfRange),
        ([(-1, 1, 1.0)], IndexOutOfRange),
    ])
    def test_rejects(self, edges, exc):
        with pytest.raises(exc):
            build_graph(3, edges)

    def test_rejects_nan_weight(self):
        with pytest.raises(NonPositiveWeight):
            build_graph(2, [(0, 1, float("nan"))])


class TestLaplacian:
    def test_k2_combinatorial(self):
        L = laplacian(path(2))
        np.testing.assert_array_equal(L.dense(), [[1, -1], [-1, 1]])

    def test_k2_normalized_equals_combinatorial(self):
        np.testing.assert_allclose(laplacian(path(2), "normalized").dense(), [[1, -1], [-1, 1]])

    def test_p3(self):
        expected = np.array([[1, -1, 0], [-1, 2, -1], [0, -1, 1]], dtype=float)
        np.testing.assert_array_equal(laplacian(path(3)).dense(), expected)

    def test_matches_dense_definition(self, geo60):
        L = laplacian(geo60)
        np.testing.assert_allclose(L.dense(), dense_laplacian(geo60.adjacency.toarray()), atol=1e-14)

    def test_regularized(self, geo60):
        L = laplacian(geo60)
        R = laplacian(geo60, "regularized", epsilon=0.05)
        np.testing.assert_allclose(R.dense(), L.dense() + 0.05 * np.eye(geo60.n))
        assert R.kind == "regularized" and R.epsilon == 0.05

    def test_regularized_needs_epsilon(self):
        with pytest.raises(ValueError):
            laplacian(path(3), "regularized")
        with pytest.raises(ValueError):
            laplacian(path(3), "regularized", epsilon=0.0)

    def test_epsilon_only_for_regularized(self):
        with pytest.raises(ValueError):
            laplacian(path(3), "combinatorial", epsilon=0.1)

    def test_normalized_spectrum_in_0_2(self, geo60):
        vals = np.linalg.eigvalsh(laplacian(geo60, "normalized").dense())
        assert vals.min() > -1e-10 and vals.max() < 2 + 1e-10

    def test_sparsity_pattern(self, geo60):
        L = laplacian(geo60)
        off = L.matrix.copy()
        off.setdiag(0)
        off.eliminate_zeros()
        assert ((off != 0) != (geo60.adjacency != 0)).nnz == 0


class TestConnectivity:
    def test_p4(self):
        assert is_connected(path(4))

    def test_two_disjoint_edges(self):
        g = build_graph(4, [(0, 1, 1.0), (2, 3, 1.0)])
        assert not is_connected(g)
        assert len(set(connected_components(g))) == 2

    def test_single_vertex(self):
        assert is_connected(build_graph(1, []))


class TestGenerators:
    def test_path(self):
        g = generate("path", n=4)
        assert g.edge_list() == [(0, 1, 1.0), (1, 2, 1.0), (2, 3, 1.0)]

    def test_ring(self):
        g = generate("ring", n=6)
        assert g.num_edges == 6
        np.testing.assert_array_equal(g.degrees, 2)

    def test_k_rbg_3_6_is_k33(self):
        g = k_rbg(3, 6, seed=0)
        a = g.adjacency.toarray()
        np.testing.assert_array_equal(a[:3, 3:], np.ones((3, 3)))
        np.testing.assert_array_equal(a[:3, :3], 0)

    @pytest.mark.parametrize("k, n, seed", [(2, 10, 1), (3, 20, 2), (4, 40, 3), (5, 60, 4)])
    def test_k_rbg_regular_bipartite(self, k, n, seed):
        g = k_rbg(k, n, seed=seed)
        np.testing.assert_array_equal(g.degrees, k)
        assert is_bipartite(g) and is_connected(g)

    def test_grid(self):
        g = grid(3, 4)
        assert g.n == 12 and g.num_edges == 3 * 3 + 2 * 4

    def test_grid_wrap(self):
        g = grid(4, 4, wrap=True)
        np.testing.assert_array_equal(g.degrees, 4)

    def test_balanced_tree(self):
        g = balanced_tree(2, 3)
        assert g.n == 15 and g.num_edges == 14 and is_connected(g)

    def test_complete_and_star(self):
        assert complete(5).num_edges == 10
        s = star(3)
        assert s.n == 4 and list(s.degrees) == [3, 1, 1, 1]

    @pytest.mark.parametrize("family, params", [
        ("path", {"n": 0}),
        ("ring", {"n": 2}),
        ("grid", {"rows": 0, "cols": 3}),
        ("balanced_tree", {"branching": 0, "depth": 2}),
        ("k_rbg", {"k": 3, "n": 7}),
        ("k_rbg", {"k": 4, "n": 6}),
        ("random_geometric", {"n": 10, "radius": -1.0}),
        ("complete", {"n": 0}),
        ("no_such_family", {}),
    ])
    def test_bad_parameters(self, family, params):
        with pytest.raises(InvalidFamilyParameters):
            generate(family, **params)

    def test_random_geometric_deterministic(self):
        a = random_geometric(80, 0.2, seed=7)
        b = random_geometric(80, 0.2, seed=7)
        assert a == b
        assert a != random_geometric(80, 0.2, seed=8)

    def test_random_geometric_weights(self):
        g = random_geometric(50, 0.3, seed=4)
        r = float(g.meta["radius"])
        rows, cols, w = g.edges()
        d = np.linalg.norm(g.coords[rows] - g.coords[cols], axis=1)
        assert np.all(d <= r + 1e-12)
        np.testing.assert_allclose(w, np.exp(-d ** 2 / (2 * (r / 2) ** 2)))
        assert is_connected(g)

    def test_random_geometric_retry_grows_radius(self):
        g = random_geometric(100, 0.02, seed=1)
        assert is_connected(g)
        assert float(g.meta["radius"]) > 0.02

    def test_random_geometric_gives_up(self):
        with pytest.raises(DisconnectedAfterRetries):
            random_geometric(100, 0.001, seed=1, max_retries=2)

    @pytest.mark.parametrize("g", [path(7), ring(9), grid(3, 5), grid(4, 4, wrap=True), balanced_tree(3, 2),
                                   k_rbg(3, 12, seed=5), random_geometric(40, 0.3, seed=2), complete(6), star(5)],
                             ids=repr)
    def test_row_sums_zero(self, g):
        L = laplacian(g)
        rs = np.abs(np.asarray(L.matrix.sum(axis=1)).ravel())
        assert rs.max() <= 1e-12 * L.d_max

    @pytest.mark.parametrize("g", [grid(3, 5), grid(2, 2), balanced_tree(2, 3), balanced_tree(3, 2), path(6)])
    def test_bipartite_families(self, g):
        colors = two_coloring(g)
        rows, cols, _ = g.edges()
        assert np.all(colors[rows] != colors[cols])

    def test_odd_ring_not_bipartite(self):
        assert two_coloring(ring(5)) is None


class TestAdjacencyRoundTrip:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(2, 12), st.integers(0, 2**31 - 1))
    def test_from_adjacency(self, n, seed):
        rng = np.random.default_rng(seed)
        w = np.triu(rng.uniform(0.1, 2.0, (n, n)) * (rng.random((n, n)) < 0.5), 1)
        w = w + w.T
        g = graph_from_adjacency(sp.csr_matrix(w))
        np.testing.assert_array_equal(g.adjacency.toarray(), w)
        assert g == build_graph(n, g.edge_list())
