import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kgcn.errors import InsufficientLabels, InvalidEdge, ShapeError
from kgcn.graph import (
    build_graph,
    connected_components,
    diffusion,
    erdos_renyi,
    make_split,
)
from kgcn.linalg import spectrum


class TestBuildGraph:
    def test_single_edge(self):
        g = build_graph([(0, 1)], 2)
        assert g.adjacency.to_dense().tolist() == [[0, 1], [1, 0]]

    def test_dedupe_and_self_loop_drop(self):
        g = build_graph([(0, 1), (1, 0), (0, 0)], 2)
        assert g.adjacency.to_dense().tolist() == [[0, 1], [1, 0]]
        assert g.edges == [(0, 1)]

    def test_two_disjoint_edges(self):
        g = build_graph([(0, 1), (2, 3)], 4)
        assert g.adjacency.nnz == 4
        k, labels = connected_components(g)
        assert k == 2
        assert labels.tolist() == [0, 0, 1, 1]

    def test_out_of_range_rejected(self):
        with pytest.raises(InvalidEdge):
            build_graph([(0, 5)], 3)
        with pytest.raises(InvalidEdge):
            build_graph([(-1, 0)], 3)

    def test_csr_canonical_and_symmetric(self):
        g = build_graph([(3, 1), (0, 2), (1, 0), (2, 3)], 4)
        a = g.adjacency
        for r in range(a.rows):
            row = a.col_idx[a.row_ptr[r] : a.row_ptr[r + 1]]
            assert np.all(np.diff(row) > 0)
        assert a.is_bitwise_symmetric()


class TestDiffusion:
    def test_single_edge_renormalized(self):
        g = build_graph([(0, 1)], 2)
        d = diffusion(g, "renormalized_adjacency").matrix.to_dense()
        assert d.tolist() == [[0.5, 0.5], [0.5, 0.5]]

    def test_triangle_renormalized(self):
        g = build_graph([(0, 1), (1, 2), (0, 2)], 3)
        d = diffusion(g, "renormalized_adjacency").matrix
        np.testing.assert_allclose(d.to_dense(), np.full((3, 3), 1.0 / 3.0), atol=1e-15)
        eigs = spectrum(d, "dense_full")
        np.testing.assert_allclose(eigs, [0.0, 0.0, 1.0], atol=1e-12)

    def test_single_edge_laplacian(self):
        g = build_graph([(0, 1)], 2)
        d = diffusion(g, "laplacian").matrix.to_dense()
        assert d.tolist() == [[1.0, -1.0], [-1.0, 1.0]]

    def test_affinity(self):
        g = build_graph([(0, 1)], 2)
        d = diffusion(g, "affinity").matrix.to_dense()
        assert d.tolist() == [[1.0, 1.0], [1.0, 1.0]]

    def test_normalized_laplacian_isolated_node(self):
        # node 2 is isolated; the zero-degree convention leaves just the I term
        g = build_graph([(0, 1)], 3)
        d = diffusion(g, "normalized_laplacian").matrix.to_dense()
        np.testing.assert_allclose(d, [[1, -1, 0], [-1, 1, 0], [0, 0, 1]], atol=1e-15)

    def test_renormalized_isolated_node_no_nan(self):
        g = build_graph([], 3)
        d = diffusion(g, "renormalized_adjacency").matrix.to_dense()
        np.testing.assert_allclose(d, np.eye(3))

    def test_unknown_kind(self):
        with pytest.raises(ShapeError):
            diffusion(build_graph([], 1), "bogus")

    @pytest.mark.parametrize("seed", [0, 1, 2, 3])
    def test_renormalized_spectral_range_and_multiplicity(self, seed):
        rng = np.random.Generator(np.random.PCG64(seed))
        parts = int(rng.integers(1, 4))
        edges, offset = [], 0
        for _ in range(parts):
            size = int(rng.integers(5, 40))
            sub = erdos_renyi(size, 0.3, int(rng.integers(0, 2**31)))
            edges.extend((u + offset, v + offset) for u, v in sub.edges)
            for i in range(size - 1):  # path keeps the part connected
                edges.append((offset + i, offset + i + 1))
            offset += size
        g = build_graph(edges, offset)
        k, _ = connected_components(g)
        op = diffusion(g, "renormalized_adjacency").matrix
        assert op.is_bitwise_symmetric()
        assert np.all(op.values >= 0.0)
        eigs = spectrum(op, "dense_full")
        assert eigs[-1] == pytest.approx(1.0, abs=1e-8)
        assert eigs[0] > -1.0
        assert int(np.count_nonzero(eigs >= 1.0 - 1e-8)) == k


class TestConnectedComponents:
    def test_triangle(self):
        g = build_graph([(0, 1), (1, 2), (0, 2)], 3)
        assert connected_components(g)[0] == 1

    def test_isolated_nodes(self):
        g = build_graph([], 5)
        k, labels = connected_components(g)
        assert k == 5
        assert labels.tolist() == [0, 1, 2, 3, 4]

    def test_labels_first_encounter_order(self):
        g = build_graph([(0, 3), (1, 2)], 4)
        _, labels = connected_components(g)
        assert labels.tolist() == [0, 1, 1, 0]


class TestErdosRenyi:
    def test_edge_count_within_binomial_band(self):
        # C(1000,2) Bernoulli(0.01) trials: mean 4995, 5 sigma ~ 352
        g = erdos_renyi(1000, 0.01, seed=42)
        assert abs(g.n_edges - 4995) <= 352

    def test_p_zero_empty(self):
        assert erdos_renyi(50, 0.0, 1).n_edges == 0

    def test_p_one_complete(self):
        g = erdos_renyi(20, 1.0, 1)
        assert g.n_edges == 20 * 19 // 2

    def test_reproducible(self):
        a = erdos_renyi(100, 0.05, seed=7)
        b = erdos_renyi(100, 0.05, seed=7)
        assert a.edges == b.edges
        c = erdos_renyi(100, 0.05, seed=8)
        assert a.edges != c.edges

    def test_p_out_of_range(self):
        with pytest.raises(ShapeError):
            erdos_renyi(10, 1.5, 0)


class TestMakeSplit:
    def test_public_sizes(self):
        # 7 classes with >= 20 instances each: 140 training nodes
        rng = np.random.Generator(np.random.PCG64(0))
        labels = rng.integers(0, 7, 2708)
        s = make_split(labels, "public", seed=3)
        assert s.train_idx.size == 140
        assert s.val_idx.size == 500
        assert s.test_idx.size == 1000
        for c in range(7):
            assert np.count_nonzero(labels[s.train_idx] == c) == 20

    def test_percent_floor(self):
        labels = np.zeros(2708, dtype=int)
        s = make_split(labels, "percent", seed=0, p=0.01)
        assert s.train_idx.size == 27

    def test_percent_no_validation(self):
        labels = np.zeros(300, dtype=int)
        s = make_split(labels, "percent_no_validation", seed=0, p=0.1)
        assert s.val_idx.size == 0
        assert s.train_idx.size + s.test_idx.size == 300

    def test_determinism(self):
        labels = np.arange(2000) % 7
        a = make_split(labels, "public", seed=9)
        b = make_split(labels, "public", seed=9)
        assert np.array_equal(a.train_idx, b.train_idx)
        assert np.array_equal(a.val_idx, b.val_idx)
        assert np.array_equal(a.test_idx, b.test_idx)

    def test_insufficient_labels(self):
        labels = np.zeros(2000, dtype=int)
        labels[:5] = 1  # class 1 has five instances
        with pytest.raises(InsufficientLabels):
            make_split(labels, "public", seed=0)

    @settings(max_examples=30, deadline=None)
    @given(
        n=st.integers(min_value=10, max_value=400),
        n_classes=st.integers(min_value=1, max_value=5),
        p=st.floats(min_value=0.01, max_value=0.9),
        seed=st.integers(min_value=0, max_value=2**32 - 1),
        mode=st.sampled_from(["percent", "percent_no_validation"]),
    )
    def test_percent_disjoint_and_in_range(self, n, n_classes, p, seed, mode):
        rng = np.random.Generator(np.random.PCG64(seed))
        labels = rng.integers(0, n_classes, n)
        if int(np.floor(p * n)) < 1:
            with pytest.raises(InsufficientLabels):
                make_split(labels, mode, seed=seed, p=p)
            return
        s = make_split(labels, mode, seed=seed, p=p)
        all_idx = np.concatenate([s.train_idx, s.val_idx, s.test_idx])
        assert np.unique(all_idx).size == all_idx.size  # pairwise disjoint
        assert all_idx.min() >= 0 and all_idx.max() < n
        assert s.train_idx.size == int(np.floor(p * n))
