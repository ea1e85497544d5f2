import importlib.util
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse

from kgcn.container import load_container, row_normalize, write_container
from kgcn.errors import MissingDataset, ShapeError
from kgcn.graph import SplitSpec


def _tiny_split():
    return SplitSpec(np.array([0, 1]), np.array([2]), np.array([3, 4]),
                     mode="stored", seed=1)


def _write_tiny(directory, **overrides):
    kw = dict(
        directory=directory,
        name="tiny",
        edges=[(0, 1), (1, 2), (3, 4)],
        n_nodes=5,
        features=np.arange(15, dtype=float).reshape(5, 3),
        labels=np.array([0, 1, 0, 1, 1]),
        n_classes=2,
        split=_tiny_split(),
    )
    kw.update(overrides)
    write_container(**kw)


def _dir_bytes(directory):
    return {
        p.name: p.read_bytes() for p in sorted(Path(directory).iterdir())
    }


class TestRoundTrip:
    def test_write_read_write_bit_identical(self, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        _write_tiny(a)
        ds = load_container(a)
        feats = ds.features.toarray() if scipy.sparse.issparse(ds.features) else ds.features
        write_container(b, ds.name, ds.graph.edges, ds.n_nodes, feats, ds.labels,
                        ds.n_classes, ds.split, ds.normalized)
        assert _dir_bytes(a) == _dir_bytes(b)

    def test_loaded_values(self, tmp_path):
        _write_tiny(tmp_path / "c")
        ds = load_container(tmp_path / "c")
        assert ds.n_nodes == 5 and ds.n_features == 3 and ds.n_classes == 2
        assert ds.graph.n_edges == 3
        assert ds.labels.tolist() == [0, 1, 0, 1, 1]
        assert ds.split.train_idx.tolist() == [0, 1]
        assert ds.operator.is_bitwise_symmetric()

    def test_sparse_features_auto_csr(self, tmp_path):
        feats = np.zeros((5, 100))
        feats[0, 0] = 1.0
        _write_tiny(tmp_path / "s", features=feats)
        ds = load_container(tmp_path / "s")
        assert scipy.sparse.issparse(ds.features)


class TestValidation:
    def test_missing_directory(self, tmp_path):
        with pytest.raises(MissingDataset):
            load_container(tmp_path / "nope")

    def test_missing_file(self, tmp_path):
        _write_tiny(tmp_path / "m")
        (tmp_path / "m" / "labels.bin").unlink()
        with pytest.raises(MissingDataset):
            load_container(tmp_path / "m")

    def test_truncated_features(self, tmp_path):
        _write_tiny(tmp_path / "t")
        f = tmp_path / "t" / "features.bin"
        f.write_bytes(f.read_bytes()[:-8])
        with pytest.raises(ShapeError):
            load_container(tmp_path / "t")

    def test_label_out_of_range(self, tmp_path):
        _write_tiny(tmp_path / "l")
        (tmp_path / "l" / "labels.bin").write_bytes(
            np.array([0, 1, 0, 1, 9], dtype="<u2").tobytes()
        )
        with pytest.raises(ShapeError):
            load_container(tmp_path / "l")

    def test_edge_out_of_range(self, tmp_path):
        _write_tiny(tmp_path / "e")
        (tmp_path / "e" / "edges.bin").write_bytes(
            np.array([[0, 9]], dtype="<u4").tobytes()
        )
        with pytest.raises(ShapeError):
            load_container(tmp_path / "e")

    def test_nonfinite_features_rejected(self, tmp_path):
        _write_tiny(tmp_path / "n")
        feats = np.arange(15, dtype="<f8")
        feats[3] = np.nan
        (tmp_path / "n" / "features.bin").write_bytes(feats.tobytes())
        with pytest.raises(ShapeError):
            load_container(tmp_path / "n")

    def test_write_rejects_bad_labels(self, tmp_path):
        with pytest.raises(ShapeError):
            _write_tiny(tmp_path / "w", labels=np.array([0, 1, 0, 1, 7]))


class TestRowNormalize:
    def test_rows_sum_to_one(self):
        x = np.abs(np.random.default_rng(0).standard_normal((6, 4))) + 0.1
        np.testing.assert_allclose(row_normalize(x).sum(axis=1), np.ones(6), atol=1e-12)

    def test_zero_row_stays_zero(self):
        x = np.zeros((2, 3))
        x[0] = [1.0, 1.0, 2.0]
        out = row_normalize(x)
        assert np.array_equal(out[1], np.zeros(3))

    def test_sparse_matches_dense(self):
        x = np.zeros((5, 6))
        x[0, 1] = 2.0
        x[3, 4] = 4.0
        x[3, 5] = 4.0
        dense = row_normalize(x)
        sparse = row_normalize(scipy.sparse.csr_matrix(x)).toarray()
        np.testing.assert_allclose(sparse, dense, atol=1e-15)


class TestToyContainers:
    def test_checked_in_containers_load(self, toy_classify_dir, toy_triangle_dir):
        toy = load_container(toy_classify_dir)
        assert toy.n_nodes == 360 and toy.n_classes == 3
        tri = load_container(toy_triangle_dir)
        assert tri.n_nodes == 3 and tri.graph.n_edges == 3

    def test_regeneration_byte_identical(self, tmp_path, toy_classify_dir, toy_triangle_dir):
        tools = Path(toy_classify_dir).parent.parent / "tools" / "make_toy_containers.py"
        spec = importlib.util.spec_from_file_location("make_toys", tools)
        mod = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(mod)
        mod.make_toy_classify(tmp_path)
        mod.make_toy_triangle(tmp_path)
        assert _dir_bytes(tmp_path / "toy_classify") == _dir_bytes(toy_classify_dir)
        assert _dir_bytes(tmp_path / "toy_triangle") == _dir_bytes(toy_triangle_dir)
