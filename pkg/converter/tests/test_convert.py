import json
import os
from pathlib import Path

import numpy as np
import pytest

from kgcn_converter.convert import ConversionError, convert, main


def _dir_bytes(directory):
    return {p.name: p.read_bytes() for p in sorted(Path(directory).iterdir())}


def _read_container(directory):
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text())
    n, f = meta["n_nodes"], meta["n_features"]
    feats = np.frombuffer((directory / "features.bin").read_bytes(), dtype="<f8")
    labels = np.frombuffer((directory / "labels.bin").read_bytes(), dtype="<u2")
    edges = np.frombuffer((directory / "edges.bin").read_bytes(), dtype="<u4")
    return meta, feats.reshape(n, f), labels, edges.reshape(-1, 2)


class TestAssembly:
    def test_features_and_labels_in_node_order(self, cora_like, tmp_path):
        src, truth = cora_like
        out = tmp_path / "out"
        convert(src, "cora", out)
        meta, feats, labels, edges = _read_container(out)
        assert meta["n_nodes"] == truth["n_nodes"]
        np.testing.assert_allclose(feats, truth["features"])
        assert labels.tolist() == truth["labels"].tolist()

    def test_split_preserved_verbatim(self, cora_like, tmp_path):
        src, truth = cora_like
        out = tmp_path / "out"
        convert(src, "cora", out)
        meta, *_ = _read_container(out)
        split = meta["split"]
        assert split["mode"] == "public"
        assert split["train_idx"] == list(range(truth["n_labeled"]))
        # validation follows the labelled block, capped by the available
        # training-portion rows on small bundles
        assert split["val_idx"] == list(range(truth["n_labeled"], truth["n_allx"]))
        assert split["test_idx"] == truth["test_ids"].tolist()

    def test_edges_symmetric_dedup_no_self_loops(self, cora_like, tmp_path):
        src, truth = cora_like
        out = tmp_path / "out"
        convert(src, "cora", out)
        _, _, _, edges = _read_container(out)
        assert np.all(edges[:, 0] < edges[:, 1])
        pairs = {tuple(e) for e in edges.tolist()}
        assert len(pairs) == edges.shape[0]
        expected = set()
        for u, nbrs in truth["graph"].items():
            for v in nbrs:
                if u != v:
                    expected.add((min(u, v), max(u, v)))
        assert pairs == expected

    def test_summary_counts(self, cora_like, tmp_path):
        src, truth = cora_like
        summary = convert(src, "cora", tmp_path / "out")
        assert summary["n_nodes"] == truth["n_nodes"]
        assert summary["train"] == truth["n_labeled"]
        assert summary["test"] == truth["test_ids"].size
        assert summary["zero_filled"] == 0


class TestCiteseerQuirk:
    def test_gapped_test_ids_zero_filled(self, citeseer_like, tmp_path):
        src, truth = citeseer_like
        out = tmp_path / "out"
        summary = convert(src, "citeseer", out)
        assert summary["zero_filled"] == len(truth["missing"]) == 2
        meta, feats, labels, _ = _read_container(out)
        assert meta["provenance"]["zero_filled_test_indices"] == truth["missing"]
        for m in truth["missing"]:
            assert np.array_equal(feats[m], np.zeros(feats.shape[1]))
            assert labels[m] == 0
        np.testing.assert_allclose(feats, truth["features"])
        assert labels.tolist() == truth["labels"].tolist()

    def test_test_split_excludes_missing_ids(self, citeseer_like, tmp_path):
        src, truth = citeseer_like
        out = tmp_path / "out"
        convert(src, "citeseer", out)
        meta, *_ = _read_container(out)
        assert meta["split"]["test_idx"] == truth["test_ids"].tolist()
        assert not set(truth["missing"]) & set(meta["split"]["test_idx"])


class TestDeterminism:
    def test_double_conversion_byte_identical(self, cora_like, tmp_path):
        src, _ = cora_like
        convert(src, "cora", tmp_path / "a")
        convert(src, "cora", tmp_path / "b")
        assert _dir_bytes(tmp_path / "a") == _dir_bytes(tmp_path / "b")


class TestNormalize:
    def test_rows_sum_to_one(self, cora_like, tmp_path):
        src, _ = cora_like
        out = tmp_path / "out"
        convert(src, "cora", out, normalize=True)
        meta, feats, _, _ = _read_container(out)
        assert meta["normalized"] is True
        sums = feats.sum(axis=1)
        nonzero = sums != 0
        np.testing.assert_allclose(sums[nonzero], np.ones(nonzero.sum()), atol=1e-12)


class TestErrors:
    def test_missing_file(self, cora_like, tmp_path):
        src, _ = cora_like
        (src / "ind.cora.graph").unlink()
        with pytest.raises(ConversionError, match="graph"):
            convert(src, "cora", tmp_path / "out")

    def test_feature_width_mismatch(self, cora_like, tmp_path):
        import pickle

        import scipy.sparse

        src, _ = cora_like
        with open(src / "ind.cora.tx", "wb") as fh:
            pickle.dump(scipy.sparse.csr_matrix(np.zeros((8, 99))), fh, protocol=2)
        with pytest.raises(ConversionError, match="width"):
            convert(src, "cora", tmp_path / "out")


class TestCli:
    def test_main_end_to_end(self, cora_like, tmp_path, capsys):
        src, truth = cora_like
        rc = main(["--in", str(src), "--name", "cora", "--out", str(tmp_path / "data")])
        assert rc == 0
        summary = json.loads(capsys.readouterr().out)
        assert summary["n_nodes"] == truth["n_nodes"]
        assert (tmp_path / "data" / "cora" / "meta.json").is_file()

    def test_main_error_exit(self, tmp_path, capsys):
        rc = main(["--in", str(tmp_path), "--name", "cora", "--out", str(tmp_path)])
        assert rc == 1
        err = json.loads(capsys.readouterr().err)
        assert err["error"] == "ConversionError"


class TestPrimaryIntegration:
    def test_container_loads_through_primary_reader(self, cora_like, tmp_path):
        kgcn = pytest.importorskip("kgcn")
        src, truth = cora_like
        out = tmp_path / "out"
        summary = convert(src, "cora", out)
        ds = kgcn.load_container(out)
        assert ds.n_nodes == summary["n_nodes"] == truth["n_nodes"]
        assert ds.n_classes == summary["n_classes"]
        assert ds.graph.n_edges == summary["n_edges"]
        assert ds.split.train_idx.tolist() == list(range(truth["n_labeled"]))


@pytest.mark.skipif(
    not os.environ.get("KGCN_UPSTREAM"),
    reason="set KGCN_UPSTREAM to the directory with the real ind.* files",
)
class TestRealData:
    @pytest.mark.parametrize(
        "name,n_nodes,n_features,n_classes",
        [("cora", 2708, 1433, 7), ("citeseer", 3327, 3703, 6),
         ("pubmed", 19717, 500, 3)],
    )
    def test_convert_real(self, name, n_nodes, n_features, n_classes, tmp_path):
        src = Path(os.environ["KGCN_UPSTREAM"])
        if not (src / f"ind.{name}.x").is_file():
            pytest.skip(f"{name} not present under KGCN_UPSTREAM")
        summary = convert(src, name, tmp_path / name)
        assert summary["n_nodes"] == n_nodes
        assert summary["n_features"] == n_features
        assert summary["n_classes"] == n_classes
        assert summary["train"] == 20 * n_classes
        assert summary["val"] == 500
        assert summary["test"] == 1000
