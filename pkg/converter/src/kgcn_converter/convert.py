"""Convert a planetoid-style citation dataset to the portable container.

Upstream distribution (one directory, files named ind.<name>.<part>):

    x, y        pickled CSR features / one-hot labels of the labelled
                training instances
    allx, ally  features / one-hot labels of every training-portion
                instance (labelled plus unlabelled)
    tx, ty      features / one-hot labels of the test instances
    graph       pickled dict: node id -> list of neighbour ids
    test.index  text file of test node ids, one per line (a shuffled
                block of ids following the training portion)

The converter reassembles the full feature and label matrices with the
test-index reordering applied, preserves the public split verbatim
(train = the labelled training block, validation = the next 500 training
ids, test = the sorted test ids), and writes the container directory:

    meta.json      name, n_nodes, n_features, n_classes, split arrays,
                   normalization flag, provenance notes
    edges.bin      little-endian u32 pairs (u, v), u < v, sorted
    features.bin   little-endian float64, row-major
    labels.bin     little-endian u16

Some distributions (citeseer) omit a few ids from the test block: those
nodes are isolated test instances. Their feature rows are zero-filled,
their labels default to class 0, and the affected ids are recorded under
"provenance" in meta.json.

Output is deterministic: converting the same input twice produces
byte-identical directories.
"""

from __future__ import annotations

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import scipy.sparse

UPSTREAM_PARTS = ("x", "y", "tx", "ty", "allx", "ally", "graph")
VAL_SIZE = 500


class ConversionError(RuntimeError):
    pass


def _load_pickle(path: Path):
    with open(path, "rb") as fh:
        # upstream files are legacy pickles; latin1 keeps byte strings intact
        return pickle.load(fh, encoding="latin1")


def read_upstream(directory: Path, name: str) -> dict:
    directory = Path(directory)
    parts = {}
    for part in UPSTREAM_PARTS:
        path = directory / f"ind.{name}.{part}"
        if not path.is_file():
            raise ConversionError(f"missing upstream file {path}")
        parts[part] = _load_pickle(path)
    index_path = directory / f"ind.{name}.test.index"
    if not index_path.is_file():
        raise ConversionError(f"missing upstream file {index_path}")
    test_idx = np.array(
        [int(line) for line in index_path.read_text().split()], dtype=np.int64
    )
    if test_idx.size == 0:
        raise ConversionError("test.index is empty")
    parts["test_index"] = test_idx
    return parts


def assemble(parts: dict) -> dict:
    """Rebuild full features/labels/graph with the test block in node order."""
    x = scipy.sparse.csr_matrix(parts["x"])
    tx = scipy.sparse.csr_matrix(parts["tx"])
    allx = scipy.sparse.csr_matrix(parts["allx"])
    y = np.asarray(parts["y"])
    ty = np.asarray(parts["ty"])
    ally = np.asarray(parts["ally"])
    test_reorder = parts["test_index"]
    test_sorted = np.sort(test_reorder)

    n_feat = allx.shape[1]
    if x.shape[1] != n_feat or tx.shape[1] != n_feat:
        raise ConversionError(
            f"feature widths disagree: x={x.shape[1]} tx={tx.shape[1]} allx={n_feat}"
        )
    if y.shape[0] != x.shape[0] or ty.shape[0] != tx.shape[0] or ally.shape[0] != allx.shape[0]:
        raise ConversionError("label row counts disagree with feature row counts")
    n_classes = y.shape[1]
    if ty.shape[1] != n_classes or ally.shape[1] != n_classes:
        raise ConversionError("one-hot label widths disagree")

    n_allx = allx.shape[0]
    span_lo = int(test_sorted[0])
    span_hi = int(test_sorted[-1])
    if span_lo < n_allx:
        raise ConversionError("test ids overlap the training portion")
    span = span_hi - span_lo + 1
    missing = sorted(set(range(span_lo, span_hi + 1)) - set(test_sorted.tolist()))
    if span != tx.shape[0] or missing:
        # sparse test block (citeseer-style): zero-fill the absent ids
        tx_ext = scipy.sparse.lil_matrix((span, n_feat))
        tx_ext[test_sorted - span_lo, :] = tx
        tx = scipy.sparse.csr_matrix(tx_ext)
        ty_ext = np.zeros((span, n_classes))
        ty_ext[test_sorted - span_lo, :] = ty
        ty = ty_ext

    features = scipy.sparse.vstack([allx, tx]).tolil()
    labels_1hot = np.vstack([ally, ty])
    # tx rows sit at sorted positions but belong to the shuffled ids
    features[test_reorder, :] = features[test_sorted, :]
    labels_1hot[test_reorder, :] = labels_1hot[test_sorted, :]
    features = scipy.sparse.csr_matrix(features)

    n_nodes = features.shape[0]
    graph = parts["graph"]
    pairs = set()
    for u, nbrs in graph.items():
        u = int(u)
        for v in nbrs:
            v = int(v)
            if not (0 <= u < n_nodes and 0 <= v < n_nodes):
                raise ConversionError(f"graph edge ({u},{v}) outside [0,{n_nodes})")
            if u != v:
                pairs.add((min(u, v), max(u, v)))

    n_train = y.shape[0]
    train_idx = np.arange(n_train, dtype=np.int64)
    val_hi = min(n_train + VAL_SIZE, n_allx)
    val_idx = np.arange(n_train, val_hi, dtype=np.int64)

    return {
        "features": features,
        "labels": np.argmax(labels_1hot, axis=1).astype(np.int64),
        "edges": sorted(pairs),
        "n_nodes": n_nodes,
        "n_classes": n_classes,
        "train_idx": train_idx,
        "val_idx": val_idx,
        "test_idx": test_sorted,
        "zero_filled": missing,
    }


def row_normalize_csr(m: scipy.sparse.csr_matrix) -> scipy.sparse.csr_matrix:
    s = np.asarray(m.sum(axis=1)).ravel()
    inv = np.divide(1.0, s, out=np.zeros_like(s), where=s != 0)
    return scipy.sparse.diags(inv).dot(m).tocsr()


def write_container(out_dir: Path, name: str, assembled: dict,
                    normalized: bool) -> None:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    features = assembled["features"]
    if normalized:
        features = row_normalize_csr(features)
    dense = np.ascontiguousarray(features.toarray(), dtype="<f8")

    labels = assembled["labels"]
    if labels.min() < 0 or labels.max() >= assembled["n_classes"]:
        raise ConversionError("labels out of range after assembly")

    meta = {
        "name": name,
        "n_nodes": int(assembled["n_nodes"]),
        "n_features": int(dense.shape[1]),
        "n_classes": int(assembled["n_classes"]),
        "split": {
            "train_idx": assembled["train_idx"].tolist(),
            "val_idx": assembled["val_idx"].tolist(),
            "test_idx": assembled["test_idx"].tolist(),
            "mode": "public",
            "seed": 0,
            "p": None,
        },
        "normalized": bool(normalized),
        "provenance": {
            "source_format": "planetoid upstream distribution",
            "zero_filled_test_indices": [int(i) for i in assembled["zero_filled"]],
        },
    }
    (out_dir / "meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    edge_arr = np.asarray(assembled["edges"], dtype="<u4").reshape(-1, 2)
    (out_dir / "edges.bin").write_bytes(edge_arr.tobytes())
    (out_dir / "features.bin").write_bytes(dense.tobytes())
    (out_dir / "labels.bin").write_bytes(
        np.ascontiguousarray(labels, dtype="<u2").tobytes()
    )


def convert(in_dir, name: str, out_dir, normalize: bool = False) -> dict:
    """Full pipeline; returns a small summary dict."""
    parts = read_upstream(Path(in_dir), name)
    assembled = assemble(parts)
    write_container(Path(out_dir), name, assembled, normalize)
    return {
        "name": name,
        "n_nodes": assembled["n_nodes"],
        "n_features": int(assembled["features"].shape[1]),
        "n_classes": assembled["n_classes"],
        "n_edges": len(assembled["edges"]),
        "train": int(assembled["train_idx"].size),
        "val": int(assembled["val_idx"].size),
        "test": int(assembled["test_idx"].size),
        "zero_filled": len(assembled["zero_filled"]),
    }


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="kgcn-convert",
        description="convert a planetoid-style dataset to the container format",
    )
    parser.add_argument("--in", dest="in_dir", required=True,
                        help="directory with the upstream ind.<name>.* files")
    parser.add_argument("--name", required=True,
                        choices=["cora", "citeseer", "pubmed"])
    parser.add_argument("--out", required=True, help="output directory root")
    parser.add_argument("--normalize", action="store_true",
                        help="row-normalize features to unit sums")
    args = parser.parse_args(argv)
    try:
        summary = convert(args.in_dir, args.name, Path(args.out) / args.name,
                          args.normalize)
    except ConversionError as exc:
        print(json.dumps({"error": "ConversionError", "message": str(exc)}),
              file=sys.stderr)
        return 1
    print(json.dumps(summary))
    return 0


if __name__ == "__main__":
    sys.exit(main())
