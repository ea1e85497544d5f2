"""Portable dataset container: directory of meta.json plus raw binaries.

Layout (all multi-byte values little-endian):

    meta.json      name, n_nodes, n_features, n_classes, split index arrays
                   (train_idx/val_idx/test_idx, mode, seed, p), normalized flag
    edges.bin      u32 pairs (u, v), one per undirected edge, u < v, sorted
    features.bin   float64, row-major, n_nodes x n_features
    labels.bin     u16, one per node

File sizes must match the meta dimensions exactly; labels must be below
n_classes and edge endpoints below n_nodes. Writing is deterministic:
identical inputs produce byte-identical directories.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.sparse

from .errors import MissingDataset, ShapeError
from .graph import Graph, SplitSpec, build_graph, diffusion
from .linalg import SparseMatrix

__all__ = [
    "Dataset",
    "load_container",
    "write_container",
    "row_normalize",
    "SPARSE_FEATURE_DENSITY",
]

# features load as CSR below this fill; bitwise path choice is a fixed
# function of the stored data, so outputs stay reproducible
SPARSE_FEATURE_DENSITY = 0.05


@dataclass(frozen=True, eq=False)
class Dataset:
    """In-memory dataset: graph, features, labels, split, diffusion operator."""

    name: str
    graph: Graph
    features: object  # ndarray or scipy CSR
    labels: np.ndarray
    n_classes: int
    split: SplitSpec
    normalized: bool
    operator: SparseMatrix

    @property
    def n_nodes(self) -> int:
        return self.graph.n_nodes

    @property
    def n_features(self) -> int:
        return int(self.features.shape[1])

    def with_split(self, split: SplitSpec) -> "Dataset":
        return replace(self, split=split)


def row_normalize(x):
    """Scale each row to unit sum; rows with zero sum are left at zero.

    This is the bag-of-words convention of the GCN lineage: the scale is
    1/rowsum (not 1/|rowsum|), so rows with tiny mixed-sign sums can blow
    up; callers working with signed data accept that as part of the recipe.
    """
    if scipy.sparse.issparse(x):
        s = np.asarray(x.sum(axis=1)).ravel()
        inv = np.divide(1.0, s, out=np.zeros_like(s), where=s != 0)
        return scipy.sparse.diags(inv).dot(x).tocsr()
    x = np.asarray(x, dtype=np.float64)
    s = x.sum(axis=1)
    inv = np.divide(1.0, s, out=np.zeros_like(s), where=s != 0)
    return x * inv[:, None]


def _split_to_meta(split: SplitSpec) -> dict:
    return {
        "train_idx": split.train_idx.tolist(),
        "val_idx": split.val_idx.tolist(),
        "test_idx": split.test_idx.tolist(),
        "mode": split.mode,
        "seed": int(split.seed),
        "p": None if split.p is None else float(split.p),
    }


def _split_from_meta(meta: dict) -> SplitSpec:
    return SplitSpec(
        train_idx=np.asarray(meta["train_idx"], dtype=np.int64),
        val_idx=np.asarray(meta["val_idx"], dtype=np.int64),
        test_idx=np.asarray(meta["test_idx"], dtype=np.int64),
        mode=meta["mode"],
        seed=int(meta["seed"]),
        p=meta.get("p"),
    )


def write_container(directory, name: str, edges, n_nodes: int, features,
                    labels, n_classes: int, split: SplitSpec,
                    normalized: bool = False) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    if scipy.sparse.issparse(features):
        features = features.toarray()
    features = np.asarray(features, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if features.shape[0] != n_nodes or labels.size != n_nodes:
        raise ShapeError("features/labels row count must equal n_nodes")
    if labels.min(initial=0) < 0 or (labels.size and labels.max() >= n_classes):
        raise ShapeError("labels must lie in [0, n_classes)")

    pairs = sorted({(min(int(u), int(v)), max(int(u), int(v))) for u, v in edges})
    for u, v in pairs:
        if not (0 <= u < n_nodes and 0 <= v < n_nodes) or u == v:
            raise ShapeError(f"bad edge ({u},{v}) for n_nodes={n_nodes}")
    edge_arr = np.asarray(pairs, dtype="<u4").reshape(-1, 2)

    meta = {
        "name": name,
        "n_nodes": int(n_nodes),
        "n_features": int(features.shape[1]),
        "n_classes": int(n_classes),
        "split": _split_to_meta(split),
        "normalized": bool(normalized),
    }
    (directory / "meta.json").write_text(
        json.dumps(meta, sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
    (directory / "edges.bin").write_bytes(edge_arr.tobytes())
    (directory / "features.bin").write_bytes(
        np.ascontiguousarray(features, dtype="<f8").tobytes()
    )
    (directory / "labels.bin").write_bytes(
        np.ascontiguousarray(labels, dtype="<u2").tobytes()
    )


def load_container(directory, operator_kind: str = "renormalized_adjacency") -> Dataset:
    directory = Path(directory)
    meta_path = directory / "meta.json"
    if not meta_path.is_file():
        raise MissingDataset(f"no container at {directory} (meta.json missing)")
    for fname in ("edges.bin", "features.bin", "labels.bin"):
        if not (directory / fname).is_file():
            raise MissingDataset(f"container at {directory} lacks {fname}")
    meta = json.loads(meta_path.read_text(encoding="utf-8"))
    n = int(meta["n_nodes"])
    f = int(meta["n_features"])
    c = int(meta["n_classes"])

    raw_edges = (directory / "edges.bin").read_bytes()
    if len(raw_edges) % 8 != 0:
        raise ShapeError("edges.bin size must be a multiple of 8 (u32 pairs)")
    edge_arr = np.frombuffer(raw_edges, dtype="<u4").reshape(-1, 2).astype(np.int64)
    if edge_arr.size and edge_arr.max() >= n:
        raise ShapeError("edge endpoint out of range")

    raw_feat = (directory / "features.bin").read_bytes()
    if len(raw_feat) != 8 * n * f:
        raise ShapeError(
            f"features.bin is {len(raw_feat)} bytes, expected {8 * n * f}"
        )
    features = np.frombuffer(raw_feat, dtype="<f8").reshape(n, f).astype(np.float64)
    if not np.all(np.isfinite(features)):
        raise ShapeError("features.bin contains NaN or Inf")

    raw_lab = (directory / "labels.bin").read_bytes()
    if len(raw_lab) != 2 * n:
        raise ShapeError(f"labels.bin is {len(raw_lab)} bytes, expected {2 * n}")
    labels = np.frombuffer(raw_lab, dtype="<u2").astype(np.int64)
    if labels.size and labels.max() >= c:
        raise ShapeError("label out of range")

    split = _split_from_meta(meta["split"])
    for idx in (split.train_idx, split.val_idx, split.test_idx):
        if idx.size and (idx.min() < 0 or idx.max() >= n):
            raise ShapeError("split index out of range")

    graph = build_graph([tuple(e) for e in edge_arr], n)
    density = np.count_nonzero(features) / max(features.size, 1)
    if density < SPARSE_FEATURE_DENSITY:
        features = scipy.sparse.csr_matrix(features)
    op = diffusion(graph, operator_kind).matrix
    return Dataset(
        name=meta["name"],
        graph=graph,
        features=features,
        labels=labels,
        n_classes=c,
        split=split,
        normalized=bool(meta.get("normalized", False)),
        operator=op,
    )
