import pickle
from pathlib import Path

import numpy as np
import pytest
import scipy.sparse


def _one_hot(labels, n_classes):
    eye = np.eye(n_classes)
    return eye[np.asarray(labels)]


def write_bundle(directory: Path, name: str, *, n_labeled=6, n_allx=12,
                 test_ids=None, n_feat=8, n_classes=3, seed=0):
    """Synthesize a planetoid-style file set for a tiny dataset.

    test_ids defaults to a shuffled contiguous block after the training
    portion; pass a gapped list to mimic the citeseer quirk. Returns the
    ground-truth arrays for assertions.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    if test_ids is None:
        test_ids = np.arange(n_allx, n_allx + 8)
    test_ids = np.asarray(sorted(test_ids))
    span_hi = int(test_ids.max())
    n_nodes = span_hi + 1

    feats = (rng.random((n_nodes, n_feat)) < 0.3).astype(float)
    labels = rng.integers(0, n_classes, n_nodes)

    reorder = rng.permutation(test_ids)  # upstream order of the test rows

    directory.mkdir(parents=True, exist_ok=True)

    def dump(part, obj):
        with open(directory / f"ind.{name}.{part}", "wb") as fh:
            pickle.dump(obj, fh, protocol=2)

    dump("x", scipy.sparse.csr_matrix(feats[:n_labeled]))
    dump("y", _one_hot(labels[:n_labeled], n_classes))
    dump("allx", scipy.sparse.csr_matrix(feats[:n_allx]))
    dump("ally", _one_hot(labels[:n_allx], n_classes))
    dump("tx", scipy.sparse.csr_matrix(feats[reorder]))
    dump("ty", _one_hot(labels[reorder], n_classes))

    graph = {}
    n_edges = 3 * n_nodes
    for _ in range(n_edges):
        u, v = rng.integers(0, n_nodes, 2)
        if u == v:
            continue
        graph.setdefault(int(u), []).append(int(v))
        graph.setdefault(int(v), []).append(int(u))
    dump("graph", graph)

    (directory / f"ind.{name}.test.index").write_text(
        "\n".join(str(int(i)) for i in reorder) + "\n"
    )

    missing = sorted(set(range(n_allx, span_hi + 1)) - set(test_ids.tolist()))
    truth_labels = labels.copy()
    truth_feats = feats.copy()
    for m in missing:  # isolated ids: zero features, class-0 label
        truth_feats[m] = 0.0
        truth_labels[m] = 0
    return {
        "features": truth_feats,
        "labels": truth_labels,
        "graph": graph,
        "test_ids": test_ids,
        "missing": missing,
        "n_labeled": n_labeled,
        "n_allx": n_allx,
        "n_nodes": n_nodes,
    }


@pytest.fixture
def cora_like(tmp_path):
    d = tmp_path / "upstream"
    truth = write_bundle(d, "cora", seed=1)
    return d, truth


@pytest.fixture
def citeseer_like(tmp_path):
    d = tmp_path / "upstream"
    gapped = [i for i in range(12, 22) if i not in (13, 17)]
    truth = write_bundle(d, "citeseer", test_ids=gapped, seed=2)
    return d, truth
