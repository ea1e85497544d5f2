#!/usr/bin/env python3
"""Regenerate the checked-in toy dataset containers under data/.

Both containers are deterministic: rerunning this script must reproduce the
directories byte for byte (the test suite asserts this).

toy_classify  360-node planted-partition graph, 3 classes, 24 features
              (noisy class indicators), stored train/val/test split
toy_triangle  the 3-node complete graph; its renormalized adjacency has
              spectrum {1, 0, 0}
"""

import sys
from pathlib import Path

import numpy as np

from kgcn.container import write_container
from kgcn.graph import SplitSpec

DEFAULT_ROOT = Path(__file__).resolve().parent.parent / "data"


def planted_partition(n_per_class: int, n_classes: int, p_in: float,
                      p_out: float, rng: np.random.Generator):
    n = n_per_class * n_classes
    labels = np.repeat(np.arange(n_classes), n_per_class)
    iu, ju = np.triu_indices(n, k=1)
    same = labels[iu] == labels[ju]
    prob = np.where(same, p_in, p_out)
    keep = rng.random(iu.size) < prob
    return list(zip(iu[keep].tolist(), ju[keep].tolist())), labels


def make_toy_classify(root=DEFAULT_ROOT):
    rng = np.random.Generator(np.random.PCG64(20240501))
    n_per, n_classes, n_feat = 120, 3, 24
    edges, labels = planted_partition(n_per, n_classes, 0.06, 0.004, rng)
    n = n_per * n_classes
    means = np.zeros((n_classes, n_feat))
    for c in range(n_classes):
        means[c, c * 8 : (c + 1) * 8] = 1.0
    features = means[labels] + 0.8 * rng.standard_normal((n, n_feat))

    perm = rng.permutation(n)
    train = []
    for c in range(n_classes):
        train.extend([i for i in perm if labels[i] == c][:8])
    train = np.sort(np.asarray(train))
    rest = np.setdiff1d(perm, train, assume_unique=False)
    rest = np.asarray([i for i in perm if i not in set(train)])
    val = np.sort(rest[:90])
    test = np.sort(rest[90:])
    split = SplitSpec(train, val, test, mode="stored", seed=20240501)
    write_container(
        Path(root) / "toy_classify", "toy_classify", edges, n, features, labels,
        n_classes, split, normalized=False,
    )


def make_toy_triangle(root=DEFAULT_ROOT):
    edges = [(0, 1), (1, 2), (0, 2)]
    features = np.array([[1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    labels = np.array([0, 1, 0])
    split = SplitSpec(
        np.array([0, 1]), np.zeros(0, dtype=np.int64), np.array([2]),
        mode="stored", seed=0,
    )
    write_container(
        Path(root) / "toy_triangle", "toy_triangle", edges, 3, features, labels,
        2, split, normalized=False,
    )


if __name__ == "__main__":
    root = Path(sys.argv[1]) if len(sys.argv) > 1 else DEFAULT_ROOT
    make_toy_classify(root)
    make_toy_triangle(root)
    print(f"wrote containers under {root}")
