"""Graphs, diffusion operators, random graphs, and labelled splits.

All operations are pure given their inputs and seed. Adjacency matrices are
canonical CSR with unit entries, zero diagonal, and bitwise symmetry.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse
import scipy.sparse.csgraph

from .errors import InsufficientLabels, InvalidEdge, ShapeError
from .linalg import SparseMatrix

__all__ = [
    "Graph",
    "DiffusionOperator",
    "SplitSpec",
    "DIFFUSION_KINDS",
    "SPLIT_MODES",
    "build_graph",
    "diffusion",
    "connected_components",
    "erdos_renyi",
    "make_split",
]

DIFFUSION_KINDS = (
    "renormalized_adjacency",
    "laplacian",
    "normalized_laplacian",
    "affinity",
)

SPLIT_MODES = ("public", "percent", "percent_no_validation")

PUBLIC_TRAIN_PER_CLASS = 20
PUBLIC_VAL_SIZE = 500
PUBLIC_TEST_SIZE = 1000
PERCENT_VAL_SIZE = 500


@dataclass(frozen=True, eq=False)
class Graph:
    """Undirected simple graph with a canonical CSR adjacency."""

    n_nodes: int
    edges: list[tuple[int, int]]
    adjacency: SparseMatrix

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def degrees(self) -> np.ndarray:
        return np.diff(self.adjacency.row_ptr).astype(np.float64)


@dataclass(frozen=True, eq=False)
class DiffusionOperator:
    matrix: SparseMatrix
    kind: str


@dataclass(frozen=True, eq=False)
class SplitSpec:
    train_idx: np.ndarray
    val_idx: np.ndarray
    test_idx: np.ndarray
    mode: str
    seed: int
    p: float | None = None

    def __post_init__(self):
        for name in ("train_idx", "val_idx", "test_idx"):
            object.__setattr__(
                self, name, np.asarray(getattr(self, name), dtype=np.int64)
            )
        sets = [set(self.train_idx), set(self.val_idx), set(self.test_idx)]
        if (
            sets[0] & sets[1]
            or sets[0] & sets[2]
            or sets[1] & sets[2]
        ):
            raise ShapeError("split index sets must be pairwise disjoint")


def build_graph(edge_list, n_nodes: int) -> Graph:
    """Symmetrize, deduplicate, and drop self-loops; adjacency in canonical CSR."""
    if n_nodes < 0:
        raise InvalidEdge("n_nodes must be nonnegative")
    pairs = set()
    for u, v in edge_list:
        u, v = int(u), int(v)
        if not (0 <= u < n_nodes and 0 <= v < n_nodes):
            raise InvalidEdge(f"edge ({u},{v}) outside [0,{n_nodes})")
        if u == v:
            continue
        pairs.add((min(u, v), max(u, v)))
    edges = sorted(pairs)
    if edges:
        e = np.asarray(edges, dtype=np.int64)
        i = np.concatenate([e[:, 0], e[:, 1]])
        j = np.concatenate([e[:, 1], e[:, 0]])
        adj = SparseMatrix.from_coo(n_nodes, n_nodes, i, j, np.ones(i.size))
    else:
        adj = SparseMatrix.from_scipy(
            scipy.sparse.csr_matrix((n_nodes, n_nodes), dtype=np.float64)
        )
    return Graph(n_nodes=n_nodes, edges=edges, adjacency=adj)


def _scaled_adjacency(graph: Graph, with_self_loops: bool) -> SparseMatrix:
    """D^{-1/2} A D^{-1/2}, optionally on A+I with degrees of A+I.

    Entry (i,j) is computed as a / sqrt(d_i * d_j); the product d_i * d_j is
    symmetric in floating point, so the result is bitwise symmetric.
    """
    a = graph.adjacency.to_scipy().astype(np.float64)
    if with_self_loops:
        a = (a + scipy.sparse.identity(graph.n_nodes, format="csr")).tocsr()
        a.sort_indices()
    deg = np.asarray(a.sum(axis=1)).ravel()
    coo = a.tocoo()
    denom = np.sqrt(deg[coo.row] * deg[coo.col])
    vals = np.divide(coo.data, denom, out=np.zeros_like(coo.data), where=denom > 0)
    return SparseMatrix.from_coo(graph.n_nodes, graph.n_nodes, coo.row, coo.col, vals)


def diffusion(graph: Graph, kind: str) -> DiffusionOperator:
    """Build a symmetric diffusion operator for the graph.

    renormalized_adjacency: D~^{-1/2} (A+I) D~^{-1/2} with D~ the degree
    matrix of A+I, so isolated nodes get degree 1 and no division by zero.
    laplacian: D - A. normalized_laplacian: I - D^{-1/2} A D^{-1/2}, with
    the convention D^{-1/2} = 0 on zero-degree nodes. affinity: A + I.
    """
    n = graph.n_nodes
    a = graph.adjacency.to_scipy()
    if kind == "renormalized_adjacency":
        return DiffusionOperator(_scaled_adjacency(graph, with_self_loops=True), kind)
    if kind == "laplacian":
        deg = np.asarray(a.sum(axis=1)).ravel()
        lap = scipy.sparse.diags(deg, format="csr") - a
        return DiffusionOperator(SparseMatrix.from_scipy(lap), kind)
    if kind == "normalized_laplacian":
        scaled = _scaled_adjacency(graph, with_self_loops=False)
        m = scipy.sparse.identity(n, format="csr") - scaled.to_scipy()
        return DiffusionOperator(SparseMatrix.from_scipy(m), kind)
    if kind == "affinity":
        m = a + scipy.sparse.identity(n, format="csr")
        return DiffusionOperator(SparseMatrix.from_scipy(m), kind)
    raise ShapeError(f"unknown diffusion kind {kind!r}")


def connected_components(graph: Graph) -> tuple[int, np.ndarray]:
    """Component count and per-node labels in [0, k), first-encounter order."""
    k, labels = scipy.sparse.csgraph.connected_components(
        graph.adjacency.to_scipy(), directed=False
    )
    # relabel so that component ids appear in node order
    order = np.full(k, -1, dtype=np.int64)
    nxt = 0
    for lab in labels:
        if order[lab] < 0:
            order[lab] = nxt
            nxt += 1
    return int(k), order[labels]


def erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """G(n, p): each unordered pair included independently with probability p."""
    if not 0.0 <= p <= 1.0:
        raise ShapeError(f"p must be in [0,1], got {p}")
    rng = np.random.Generator(np.random.PCG64(seed))
    if n < 2 or p == 0.0:
        return build_graph([], n)
    iu, ju = np.triu_indices(n, k=1)
    if p == 1.0:
        keep = np.ones(iu.size, dtype=bool)
    else:
        keep = rng.random(iu.size) < p
    edges = list(zip(iu[keep].tolist(), ju[keep].tolist()))
    return build_graph(edges, n)


def _check_counts(labels: np.ndarray, per_class: int):
    classes, counts = np.unique(labels, return_counts=True)
    short = classes[counts < per_class]
    if short.size:
        raise InsufficientLabels(
            f"classes {short.tolist()} have fewer than {per_class} instances"
        )


def make_split(
    labels, mode: str, seed: int, p: float | None = None
) -> SplitSpec:
    """Sample a train/val/test split.

    public: 20 labelled nodes per class, then 500 validation and 1000 test
    nodes sampled from the remainder. percent(p): floor(p*N) training nodes
    sampled uniformly over all nodes (no per-class stratification), a
    500-node validation set (capped at half the remainder on small graphs
    so a test set always survives), remainder test.
    percent_no_validation(p): same with an empty validation set.
    """
    labels = np.asarray(labels, dtype=np.int64)
    n = labels.size
    rng = np.random.Generator(np.random.PCG64(seed))
    if mode == "public":
        _check_counts(labels, PUBLIC_TRAIN_PER_CLASS)
        train = []
        for c in np.unique(labels):
            idx = np.flatnonzero(labels == c)
            train.extend(rng.choice(idx, size=PUBLIC_TRAIN_PER_CLASS, replace=False))
        train = np.sort(np.asarray(train, dtype=np.int64))
        rest = np.setdiff1d(np.arange(n), train)
        if rest.size < PUBLIC_VAL_SIZE + PUBLIC_TEST_SIZE:
            raise InsufficientLabels(
                f"public split needs {PUBLIC_VAL_SIZE + PUBLIC_TEST_SIZE} "
                f"non-training nodes, have {rest.size}"
            )
        picked = rng.choice(rest, size=PUBLIC_VAL_SIZE + PUBLIC_TEST_SIZE, replace=False)
        val = np.sort(picked[:PUBLIC_VAL_SIZE])
        test = np.sort(picked[PUBLIC_VAL_SIZE:])
        return SplitSpec(train, val, test, mode, seed)
    if mode in ("percent", "percent_no_validation"):
        if p is None or not 0.0 < p <= 1.0:
            raise ShapeError(f"percent mode needs p in (0,1], got {p}")
        n_train = int(np.floor(p * n))
        if n_train < 1:
            raise InsufficientLabels(f"percent split p={p} yields 0 training nodes")
        perm = rng.permutation(n)
        train = np.sort(perm[:n_train])
        rest = perm[n_train:]
        if mode == "percent":
            n_val = min(PERCENT_VAL_SIZE, rest.size // 2)
            val = np.sort(rest[:n_val])
            test = np.sort(rest[n_val:])
        else:
            val = np.zeros(0, dtype=np.int64)
            test = np.sort(rest)
        return SplitSpec(train, val, test, mode, seed, p=p)
    raise ShapeError(f"unknown split mode {mode!r}")
