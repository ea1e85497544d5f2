"""Self-contained invariant checks runnable from the CLI.

Each check returns (name, ok, detail). The functions are also imported by
the test suite so the CLI and pytest exercise the same verification code.
"""

from __future__ import annotations

import numpy as np

from .errors import KgcnError
from .graph import build_graph, connected_components, diffusion, erdos_renyi
from .linalg import activation, numerical_rank, spectrum, spmm
from .models import (
    ModelSpec,
    backward,
    collapse_linear_snowball,
    flatten_params,
    forward,
    init_params,
    unflatten_params,
)
from .training import masked_cross_entropy

__all__ = [
    "gradient_max_violation",
    "grad_check_specs",
    "equivalence_max_deviation",
    "relu_dependent_pair_rate",
    "tanh_dependent_pair_rate",
    "limit_rank_and_multiplicity",
    "run_all",
]


# --------------------------------------------------------------------------
# gradient checks
# --------------------------------------------------------------------------


def grad_check_specs(n_features: int = 5, hidden: int = 7, depth: int = 2,
                     n_blocks: int = 3, n_classes: int = 3, dropout: float = 0.0):
    """The three architectures at the reference gradient-check size."""
    widths = (hidden,) * depth
    return {
        "vanilla_gcn": ModelSpec(
            arch="vanilla_gcn", input_dim=n_features, widths=widths,
            n_classes=n_classes, f_act="relu", p=1, dropout=dropout,
        ),
        "snowball": ModelSpec(
            arch="snowball", input_dim=n_features, widths=widths,
            n_classes=n_classes, f_act="tanh", g_act="tanh", p=1,
            classifier_width=6, dropout=dropout,
        ),
        "truncated_krylov": ModelSpec(
            arch="truncated_krylov", input_dim=n_features, widths=widths,
            n_classes=n_classes, n_blocks=n_blocks, f_act="tanh", g_act="tanh",
            p=0, classifier_width=6, dropout=dropout,
        ),
    }


def gradient_max_violation(spec: ModelSpec, n_nodes: int = 12, seed: int = 0,
                           h: float = 1e-5, rtol: float = 1e-5,
                           atol: float = 1e-8) -> float:
    """Worst-entry violation ratio of analytic vs central-difference gradients.

    An entry passes when |a - f| <= atol + rtol * max(|a|, |f|); the returned
    value is the max over entries of |a - f| / (atol + rtol * max(|a|,|f|)),
    so anything below 1.0 is a pass.
    """
    graph = erdos_renyi(n_nodes, 0.3, seed)
    op = diffusion(graph, "renormalized_adjacency").matrix
    rng = np.random.Generator(np.random.PCG64(seed + 1))
    x = rng.standard_normal((n_nodes, spec.input_dim))
    labels = rng.integers(0, spec.n_classes, n_nodes)
    mask = np.arange(n_nodes)
    params = init_params(spec, seed=seed + 2)
    vec0 = flatten_params(params)

    def dropout_rng():
        # identical mask stream on every evaluation
        return np.random.Generator(np.random.PCG64(seed + 3)) if spec.dropout else None

    def loss_at(vec):
        p = unflatten_params(vec, params)
        logits, _ = forward(op, x, p, spec, dropout_rng())
        loss, _ = masked_cross_entropy(logits, labels, mask)
        return loss

    logits, tape = forward(op, x, params, spec, dropout_rng())
    _, grad_logits = masked_cross_entropy(logits, labels, mask)
    analytic = flatten_params(backward(tape, params, spec, grad_logits))

    worst = 0.0
    for i in range(vec0.size):
        v = vec0.copy()
        v[i] = vec0[i] + h
        up = loss_at(v)
        v[i] = vec0[i] - h
        down = loss_at(v)
        fd = (up - down) / (2.0 * h)
        bound = atol + rtol * max(abs(analytic[i]), abs(fd))
        worst = max(worst, abs(analytic[i] - fd) / bound)
    return worst


# --------------------------------------------------------------------------
# linear-snowball equivalence
# --------------------------------------------------------------------------


def equivalence_max_deviation(n_instances: int = 50, seed: int = 0,
                              max_nodes: int = 50, max_depth: int = 4) -> float:
    """Max relative deviation between the direct linear-snowball forward and
    the collapsed block Krylov product over random instances."""
    rng = np.random.Generator(np.random.PCG64(seed))
    worst = 0.0
    for i in range(n_instances):
        n = int(rng.integers(4, max_nodes + 1))
        depth = int(rng.integers(0, max_depth + 1))
        f0 = int(rng.integers(1, 5))
        widths = tuple(int(rng.integers(1, 6)) for _ in range(depth))
        identity_head = bool(rng.integers(0, 2))
        spec = ModelSpec(
            arch="snowball", input_dim=f0, widths=widths, n_classes=3,
            f_act="identity", g_act="identity", p=1,
            identity_classifier=identity_head,
            classifier_width=None if identity_head else int(rng.integers(1, 6)),
        )
        graph = erdos_renyi(n, 0.3, int(rng.integers(0, 2**31)))
        op = diffusion(graph, "renormalized_adjacency").matrix
        x = rng.standard_normal((n, f0))
        params = init_params(spec, scheme="normal", seed=int(rng.integers(0, 2**31)))
        direct, _ = forward(op, x, params, spec, rng=None)
        k, w_eq = collapse_linear_snowball(params, op, x, spec)
        via_krylov = spmm(op, k @ w_eq @ params.classifier_out)
        scale = max(np.abs(direct).max(), 1e-30)
        worst = max(worst, float(np.abs(direct - via_krylov).max() / scale))
    return worst


# --------------------------------------------------------------------------
# activation rank behaviour on dependent pairs
# --------------------------------------------------------------------------


def relu_dependent_pair_rate(trials: int = 1000, n: int = 100, seed: int = 0) -> float:
    """Fraction of positively dependent pairs whose rank stays 1 under relu."""
    rng = np.random.Generator(np.random.PCG64(seed))
    kept = 0
    for _ in range(trials):
        y = rng.standard_normal(n)
        c = float(np.exp(rng.standard_normal()))  # positive, continuous
        pair = np.column_stack([c * y, y])
        kept += numerical_rank(activation(pair, "relu")) == 1
    return kept / trials


def tanh_dependent_pair_rate(trials: int = 1000, n: int = 100, seed: int = 0) -> float:
    """Fraction of dependent pairs whose rank rises to 2 under tanh."""
    rng = np.random.Generator(np.random.PCG64(seed))
    raised = 0
    for _ in range(trials):
        y = rng.standard_normal(n)
        c = float(2.0 * rng.standard_normal())
        pair = np.column_stack([c * y, y])
        raised += numerical_rank(activation(pair, "tanh")) == 2
    return raised / trials


# --------------------------------------------------------------------------
# diffusion limit: rank of high powers and top-eigenvalue multiplicity
# --------------------------------------------------------------------------


def _graph_with_components(k: int, part_size: int, seed: int):
    rng = np.random.Generator(np.random.PCG64(seed))
    edges = []
    offset = 0
    for _ in range(k):
        size = int(rng.integers(max(part_size // 2, 3), part_size + 1))
        part = erdos_renyi(size, 0.2, int(rng.integers(0, 2**31)))
        edges.extend((u + offset, v + offset) for u, v in part.edges)
        # a ring through every node keeps the part connected and non-bipartite
        # once chords exist; the ring alone would be bipartite only when even,
        # and the self-loops of the renormalized operator rule that out anyway
        for i in range(size):
            edges.append((offset + i, offset + (i + 1) % size))
        offset += size
    return build_graph(edges, offset)


def limit_rank_and_multiplicity(n_graphs: int = 20, power: int = 500,
                                seed: int = 0, tol: float = 1e-8):
    """For graphs with k components: rank((L/lmax)^power X) <= k and the
    multiplicity of eigenvalue 1 of the renormalized operator equals k.
    Returns (rank_ok, mult_ok, details)."""
    rng = np.random.Generator(np.random.PCG64(seed))
    rank_ok = mult_ok = True
    details = []
    for i in range(n_graphs):
        k = int(rng.integers(1, 4))
        graph = _graph_with_components(k, 40, int(rng.integers(0, 2**31)))
        op = diffusion(graph, "renormalized_adjacency").matrix
        x = rng.standard_normal((graph.n_nodes, 8))
        h = x
        for _ in range(power):
            h = spmm(op, h)
        rank = numerical_rank(h, tol=tol * max(1.0, float(np.abs(h).max())))
        eigs = spectrum(op, "dense_full")
        mult = int(np.count_nonzero(eigs >= 1.0 - tol))
        components, _ = connected_components(graph)
        rank_ok &= rank <= k
        mult_ok &= mult == components == k
        details.append((k, rank, mult))
    return rank_ok, mult_ok, details


# --------------------------------------------------------------------------
# runner
# --------------------------------------------------------------------------


def run_all(fast: bool = True):
    """Execute every check; yields (name, ok, detail) tuples."""
    results = []

    def add(name, ok, detail):
        results.append((name, bool(ok), detail))

    for arch, spec in grad_check_specs().items():
        try:
            worst = gradient_max_violation(spec)
            add(f"gradients/{arch}", worst < 1.0, f"max violation ratio {worst:.3g}")
        except KgcnError as exc:
            add(f"gradients/{arch}", False, str(exc))

    dev = equivalence_max_deviation(n_instances=10 if fast else 50)
    add("linear_snowball_equivalence", dev < 1e-9, f"max relative deviation {dev:.3g}")

    trials = 200 if fast else 1000
    relu_rate = relu_dependent_pair_rate(trials=trials)
    add("relu_keeps_positive_dependency", relu_rate == 1.0, f"rate {relu_rate:.3f}")
    tanh_rate = tanh_dependent_pair_rate(trials=trials)
    add("tanh_restores_rank", tanh_rate >= 0.99, f"rate {tanh_rate:.3f}")

    rank_ok, mult_ok, details = limit_rank_and_multiplicity(
        n_graphs=5 if fast else 20
    )
    add("diffusion_power_rank_le_components", rank_ok, f"cases {details}")
    add("top_eigenvalue_multiplicity", mult_ok, f"cases {details}")

    # K3: the renormalized operator is the rank-one averaging matrix
    tri = build_graph([(0, 1), (1, 2), (0, 2)], 3)
    eigs = spectrum(diffusion(tri, "renormalized_adjacency").matrix, "dense_full")
    add(
        "triangle_spectrum",
        np.allclose(eigs, [0.0, 0.0, 1.0], atol=1e-12),
        f"eigenvalues {eigs}",
    )
    return results
