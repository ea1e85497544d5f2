"""A linear snowball network is one block Krylov product in disguise.

With identity activations, the stacked hidden blocks [H_0, ..., H_n] equal
K_{n+1}(L, X) times a structured weight matrix, so the whole multi-layer
network collapses to a single-layer block Krylov form. This demo builds a
random linear snowball net and compares the two routes.
"""

import numpy as np

from kgcn import (
    ModelSpec,
    collapse_linear_snowball,
    diffusion,
    erdos_renyi,
    forward_snowball,
    init_params,
    spmm,
)

g = erdos_renyi(30, 0.2, seed=5)
op = diffusion(g, "renormalized_adjacency").matrix
rng = np.random.default_rng(2)
x = rng.standard_normal((30, 4))

spec = ModelSpec(
    arch="snowball", input_dim=4, widths=(5, 3, 6), n_classes=3,
    f_act="identity", g_act="identity", p=1, identity_classifier=True,
)
params = init_params(spec, scheme="normal", seed=9)

direct, _ = forward_snowball(op, x, params, spec)
k, w_eq = collapse_linear_snowball(params, op, x, spec)
via_krylov = spmm(op, k @ w_eq @ params.classifier_out)

dev = np.abs(direct - via_krylov).max() / np.abs(direct).max()
print(f"Krylov matrix shape: {k.shape}, equivalent weight shape: {w_eq.shape}")
print(f"max relative deviation between the two routes: {dev:.3e}")
