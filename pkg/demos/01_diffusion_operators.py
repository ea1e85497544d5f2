"""Diffusion operators on small graphs.

Builds a few toy graphs, forms their diffusion operators, and inspects the
spectra. The renormalized adjacency always has top eigenvalue 1, with
multiplicity equal to the number of connected components.
"""

import numpy as np

from kgcn import build_graph, connected_components, diffusion, erdos_renyi, spectrum

# A triangle: the renormalized operator is the rank-one averaging matrix.
triangle = build_graph([(0, 1), (1, 2), (0, 2)], 3)
op = diffusion(triangle, "renormalized_adjacency").matrix
print("triangle, renormalized adjacency:")
print(op.to_dense())
print("eigenvalues:", np.round(spectrum(op, "dense_full"), 6))

# Two components: eigenvalue 1 shows up twice.
two_parts = build_graph([(0, 1), (1, 2), (0, 2), (3, 4)], 5)
op = diffusion(two_parts, "renormalized_adjacency").matrix
eigs = spectrum(op, "dense_full")
k, labels = connected_components(two_parts)
print(f"\ntwo-component graph: k={k}, labels={labels}")
print("eigenvalues:", np.round(eigs, 6))
print("multiplicity of eigenvalue 1:", int(np.sum(eigs >= 1 - 1e-8)))

# A random graph: the whole spectrum stays inside (-1, 1].
g = erdos_renyi(200, 0.05, seed=1)
op = diffusion(g, "renormalized_adjacency").matrix
eigs = spectrum(op, "dense_full")
print(f"\nG(200, 0.05): {g.n_edges} edges, spectrum in "
      f"({eigs[0]:.4f}, {eigs[-1]:.4f}]")

# The unnormalized Laplacian D - A is positive semi-definite.
lap = diffusion(g, "laplacian").matrix
print("laplacian smallest eigenvalue:", round(float(spectrum(lap, 'dense_full')[0]), 10))
