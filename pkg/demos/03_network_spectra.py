"""Random link ensembles and the contraction of disagreement.

Each step draws one edge-set; Metropolis weights turn it into a mixing
matrix.  Disagreement between agents shrinks on average when the spectral
radius of the averaged off-consensus matrix is below one, which happens
exactly when the union of edge-sets is connected.
"""

import numpy as np

from fadesim import network as net

rng = np.random.default_rng(0)
for density in (0.01, 0.022, 0.05, 0.1, 0.3):
    ens = net.generate_random_ensemble(50, 15, density, rng)
    weights = [net.metropolis_weights(e, ens.nodes, k) for k, e in enumerate(ens.edge_sets)]
    rep = net.average_matrices(ens, weights)
    stats = net.ensemble_stats(ens)
    print(f"density {density:<5}  coverage {stats['union_coverage']:5.0%}  "
          f"degree {stats['mean_degree']:5.2f}  rho {rep.rho_tilde:.4f}  "
          f"lambda_2 {rep.second_eig_bar:.4f}")

# Split the nodes into two halves that never talk: no contraction.
halves = [[(i, j) for i in range(10) for j in range(i + 1, 10) if (i < 5) == (j < 5)]]
ens = net.EdgeSetEnsemble(10, halves)
rep = net.average_matrices(ens, [net.metropolis_weights(ens.edge_sets[0], 10)])
print("\ntwo islands: connected =", rep.connected, " rho =", round(rep.rho_tilde, 12))
