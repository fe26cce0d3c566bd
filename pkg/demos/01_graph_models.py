"""
Random network models and their iteration matrices
===================================================

Draw connected graphs from the three random models, build ``W = I - alpha L``
and look at how fast plain consensus contracts on each.
"""

import numpy as np

from consensus_filters import (ErdosRenyi, RandomLocation, StochasticBlockModel,
                               calibrate_alpha, connectivity_radius, iteration_matrix,
                               sample_connected)

rng = np.random.default_rng(0)
n = 200
models = {
    "Erdos-Renyi": ErdosRenyi(n, 0.15),
    "random location": RandomLocation(n, connectivity_radius(n)),
    "block model": StochasticBlockModel([33, 67, 100],
                                        [[0.12, 0.06, 0.06],
                                         [0.06, 0.12, 0.06],
                                         [0.06, 0.06, 0.12]]),
}

for name, spec in models.items():
    # step size from the average extreme Laplacian eigenvalues
    alpha = calibrate_alpha(spec, 50, rng)
    g = sample_connected(spec, rng)
    W = iteration_matrix(g, alpha, check=False)
    ev = np.linalg.eigvalsh(W.w - 1.0 / n)
    print(f"{name:16s} edges={g.num_edges:5d}  alpha={alpha:.4f}  "
          f"spectral radius of W - J = {np.abs(ev).max():.3f}")
