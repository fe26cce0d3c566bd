"""
Designing filter coefficients
=============================

Minimize ``a^T Q_hat a`` subject to unit sum.  On a star graph the
non-consensus spectrum has two distinct values, so a two-step filter reaches
consensus exactly.
"""

import numpy as np

from consensus_filters import (FixedGraph, GraphSample, approx_gram, apply_filter,
                               calibrate_alpha, consensus_error, design_filter,
                               evolve_window, iteration_matrix, nonconsensus_moments,
                               objective_value, verify_kkt)

n = 10
star = GraphSample.from_edges(n, [(0, i) for i in range(1, n)])
alpha = calibrate_alpha(FixedGraph(star), 1, np.random.default_rng(0))
W = iteration_matrix(star, alpha)

qhat = approx_gram(2, 0.0, nonconsensus_moments(W, 4))
filt = design_filter(qhat)
print("coefficients :", np.round(filt.a, 6))
print("objective    :", objective_value(qhat, filt))
print("KKT residual :", verify_kkt(qhat, filt))

x0 = np.random.default_rng(1).standard_normal(n)
traj = evolve_window([W, W], x0)
print("error after 2 plain steps :", consensus_error(traj.states[-1]))
print("error after filtering     :", consensus_error(apply_filter(traj, filt)))
