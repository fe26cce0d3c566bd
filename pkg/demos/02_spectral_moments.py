"""
Moments of the non-consensus spectrum
=====================================

Expected moments ``E[m_k]`` of a random network ensemble are the only
model information the filter design needs.  Compare an eigensolve against
traces of powers on a single draw, then average over many draws.
"""

import numpy as np

from consensus_filters import (ErdosRenyi, calibrate_alpha, estimate_expected_moments,
                               iteration_matrix, nonconsensus_moments, sample_connected,
                               trace_moments)

rng = np.random.default_rng(1)
spec = ErdosRenyi(200, 0.05)
alpha = calibrate_alpha(spec, 100, rng)

W = iteration_matrix(sample_connected(spec, rng), alpha, check=False)
by_eig = nonconsensus_moments(W, 6)
by_trace = trace_moments(W, 6)
print("single draw, eigensolve :", np.round(by_eig.moments, 5))
print("single draw, traces     :", np.round(by_trace.moments, 5))

table = estimate_expected_moments(spec, alpha, 6, 200, rng)
print("expected over 200 draws :", np.round(table.moments, 5))
print("draws with radius >= 1  :", table.meta["radius_violations"])
