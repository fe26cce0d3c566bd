"""
Filtering on a switching network
================================

Run consensus on an Erdos-Renyi network that is redrawn with probability
``p_sw`` at each step, with and without the designed filter applied at the
end of each window.
"""

import tempfile

import numpy as np

from consensus_filters.experiment import config_from_dict, run_convergence

with tempfile.TemporaryDirectory() as out:
    cfg = config_from_dict({"model": {"type": "erdos_renyi", "n": 200, "p": 0.05},
                            "d": 5, "p_sw": 0.4, "windows": 4,
                            "convergence_runs": 20, "moment_trials": 200,
                            "seed": 3, "output_dir": out})
    _, filtered, unfiltered = run_convergence(cfg)

for k in range(0, filtered.shape[1], cfg.d):
    print(f"iteration {k:2d}  median error  filtered={np.median(filtered[:, k]):.3e}"
          f"  unfiltered={np.median(unfiltered[:, k]):.3e}")
