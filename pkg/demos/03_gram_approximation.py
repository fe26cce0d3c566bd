"""
Moment approximation of the error Gram matrix
=============================================

The moment-based ``Q_hat`` is exact for rotation-invariant matrices.  Draw
iteration matrices with a fixed spectrum and Haar eigenvectors and watch the
Monte-Carlo mean converge to ``Q_hat`` at the ``M^(-1/2)`` rate, then repeat
on an Erdos-Renyi ensemble, where the error levels off.
"""

import numpy as np

from consensus_filters import (ErdosRenyi, SpectrumSpec, approx_gram, calibrate_alpha,
                               estimate_expected_moments, gram_samples, prefix_means,
                               spectral_norm_error)

rng = np.random.default_rng(2)
d, p_sw, M = 4, 0.3, 4000
checkpoints = [10, 100, 1000, 4000]

spectrum = SpectrumSpec(rng.uniform(-0.9, 0.9, 63))
qhat = approx_gram(d, p_sw, spectrum.moments(2 * d))
means = prefix_means(gram_samples(spectrum, d, p_sw, M, rng), checkpoints)
print("rotation-invariant ensemble")
for m, q in zip(checkpoints, means):
    print(f"  M={m:5d}  ||Q_hat - mean||_2 = {spectral_norm_error(qhat, q):.2e}")

spec = ErdosRenyi(200, 0.05)
alpha = calibrate_alpha(spec, 100, rng)
qhat = approx_gram(d, p_sw, estimate_expected_moments(spec, alpha, 2 * d, 200, rng))
means = prefix_means(gram_samples(spec, d, p_sw, 1000, rng, alpha=alpha), checkpoints[:3])
print("Erdos-Renyi ensemble")
for m, q in zip(checkpoints, means):
    print(f"  M={m:5d}  ||Q_hat - mean||_2 = {spectral_norm_error(qhat, q):.2e}")
