"""Consensus-acceleration filters for randomly switching networks.

The core object is the approximate expected Gram matrix of state errors over
a filter window, built from switching probabilities and the moments of the
iteration matrices' expected spectral density.  Minimizing the quadratic form
it defines under a unit-sum constraint gives the filter coefficients.
"""

from .design import FilterCoefficients, UnsolvableFilter, design_filter, objective_value, verify_kkt
from .dynamics import (AlphaOutOfRange, IterationMatrix, StateTrajectory, apply_filter,
                       calibrate_alpha, consensus_error, evolve_window, iteration_matrix)
from .graphs import (ErdosRenyi, FixedGraph, GraphSample, RandomLocation, RetriesExhausted,
                     StochasticBlockModel, connectivity_radius, is_connected, laplacian,
                     sample_connected, sample_graph)
from .gram import (GramMatrix, InsufficientOrder, SpectrumSpec, approx_gram,
                   approx_gram_given_sequence, empirical_gram, gram_samples, prefix_means,
                   sample_error_vector, sample_invariant_matrix, sample_mean_gram,
                   spectral_norm_error)
from .moments import (MomentTable, estimate_expected_moments, moments_from_spectrum,
                      nonconsensus_moments, trace_moments)
from .switching import (composition_of, enumerate_sequences, partial_count,
                        sample_sequence, sequence_probability)

__version__ = "0.1.0"
