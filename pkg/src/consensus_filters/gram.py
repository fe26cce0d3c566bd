"""Gram matrices of state errors over a filter window.

``Q[i, j] = <x_i, x_j>`` where ``x_k`` is the error state after ``k`` steps
from a unit initial error ``v`` orthogonal to the all-ones vector.  This
module computes

* the empirical ``Q`` of a realized window,
* its moment-based approximation for a given switching sequence and the
  switching-averaged approximation,
* Monte-Carlo sample means (with prefix means for error-vs-M curves), and
* a synthetic ensemble with fixed spectrum and Haar-random eigenvectors, in
  which the approximation is exact.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .dynamics import IterationMatrix, evolve_window, iteration_matrix
from .graphs import DEFAULT_MAX_RETRIES, FixedGraph, sample_connected
from .moments import MomentTable, moments_from_spectrum
from .switching import (_check_d, composition_of, enumerate_sequences,
                        partial_counts, sample_sequence, sequence_probability)

__all__ = [
    "GRAM_KINDS",
    "GramMatrix",
    "SpectrumSpec",
    "InsufficientOrder",
    "sample_error_vector",
    "empirical_gram",
    "approx_gram_given_sequence",
    "approx_gram",
    "gram_samples",
    "sample_mean_gram",
    "prefix_means",
    "spectral_norm_error",
    "haar_complement_basis",
    "sample_invariant_matrix",
]

GRAM_KINDS = ("empirical", "approx_given_s", "approx_expected", "sample_mean")


class InsufficientOrder(ValueError):
    """Moment table does not reach order ``2 d``."""


@dataclass(eq=False)
class GramMatrix:
    q: np.ndarray
    kind: str

    def __post_init__(self):
        self.q = np.asarray(self.q, dtype=float)
        if self.q.ndim != 2 or self.q.shape[0] != self.q.shape[1]:
            raise ValueError(f"Gram matrix must be square, got {self.q.shape}")
        if self.kind not in GRAM_KINDS:
            raise ValueError(f"unknown Gram kind {self.kind!r}")

    @property
    def d(self):
        return self.q.shape[0] - 1

    def min_eigenvalue(self):
        return float(np.linalg.eigvalsh(self.q)[0])

    def to_csv(self, path=None):
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["d", "kind"])
        w.writerow([self.d, self.kind])
        for row in self.q:
            w.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_csv(cls, source):
        text = Path(source).read_text() if not str(source).startswith("d,") else source
        rows = list(csv.reader(io.StringIO(text)))
        d, kind = int(rows[1][0]), rows[1][1]
        q = np.array([[float(x) for x in r] for r in rows[2:] if r])
        if q.shape != (d + 1, d + 1):
            raise ValueError(f"expected a {d + 1}x{d + 1} matrix, got {q.shape}")
        return cls(q, kind)


@dataclass(frozen=True, eq=False)
class SpectrumSpec:
    """Non-consensus eigenvalues for the rotation-invariant ensemble."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).ravel()
        if len(v) < 1:
            raise ValueError("spectrum must contain at least one value")
        if np.any(np.abs(v) >= 1):
            raise ValueError("spectrum values must lie in (-1, 1)")
        object.__setattr__(self, "values", v)

    @property
    def n(self):
        return len(self.values) + 1

    def moments(self, order):
        return moments_from_spectrum(self.values, order)


def sample_error_vector(n, rng):
    """Uniform draw from unit vectors orthogonal to the all-ones vector."""
    if n < 2:
        raise ValueError("n must be >= 2")
    z = rng.standard_normal(n)
    z -= z.mean()
    return z / np.linalg.norm(z)


def empirical_gram(matrices, v):
    traj = evolve_window(matrices, v)
    X = traj.as_array()
    q = X.T @ X
    # X.T @ X is symmetric up to rounding; make it exact
    q = 0.5 * (q + q.T)
    return GramMatrix(q, "empirical")


def _moment_array(moments, d):
    m = moments.moments if isinstance(moments, MomentTable) else np.asarray(moments, float)
    if len(m) - 1 < 2 * d:
        raise InsufficientOrder(
            f"window length {d} needs moments up to order {2 * d}, "
            f"table has order {len(m) - 1}")
    return m


def approx_gram_given_sequence(s, moments):
    """``Q[i, j] = prod_m mom[c_m(i) + c_m(j)]`` where ``c_m(n)`` counts the
    steps network ``m`` has been used by step ``n``."""
    d = len(s)
    m = _moment_array(moments, d)
    C = partial_counts(s)
    q = np.ones((d + 1, d + 1))
    for row in C:
        q *= m[row[:, None] + row[None, :]]
    return GramMatrix(q, "approx_given_s")


def _segment_factor(m, d, start, stop):
    # moment factor of one network used for steps start..stop (1-based, inclusive)
    cnt = np.clip(np.arange(d + 1) - (start - 1), 0, stop - start + 1)
    return m[cnt[:, None] + cnt[None, :]]


def approx_gram(d, p_sw, moments, method="recursive"):
    """Switching-averaged approximation ``sum_s p(s) Q(s)``.

    ``method="enumerate"`` sums over all ``2**(d-1)`` sequences.  The
    default ``"recursive"`` gives the same sum in ``O(d^2)`` matrix products
    by splitting on the step at which the last network starts: each network
    segment contributes an independent elementwise factor and its own share
    of the switching probability.
    """
    _check_d(d)
    if not 0.0 <= p_sw <= 1.0:
        raise ValueError(f"p_sw must lie in [0, 1], got {p_sw}")
    m = _moment_array(moments, d)
    if method == "enumerate":
        q = np.zeros((d + 1, d + 1))
        for s in enumerate_sequences(d):
            q += sequence_probability(s, p_sw) * approx_gram_given_sequence(s, m).q
        return GramMatrix(q, "approx_expected")
    if method != "recursive":
        raise ValueError(f"unknown method {method!r}")
    # acc[u]: weighted sum over segmentations of steps 1..u
    acc = [np.ones((d + 1, d + 1))]
    for u in range(1, d + 1):
        total = np.zeros((d + 1, d + 1))
        for t in range(1, u + 1):
            w = (1.0 - p_sw) ** (u - t) * (p_sw if t > 1 else 1.0)
            if w == 0.0:
                continue
            total += w * acc[t - 1] * _segment_factor(m, d, t, u)
        acc.append(total)
    return GramMatrix(acc[d], "approx_expected")


def haar_complement_basis(n, rng):
    """Haar-random orthonormal basis (``n x (n-1)``) of the complement of
    the all-ones vector."""
    G = rng.standard_normal((n, n - 1))
    G -= G.mean(axis=0, keepdims=True)
    Q, R = np.linalg.qr(G)
    # sign fix so the distribution is exactly Haar
    return Q * np.sign(np.diag(R))


def sample_invariant_matrix(spectrum, rng):
    """``W = J + U diag(spectrum) U^T`` with ``U`` Haar on the complement of 1."""
    n = spectrum.n
    U = haar_complement_basis(n, rng)
    w = (U * spectrum.values) @ U.T + 1.0 / n
    w = 0.5 * (w + w.T)
    return IterationMatrix(w, float("nan"))


def _matrix_sampler(source, alpha, max_retries):
    if isinstance(source, SpectrumSpec):
        return source.n, lambda rng: sample_invariant_matrix(source, rng)
    if alpha is None:
        alpha = source.alpha
    if alpha is None:
        raise ValueError("alpha must be given for graph models")
    if isinstance(source, FixedGraph):
        W = iteration_matrix(source.graph, alpha)
        return source.n, lambda rng: W
    return source.n, lambda rng: iteration_matrix(
        sample_connected(source, rng, max_retries), alpha, check=False)


def gram_samples(source, d, p_sw, M, rng, alpha=None,
                 max_retries=DEFAULT_MAX_RETRIES):
    """Independent empirical Gram matrices, shape ``(M, d + 1, d + 1)``.

    Each sample draws its own error vector, switching sequence, and one
    network per switch.  Sample ``i`` uses the ``i``-th child stream spawned
    from ``rng``, so the first ``M'`` samples do not depend on ``M``.

    Parameters
    ----------
    source : ModelSpec or SpectrumSpec
        Graph model (``W = I - alpha L``) or fixed spectrum with Haar
        eigenvectors.
    alpha : float, optional
        Step size; defaults to ``source.alpha`` for graph models.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    if isinstance(source, SpectrumSpec):
        return _invariant_gram_samples(source, d, p_sw, M, rng)
    n, draw = _matrix_sampler(source, alpha, max_retries)
    out = np.empty((M, d + 1, d + 1))
    for i, child in enumerate(rng.spawn(M)):
        v = sample_error_vector(n, child)
        s = sample_sequence(d, p_sw, child)
        mats = []
        for c in composition_of(s):
            W = draw(child)
            mats.extend([W] * c)
        out[i] = empirical_gram(mats, v).q
    return out


def _haar_isometry(rows, cols, rng):
    Q, R = np.linalg.qr(rng.standard_normal((rows, cols)))
    return Q * np.sign(np.diag(R))


def _invariant_gram_samples(spectrum, d, p_sw, M, rng):
    # Exact in distribution but avoids full n x n rotations.  States are kept
    # in the eigenbasis of the current network (coordinates on the complement
    # of 1).  At a switch the new eigenbasis is a Haar rotation O of the old
    # one, and only O restricted to the span of the states so far matters;
    # that restriction is a Haar isometry of at most d + 1 columns.
    n, lam = spectrum.n, spectrum.values
    out = np.empty((M, d + 1, d + 1))
    for i, child in enumerate(rng.spawn(M)):
        comp = composition_of(sample_sequence(d, p_sw, child))
        # the initial error is uniform on the unit sphere of the complement
        z = child.standard_normal(n - 1)
        X = np.empty((n - 1, d + 1))
        X[:, 0] = z / np.linalg.norm(z)
        col = 1
        for m, c in enumerate(comp):
            if m:
                B, C = np.linalg.qr(X[:, :col])
                X[:, :col] = _haar_isometry(n - 1, B.shape[1], child) @ C
            for _ in range(c):
                X[:, col] = lam * X[:, col - 1]
                col += 1
        q = X.T @ X
        out[i] = 0.5 * (q + q.T)
    return out


def prefix_means(samples, checkpoints=None):
    """Running means of a sample stack; rows at ``checkpoints`` (1-based
    counts) if given, else every prefix."""
    csum = np.cumsum(samples, axis=0)
    counts = np.arange(1, len(samples) + 1)[:, None, None]
    means = csum / counts
    if checkpoints is None:
        return means
    return means[np.asarray(checkpoints) - 1]


def sample_mean_gram(source, d, p_sw, M, rng, alpha=None,
                     max_retries=DEFAULT_MAX_RETRIES):
    samples = gram_samples(source, d, p_sw, M, rng, alpha, max_retries)
    # same reduction as prefix_means so prefixes of longer runs match bitwise
    return GramMatrix(prefix_means(samples, [M])[0], "sample_mean")


def spectral_norm_error(a, b):
    qa = a.q if isinstance(a, GramMatrix) else np.asarray(a, float)
    qb = b.q if isinstance(b, GramMatrix) else np.asarray(b, float)
    if qa.shape != qb.shape:
        raise ValueError(f"shape mismatch {qa.shape} vs {qb.shape}")
    diff = qa - qb
    if np.allclose(diff, diff.T, rtol=0, atol=1e-13 * max(1.0, np.abs(diff).max())):
        return float(np.abs(np.linalg.eigvalsh(0.5 * (diff + diff.T))).max())
    return float(np.linalg.norm(diff, 2))
