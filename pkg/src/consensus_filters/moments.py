"""Moments of the empirical spectral density of iteration matrices.

Only the ``N - 1`` non-consensus eigenvalues enter, each with weight
``1 / (N - 1)``; the eigenvalue 1 belonging to the all-ones vector is left
out.  Because ``W - J`` has the same spectrum with that eigenvalue replaced
by 0, ``m_k = trace((W - J)^k) / (N - 1)`` for ``k >= 1``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dynamics import IterationMatrix, iteration_matrix
from .graphs import DEFAULT_MAX_RETRIES, model_to_dict, sample_connected

__all__ = [
    "MomentTable",
    "nonconsensus_moments",
    "trace_moments",
    "moments_from_spectrum",
    "estimate_expected_moments",
    "hankel",
]


@dataclass
class MomentTable:
    moments: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.moments = np.asarray(self.moments, dtype=float)
        if self.moments.ndim != 1 or len(self.moments) == 0:
            raise ValueError("moments must be a non-empty 1-D sequence")

    @property
    def order(self):
        return len(self.moments) - 1

    def __getitem__(self, k):
        return self.moments[k]

    def to_dict(self):
        d = {"order": self.order, "moments": self.moments.tolist()}
        for key in ("spec", "alpha", "trials", "seed"):
            d[key] = self.meta.get(key)
        for key, val in self.meta.items():
            d.setdefault(key, val)
        return d

    @classmethod
    def from_dict(cls, d):
        moments = d["moments"]
        if d.get("order", len(moments) - 1) != len(moments) - 1:
            raise ValueError("order does not match the number of moments")
        meta = {k: v for k, v in d.items() if k not in ("order", "moments")}
        return cls(np.array(moments, dtype=float), meta)

    def save(self, path):
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))


def hankel(table, size=None):
    """Hankel matrix ``H[i, j] = m_{i+j}``; PSD for any genuine density."""
    m = table.moments if isinstance(table, MomentTable) else np.asarray(table)
    if size is None:
        size = len(m) // 2 + 1
    idx = np.add.outer(np.arange(size), np.arange(size))
    return m[idx]


def _deflated(w):
    w = w.w if isinstance(w, IterationMatrix) else np.asarray(w, dtype=float)
    return w - 1.0 / w.shape[0]


def moments_from_spectrum(values, order):
    """Power moments ``mean(values**k)`` for ``k = 0..order``."""
    values = np.asarray(values, dtype=float)
    if order < 0:
        raise ValueError("order must be >= 0")
    powers = values[None, :] ** np.arange(order + 1)[:, None]
    m = powers.mean(axis=1)
    m[0] = 1.0
    return MomentTable(m)


def nonconsensus_moments(w, order):
    """Moments from a symmetric eigensolve of ``W - J``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    B = _deflated(w)
    n = B.shape[0]
    try:
        ev = np.linalg.eigvalsh(B)
    except np.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            f"eigensolve failed for {n}x{n} iteration matrix id={id(w):#x}") from exc
    # the consensus direction maps to the zero eigenvalue, which only adds 0**0
    m = (ev[None, :] ** np.arange(order + 1)[:, None]).sum(axis=1) / (n - 1)
    m[0] = 1.0
    return MomentTable(m)


def trace_moments(w, order):
    """Eigensolve-free moments via repeated products of ``W - J``."""
    if order < 0:
        raise ValueError("order must be >= 0")
    B = _deflated(w)
    n = B.shape[0]
    m = np.empty(order + 1)
    m[0] = 1.0
    P = np.eye(n)
    for k in range(1, order + 1):
        P = P @ B
        m[k] = np.trace(P) / (n - 1)
    return MomentTable(m)


def estimate_expected_moments(spec, alpha, order, trials, rng,
                              max_retries=DEFAULT_MAX_RETRIES, seed=None):
    """Monte-Carlo mean of :func:`nonconsensus_moments` over connected draws.

    ``W = I - alpha * L`` is formed without the spectral radius check so the
    ensemble is not conditioned on it; the number of draws whose radius
    reaches one is stored as ``meta["radius_violations"]``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    total = np.zeros(order + 1)
    violations = 0
    for _ in range(trials):
        g = sample_connected(spec, rng, max_retries)
        W = iteration_matrix(g, alpha, check=False)
        B = _deflated(W)
        ev = np.linalg.eigvalsh(B)
        if np.abs(ev).max() >= 1.0:
            violations += 1
        total += (ev[None, :] ** np.arange(order + 1)[:, None]).sum(axis=1) / (g.n - 1)
    m = total / trials
    m[0] = 1.0
    meta = {
        "spec": model_to_dict(spec),
        "alpha": float(alpha),
        "trials": int(trials),
        "seed": seed,
        "radius_violations": violations,
    }
    return MomentTable(m, meta)
