"""Filter coefficients from the unit-sum constrained quadratic program

    minimize  a^T Q a   subject to  sum(a) = 1,

solved directly through its KKT system.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "FilterCoefficients",
    "UnsolvableFilter",
    "design_filter",
    "objective_value",
    "verify_kkt",
]

SINGULAR_COND = 1e12
RIDGE_START = 1e-10
RIDGE_CAP = 1e-6


class UnsolvableFilter(RuntimeError):
    """KKT system stayed singular through the whole ridge ladder."""


@dataclass(eq=False)
class FilterCoefficients:
    """Unit-sum filter weights for ``x_0, ..., x_d``.

    ``multiplier`` is ``lam`` in ``2 Q a = lam * 1`` when the coefficients came
    from :func:`design_filter`; at the optimum ``a^T Q a = lam / 2``.
    """

    a: np.ndarray
    multiplier: float = float("nan")
    ridge: float = 0.0

    def __post_init__(self):
        self.a = np.asarray(self.a, dtype=float).ravel()

    @property
    def d(self):
        return len(self.a) - 1

    def to_json(self, qhat, path=None):
        payload = {
            "d": self.d,
            "coefficients": self.a.tolist(),
            "objective": objective_value(qhat, self),
            "kkt_residual": verify_kkt(qhat, self),
        }
        text = json.dumps(payload, indent=2) + "\n"
        if path is not None:
            Path(path).write_text(text)
        return text

    @classmethod
    def from_json(cls, path):
        payload = json.loads(Path(path).read_text())
        a = np.array(payload["coefficients"], dtype=float)
        if len(a) != payload["d"] + 1:
            raise ValueError("coefficient count does not match d")
        return cls(a)


def _as_array(q):
    return np.asarray(getattr(q, "q", q), dtype=float)


def _kkt_solve(Q):
    k = Q.shape[0]
    K = np.zeros((k + 1, k + 1))
    K[:k, :k] = 2.0 * Q
    K[:k, k] = 1.0
    K[k, :k] = 1.0
    rhs = np.zeros(k + 1)
    rhs[k] = 1.0
    if not np.all(np.isfinite(K)) or np.linalg.cond(K) > SINGULAR_COND:
        return None
    try:
        sol = np.linalg.solve(K, rhs)
    except np.linalg.LinAlgError:
        return None
    # sign flip: stationarity reads 2 Q a + mu 1 = 0
    return sol[:k], -sol[k]


def design_filter(qhat):
    """Minimize ``a^T Q a`` over unit-sum ``a``.

    ``Q`` is rescaled to unit mean diagonal first (the minimizer does not
    depend on scale).  When the KKT matrix is numerically singular, a ridge
    ``eps * I`` is added, starting at ``1e-10`` and doubling up to ``1e-6``
    (relative to the mean diagonal); as ``eps -> 0`` this picks the
    minimum-norm minimizer.

    Raises
    ------
    UnsolvableFilter
        If no ridge within the ladder makes the system solvable.
    """
    Q = _as_array(qhat)
    if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {Q.shape}")
    Q = 0.5 * (Q + Q.T)
    k = Q.shape[0]
    scale = np.trace(Q) / k
    if not scale > 0 or not np.isfinite(scale):
        raise UnsolvableFilter(f"degenerate Gram matrix (mean diagonal {scale})")
    Qn = Q / scale
    eps = 0.0
    res = _kkt_solve(Qn)
    while res is None:
        eps = RIDGE_START if eps == 0.0 else 2.0 * eps
        if eps > RIDGE_CAP:
            raise UnsolvableFilter("KKT system singular up to ridge 1e-6")
        res = _kkt_solve(Qn + eps * np.eye(k))
    a, lam = res
    # restore the constraint lost to rounding
    a = a + (1.0 - a.sum()) / k
    return FilterCoefficients(a, multiplier=lam * scale, ridge=eps * scale)


def objective_value(qhat, a):
    Q = _as_array(qhat)
    a = np.asarray(getattr(a, "a", a), dtype=float)
    if Q.shape != (len(a), len(a)):
        raise ValueError(f"filter length {len(a)} does not match Gram shape {Q.shape}")
    return float(a @ Q @ a)


def verify_kkt(qhat, a):
    """Stationarity residual ``||2Qa - 2(a^T Q a) 1||_inf / max(1, ||Q||_inf)``."""
    Q = _as_array(qhat)
    a = np.asarray(getattr(a, "a", a), dtype=float)
    g = 2.0 * Q @ a
    r = np.abs(g - 2.0 * (a @ Q @ a)).max()
    return float(r / max(1.0, np.abs(Q).sum(axis=1).max()))
