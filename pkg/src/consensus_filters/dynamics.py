"""Consensus iteration matrices, state evolution, and periodic filtering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .graphs import DEFAULT_MAX_RETRIES, is_connected, laplacian, sample_connected

__all__ = [
    "AlphaOutOfRange",
    "IterationMatrix",
    "StateTrajectory",
    "iteration_matrix",
    "calibrate_alpha",
    "evolve_window",
    "apply_filter",
    "consensus_error",
    "consensus_projector",
]

ROW_SUM_TOL = 1e-10


class AlphaOutOfRange(ValueError):
    """Step size violates ``0 < alpha < 2 / lambda_max(L)``."""


@dataclass(frozen=True, eq=False)
class IterationMatrix:
    w: np.ndarray
    alpha: float = float("nan")

    @property
    def n(self):
        return self.w.shape[0]

    def __matmul__(self, x):
        return self.w @ x


@dataclass
class StateTrajectory:
    """States ``x_0, ..., x_d`` over one filter window."""

    states: list

    def __len__(self):
        return len(self.states)

    def as_array(self):
        return np.column_stack(self.states)


def consensus_projector(n):
    return np.full((n, n), 1.0 / n)


def iteration_matrix(g, alpha, check=True):
    """Build ``W = I - alpha * L(g)``.

    With ``check=True`` (default) the graph must be connected and
    ``alpha * lambda_max(L) < 2``, which together give a spectral radius of
    ``W - J`` below one.  The cheap bound ``lambda_max <= max_(i,j) d_i + d_j``
    is tried before falling back to an eigensolve.
    """
    L = laplacian(g)
    if check:
        if not alpha > 0:
            raise AlphaOutOfRange(f"alpha must be positive, got {alpha}")
        if not is_connected(g):
            raise AlphaOutOfRange("graph is disconnected; no alpha gives "
                                  "spectral radius below one")
        e = g.edges
        bound = (g.degree[e[:, 0]] + g.degree[e[:, 1]]).max()
        if alpha * bound >= 2:
            lmax = np.linalg.eigvalsh(L)[-1]
            if alpha * lmax >= 2:
                raise AlphaOutOfRange(
                    f"alpha={alpha:g} >= 2/lambda_max = {2 / lmax:g}")
    w = -alpha * L
    w[np.diag_indices(g.n)] += 1.0
    return IterationMatrix(w, float(alpha))


def calibrate_alpha(spec, trials, rng, max_retries=DEFAULT_MAX_RETRIES):
    """Approximately optimal step size for a random network model.

    Returns ``2 / (E[lambda_2] + E[lambda_max])`` where the expectations are
    sample means over ``trials`` connected draws of the Laplacian's smallest
    nonzero and largest eigenvalues.  For a fixed graph this minimizes the
    spectral radius of ``W - J``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    l2 = lmax = 0.0
    for _ in range(trials):
        g = sample_connected(spec, rng, max_retries)
        ev = np.linalg.eigvalsh(laplacian(g))
        l2 += ev[1]
        lmax += ev[-1]
    return 2.0 / ((l2 + lmax) / trials)


def evolve_window(matrices, x0):
    """Run ``x_k = W_k x_{k-1}`` for each matrix in turn.

    ``states[0]`` is ``x0`` itself.
    """
    x = np.asarray(x0, dtype=float)
    states = [x]
    for W in matrices:
        w = W.w if isinstance(W, IterationMatrix) else np.asarray(W)
        if w.shape != (x.shape[0], x.shape[0]):
            raise ValueError(
                f"matrix shape {w.shape} does not match state length {x.shape[0]}")
        x = w @ x
        states.append(x)
    return StateTrajectory(states)


def apply_filter(traj, a):
    """Weighted combination ``sum_k a[k] * states[k]``."""
    a = np.asarray(getattr(a, "a", a), dtype=float)
    if len(a) != len(traj):
        raise ValueError(
            f"filter has {len(a)} coefficients but trajectory has {len(traj)} states")
    out = np.zeros_like(traj.states[0], dtype=float)
    for ak, xk in zip(a, traj.states):
        out = out + ak * xk
    return out


def consensus_error(x):
    """Distance from ``x`` to its average-consensus vector."""
    x = np.asarray(x, dtype=float)
    return float(np.linalg.norm(x - x.mean()))
