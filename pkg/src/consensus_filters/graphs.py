"""Random undirected network models and their combinatorial Laplacians.

Three distributions are supported (Erdos-Renyi, random location on the unit
square, stochastic block model), plus ``FixedGraph`` for a frozen,
zero-variance ensemble.  Every sampler is a pure function of the model and
the ``numpy.random.Generator`` it is handed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist, squareform

__all__ = [
    "ErdosRenyi",
    "RandomLocation",
    "StochasticBlockModel",
    "FixedGraph",
    "ModelSpec",
    "GraphSample",
    "RetriesExhausted",
    "sample_graph",
    "sample_connected",
    "laplacian",
    "is_connected",
    "connectivity_radius",
    "model_to_dict",
    "model_from_dict",
]

DEFAULT_MAX_RETRIES = 100


class RetriesExhausted(RuntimeError):
    """Every draw within the retry budget was disconnected."""


def _check_prob(name, p):
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {p}")


def _check_alpha(alpha):
    if alpha is not None and not alpha > 0:
        raise ValueError(f"alpha must be positive, got {alpha}")


@dataclass(frozen=True)
class ErdosRenyi:
    n: int
    p: float
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        _check_prob("p", self.p)
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class RandomLocation:
    """Nodes uniform on the unit square, linked when within ``radius``."""

    n: int
    radius: float
    alpha: Optional[float] = None

    def __post_init__(self):
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")
        if not self.radius > 0:
            raise ValueError(f"radius must be positive, got {self.radius}")
        _check_alpha(self.alpha)


@dataclass(frozen=True)
class StochasticBlockModel:
    """Link probability ``probs[a][b]`` between populations ``a`` and ``b``.

    Nodes are assigned to populations in contiguous blocks following
    ``sizes``.
    """

    sizes: tuple
    probs: tuple
    alpha: Optional[float] = None

    def __post_init__(self):
        sizes = tuple(int(s) for s in self.sizes)
        probs = tuple(tuple(float(x) for x in row) for row in self.probs)
        object.__setattr__(self, "sizes", sizes)
        object.__setattr__(self, "probs", probs)
        if any(s < 1 for s in sizes):
            raise ValueError("population sizes must be positive")
        if sum(sizes) < 2:
            raise ValueError("SBM needs at least 2 nodes")
        P = np.asarray(probs)
        if P.shape != (len(sizes), len(sizes)):
            raise ValueError(
                f"probs must be {len(sizes)}x{len(sizes)}, got shape {P.shape}")
        if not np.array_equal(P, P.T):
            raise ValueError("probs must be symmetric")
        if P.min() < 0 or P.max() > 1:
            raise ValueError("probs must lie in [0, 1]")
        _check_alpha(self.alpha)

    @property
    def n(self):
        return sum(self.sizes)

    def membership(self):
        return np.repeat(np.arange(len(self.sizes)), self.sizes)


@dataclass(frozen=True)
class FixedGraph:
    """Degenerate ensemble that always returns the same graph."""

    graph: "GraphSample"
    alpha: Optional[float] = None

    def __post_init__(self):
        _check_alpha(self.alpha)

    @property
    def n(self):
        return self.graph.n


ModelSpec = Union[ErdosRenyi, RandomLocation, StochasticBlockModel, FixedGraph]


@dataclass(frozen=True, eq=False)
class GraphSample:
    """Simple undirected graph stored as an edge list.

    ``edges`` is an ``(E, 2)`` integer array with ``i < j`` in every row.
    """

    n: int
    edges: np.ndarray
    degree: np.ndarray = field(repr=False)

    @classmethod
    def from_edges(cls, n, edges):
        e = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        if len(e):
            if np.any(e[:, 0] == e[:, 1]):
                raise ValueError("self-loops are not allowed")
            if e.min() < 0 or e.max() >= n:
                raise ValueError("edge endpoint out of range")
        e = np.sort(e, axis=1)
        e = np.unique(e, axis=0)
        degree = np.bincount(e.ravel(), minlength=n)
        return cls(n, e, degree)

    @classmethod
    def from_adjacency(cls, A):
        A = np.asarray(A)
        i, j = np.nonzero(np.triu(A, 1))
        return cls.from_edges(A.shape[0], np.column_stack([i, j]))

    @property
    def num_edges(self):
        return len(self.edges)

    def adjacency(self):
        A = np.zeros((self.n, self.n))
        A[self.edges[:, 0], self.edges[:, 1]] = 1.0
        A[self.edges[:, 1], self.edges[:, 0]] = 1.0
        return A


def connectivity_radius(n, factor=1.2):
    """Radius ``factor * sqrt(ln(n) / n)`` that makes a random location
    network connected with high probability."""
    return factor * np.sqrt(np.log(n) / n)


def _upper_bernoulli(P, rng):
    # P: full symmetric probability matrix; only the strict upper triangle is used
    n = P.shape[0]
    i, j = np.triu_indices(n, 1)
    keep = rng.random(len(i)) < P[i, j]
    return np.column_stack([i[keep], j[keep]])


def sample_graph(spec, rng):
    """Draw one graph from ``spec``.

    Connectivity is not enforced here; see :func:`sample_connected`.
    """
    if isinstance(spec, FixedGraph):
        return spec.graph
    if isinstance(spec, ErdosRenyi):
        n = spec.n
        i, j = np.triu_indices(n, 1)
        keep = rng.random(len(i)) < spec.p
        edges = np.column_stack([i[keep], j[keep]])
    elif isinstance(spec, StochasticBlockModel):
        pop = spec.membership()
        P = np.asarray(spec.probs)[pop[:, None], pop[None, :]]
        n = spec.n
        edges = _upper_bernoulli(P, rng)
    elif isinstance(spec, RandomLocation):
        n = spec.n
        xy = rng.random((n, 2))
        close = squareform(pdist(xy) <= spec.radius)
        i, j = np.nonzero(np.triu(close, 1))
        edges = np.column_stack([i, j])
    else:
        raise TypeError(f"unknown model spec {type(spec).__name__}")
    degree = np.bincount(edges.ravel(), minlength=n)
    return GraphSample(n, edges.astype(np.int64), degree)


def is_connected(g):
    if g.n <= 1:
        return True
    if g.num_edges < g.n - 1:
        return False
    A = coo_matrix((np.ones(g.num_edges), (g.edges[:, 0], g.edges[:, 1])),
                   shape=(g.n, g.n))
    ncomp, _ = connected_components(A, directed=False)
    return ncomp == 1


def sample_connected(spec, rng, max_retries=DEFAULT_MAX_RETRIES,
                     return_retries=False):
    """Rejection-sample until a connected graph appears.

    Parameters
    ----------
    spec : ModelSpec
    rng : numpy.random.Generator
    max_retries : int
        Maximum number of draws before giving up.
    return_retries : bool
        If True, also return the number of rejected draws.

    Raises
    ------
    RetriesExhausted
        When ``max_retries`` consecutive draws are disconnected, which
        usually means the model is too sparse.
    """
    if max_retries < 1:
        raise ValueError("max_retries must be >= 1")
    for attempt in range(max_retries):
        g = sample_graph(spec, rng)
        if is_connected(g):
            return (g, attempt) if return_retries else g
    raise RetriesExhausted(
        f"{max_retries} disconnected draws from {type(spec).__name__} "
        f"(n={spec.n})")


def laplacian(g):
    """Dense combinatorial Laplacian ``D - A``."""
    L = -g.adjacency()
    L[np.diag_indices(g.n)] = g.degree
    return L


def model_to_dict(spec):
    """JSON-ready description of a model; inverse of :func:`model_from_dict`."""
    if isinstance(spec, ErdosRenyi):
        d = {"type": "erdos_renyi", "n": spec.n, "p": spec.p}
    elif isinstance(spec, RandomLocation):
        d = {"type": "random_location", "n": spec.n, "radius": spec.radius}
    elif isinstance(spec, StochasticBlockModel):
        d = {"type": "sbm", "sizes": list(spec.sizes),
             "probs": [list(r) for r in spec.probs]}
    elif isinstance(spec, FixedGraph):
        d = {"type": "fixed", "n": spec.n, "edges": spec.graph.edges.tolist()}
    else:
        raise TypeError(f"unknown model spec {type(spec).__name__}")
    if spec.alpha is not None:
        d["alpha"] = spec.alpha
    return d


_MODEL_KEYS = {
    "erdos_renyi": {"n", "p"},
    "random_location": {"n", "radius", "radius_rule"},
    "sbm": {"sizes", "probs"},
    "fixed": {"n", "edges"},
}


def model_from_dict(d):
    """Build a model from its dict form.

    ``random_location`` accepts ``"radius_rule": "connectivity"`` in place of
    an explicit radius, giving ``1.2 * sqrt(ln(n) / n)``.  Unknown keys raise
    ``ValueError`` naming the offending field.
    """
    d = dict(d)
    kind = d.pop("type", None)
    if kind not in _MODEL_KEYS:
        raise ValueError(f"model.type: expected one of {sorted(_MODEL_KEYS)}, got {kind!r}")
    alpha = d.pop("alpha", None)
    unknown = set(d) - _MODEL_KEYS[kind]
    if unknown:
        raise ValueError(f"model: unknown keys {sorted(unknown)} for type {kind!r}")
    try:
        if kind == "erdos_renyi":
            return ErdosRenyi(int(d["n"]), float(d["p"]), alpha)
        if kind == "random_location":
            rule = d.get("radius_rule")
            if rule is not None and "radius" in d:
                raise ValueError("model: give either radius or radius_rule, not both")
            if rule is None:
                radius = float(d["radius"])
            elif rule == "connectivity":
                radius = float(connectivity_radius(int(d["n"])))
            else:
                raise ValueError(f"model.radius_rule: unknown rule {rule!r}")
            return RandomLocation(int(d["n"]), radius, alpha)
        if kind == "sbm":
            return StochasticBlockModel(d["sizes"], d["probs"], alpha)
        return FixedGraph(GraphSample.from_edges(int(d["n"]), d["edges"]), alpha)
    except KeyError as exc:
        raise ValueError(f"model.{exc.args[0]}: missing required field") from None
