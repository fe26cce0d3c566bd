import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from consensus_filters.dynamics import (AlphaOutOfRange, IterationMatrix, StateTrajectory,
                                        apply_filter, calibrate_alpha, consensus_error,
                                        consensus_projector, evolve_window, iteration_matrix)
from consensus_filters.graphs import (ErdosRenyi, FixedGraph, GraphSample, laplacian,
                                      sample_connected)


def path(n):
    return GraphSample.from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete(n):
    return GraphSample.from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def star(n):
    return GraphSample.from_edges(n, [(0, i) for i in range(1, n)])


def test_complete_graph_one_step_consensus():
    for n in (3, 8):
        W = iteration_matrix(complete(n), 1.0 / n)
        assert np.allclose(W.w, consensus_projector(n), atol=1e-15)


def test_two_node_path():
    W = iteration_matrix(path(2), 0.5)
    assert W.w.tolist() == [[0.5, 0.5], [0.5, 0.5]]


def test_row_and_column_sums(rng):
    for _ in range(10):
        g = sample_connected(ErdosRenyi(30, 0.2), rng)
        W = iteration_matrix(g, 1.0 / g.degree.max() / 2)
        ones = np.ones(g.n)
        assert np.allclose(W.w @ ones, ones, atol=1e-12)
        assert np.allclose(ones @ W.w, ones, atol=1e-12)
        radius = np.abs(np.linalg.eigvalsh(W.w - consensus_projector(g.n))).max()
        assert radius < 1


def test_alpha_out_of_range():
    # path on 2 nodes: lambda_max = 2, so alpha must stay below 1
    with pytest.raises(AlphaOutOfRange):
        iteration_matrix(path(2), 1.0)
    with pytest.raises(AlphaOutOfRange):
        iteration_matrix(path(2), -0.1)
    with pytest.raises(AlphaOutOfRange):
        iteration_matrix(GraphSample.from_edges(3, [(0, 1)]), 0.1)
    # eigensolve fallback: degree bound 2+2=4 trips, true lambda_max of P4 is ~3.41
    iteration_matrix(path(4), 0.55)
    with pytest.raises(AlphaOutOfRange):
        iteration_matrix(path(4), 0.6)


def test_calibrate_alpha_deterministic_graphs(rng):
    assert calibrate_alpha(ErdosRenyi(4, 1.0), 3, rng) == pytest.approx(0.25, rel=1e-12)
    assert calibrate_alpha(FixedGraph(path(2)), 1, rng) == pytest.approx(0.5, rel=1e-12)


def test_calibrated_alpha_minimizes_radius_for_fixed_graph(rng):
    g = sample_connected(ErdosRenyi(25, 0.3), rng)
    a_star = calibrate_alpha(FixedGraph(g), 1, rng)
    J = consensus_projector(g.n)

    def radius(a):
        return np.abs(np.linalg.eigvalsh(np.eye(g.n) - a * laplacian(g) - J)).max()

    for a in a_star * np.array([0.9, 0.97, 1.03, 1.1]):
        assert radius(a_star) <= radius(a) + 1e-12


@pytest.mark.slow
def test_calibrate_alpha_reproducible_at_paper_scale():
    spec = ErdosRenyi(1000, 0.03)
    a1 = calibrate_alpha(spec, 1000, np.random.default_rng(1))
    a2 = calibrate_alpha(spec, 1000, np.random.default_rng(2))
    assert abs(a1 - a2) / a1 < 0.02


def test_evolve_identity_and_projector(rng):
    n = 6
    x0 = rng.standard_normal(n)
    I = IterationMatrix(np.eye(n), 0.0)
    traj = evolve_window([I] * 4, x0)
    assert len(traj) == 5
    assert all(np.array_equal(s, x0) for s in traj.states)
    v = x0 - x0.mean()
    J = IterationMatrix(consensus_projector(n), 1.0 / n)
    traj = evolve_window([J] * 3, v)
    assert np.array_equal(traj.states[0], v)
    assert all(np.abs(s).max() < 1e-15 for s in traj.states[1:])


def test_evolve_matches_product_oracle(rng):
    for n in (5, 10):
        for _ in range(10):
            mats = [iteration_matrix(sample_connected(ErdosRenyi(n, 0.6), rng), 0.1)
                    for _ in range(4)]
            x0 = rng.standard_normal(n)
            traj = evolve_window(mats, x0)
            for k in range(5):
                phi = np.eye(n)
                for W in mats[:k]:
                    phi = W.w @ phi
                assert np.allclose(traj.states[k], phi @ x0, rtol=0, atol=1e-12)


def test_evolve_dimension_mismatch():
    with pytest.raises(ValueError):
        evolve_window([IterationMatrix(np.eye(3))], np.ones(4))


def test_apply_filter_basics(rng):
    n, d = 7, 3
    mats = [iteration_matrix(star(n), 0.1)] * d
    x0 = rng.standard_normal(n)
    traj = evolve_window(mats, x0)
    e_last = np.zeros(d + 1)
    e_last[-1] = 1
    assert np.array_equal(apply_filter(traj, e_last), traj.states[-1])
    const = evolve_window(mats, 2.5 * np.ones(n))
    a = np.array([0.7, -1.2, 0.9, 0.6])
    assert np.allclose(apply_filter(const, a), 2.5, atol=1e-12)
    with pytest.raises(ValueError):
        apply_filter(traj, np.ones(d))


def test_minimal_polynomial_filter_reaches_consensus(rng):
    # star K_{1,n-1}: Laplacian spectrum {0, 1 (n-2 times), n}
    n, alpha = 9, 0.1
    lam = np.array([1 - alpha, 1 - alpha * n])
    coeffs = np.poly(lam)[::-1] / np.prod(1 - lam)
    W = iteration_matrix(star(n), alpha)
    x0 = rng.standard_normal(n)
    out = apply_filter(evolve_window([W, W], x0), coeffs)
    assert np.allclose(out, x0.mean(), atol=1e-12)


def test_consensus_error_examples():
    assert consensus_error(np.ones(4)) == 0
    assert consensus_error([1.0, -1.0]) == pytest.approx(np.sqrt(2), rel=1e-15)
    v = np.array([3.0, -1.0, -2.0])
    assert consensus_error(v / np.linalg.norm(v)) == pytest.approx(1.0, rel=1e-15)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), d=st.integers(1, 6))
def test_mean_preserved_by_unit_sum_filters(seed, d):
    rng = np.random.default_rng(seed)
    g = sample_connected(ErdosRenyi(12, 0.5), rng)
    W = iteration_matrix(g, 1.0 / (2 * g.degree.max()))
    x0 = rng.standard_normal(12) * 3
    a = rng.standard_normal(d + 1)
    a += (1 - a.sum()) / (d + 1)
    out = apply_filter(evolve_window([W] * d, x0), a)
    assert abs(out.mean() - x0.mean()) <= 1e-10 * max(1, np.abs(a).sum() * np.abs(x0).max())


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_contraction_with_calibrated_alpha(seed):
    rng = np.random.default_rng(seed)
    g = sample_connected(ErdosRenyi(20, 0.4), rng)
    alpha = calibrate_alpha(FixedGraph(g), 1, rng)
    W = iteration_matrix(g, alpha)
    traj = evolve_window([W] * 8, rng.standard_normal(20))
    errs = [consensus_error(s) for s in traj.states]
    assert all(b <= a + 1e-12 for a, b in zip(errs, errs[1:]))
