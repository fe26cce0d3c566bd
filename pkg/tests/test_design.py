import json

import numpy as np
import pytest

from consensus_filters.design import (FilterCoefficients, UnsolvableFilter, design_filter,
                                      objective_value, verify_kkt)
from consensus_filters.dynamics import apply_filter, evolve_window, iteration_matrix
from consensus_filters.graphs import GraphSample
from consensus_filters.gram import approx_gram
from consensus_filters.moments import nonconsensus_moments


def random_psd(rng, k, rank=None):
    A = rng.standard_normal((k, rank or k))
    return A @ A.T


def zero_sum_direction(rng, k):
    z = rng.standard_normal(k)
    z -= z.mean()
    return z / np.linalg.norm(z)


def test_identity_gives_uniform():
    for d in (1, 4, 9):
        a = design_filter(np.eye(d + 1)).a
        assert np.allclose(a, 1 / (d + 1), atol=1e-15)


def test_two_by_two_closed_form(rng):
    for _ in range(50):
        lam = rng.uniform(-1, 1, 20)
        m1, m2 = lam.mean(), (lam ** 2).mean()
        a = design_filter(np.array([[1, m1], [m1, m2]])).a
        expected = np.array([m2 - m1, 1 - m1]) / (m2 - 2 * m1 + 1)
        assert np.allclose(a, expected, rtol=0, atol=1e-12)


def test_minimal_polynomial_filter():
    # star K_{1,n-1} with W = I - alpha L has non-consensus spectrum {1-alpha, 1-n alpha}
    n, alpha = 10, 0.08
    g = GraphSample.from_edges(n, [(0, i) for i in range(1, n)])
    W = iteration_matrix(g, alpha)
    qhat = approx_gram(2, 0.0, nonconsensus_moments(W, 4))
    filt = design_filter(qhat)
    lam = np.array([1 - alpha, 1 - n * alpha])
    oracle = np.poly(lam)[::-1] / np.prod(1 - lam)
    assert objective_value(qhat, filt) <= 1e-12
    assert np.allclose(filt.a, oracle, atol=1e-9)


def test_objective_examples(rng):
    Q = random_psd(rng, 4)
    Q /= Q[0, 0]
    assert objective_value(Q, np.array([1.0, 0, 0, 0])) == pytest.approx(1.0)
    filt = design_filter(Q)
    e_last = np.eye(4)[-1]
    assert objective_value(Q, filt) <= objective_value(Q, e_last)
    # KKT identity: a^T Q a equals half the stationarity multiplier
    assert objective_value(Q, filt) == pytest.approx(filt.multiplier / 2, rel=1e-10)


def test_dimension_mismatch():
    with pytest.raises(ValueError):
        objective_value(np.eye(3), np.ones(2) / 2)


def test_kkt_residual_examples(rng):
    assert verify_kkt(np.eye(5), np.full(5, 0.2)) == pytest.approx(0.0, abs=1e-16)
    for _ in range(20):
        k = rng.integers(2, 11)
        Q = random_psd(rng, k)
        filt = design_filter(Q)
        r_opt = verify_kkt(Q, filt)
        assert r_opt < 1e-8
        bumped = filt.a + 0.01 * zero_sum_direction(rng, k)
        assert verify_kkt(Q, bumped) > 10 * r_opt


def test_local_optimality_and_constraint(rng):
    for _ in range(30):
        k = rng.integers(2, 11)
        Q = random_psd(rng, k)
        a = design_filter(Q).a
        assert abs(a.sum() - 1) <= 1e-12
        f0 = objective_value(Q, a)
        for _ in range(1000):
            delta = 1e-3 * zero_sum_direction(rng, k)
            assert objective_value(Q, a + delta) >= f0 - 1e-12


def test_scale_invariance(rng):
    for _ in range(20):
        Q = random_psd(rng, rng.integers(2, 9))
        base = design_filter(Q).a
        for c in (1e-3, 1.0, 1e3):
            assert np.allclose(design_filter(c * Q).a, base, rtol=0, atol=1e-9)


def test_singular_gram_uses_ridge():
    # W = J makes every state after the first vanish: Q = e1 e1^T
    Q = np.zeros((4, 4))
    Q[0, 0] = 1
    filt = design_filter(Q)
    assert filt.ridge > 0
    assert abs(filt.a.sum() - 1) <= 1e-12
    assert objective_value(Q, filt) <= 1e-12
    # minimum-norm minimizer spreads weight over the annihilated terms
    assert np.allclose(filt.a, [0, 1 / 3, 1 / 3, 1 / 3], atol=1e-6)


def test_rank_deficient_random(rng):
    for _ in range(20):
        k = rng.integers(3, 10)
        Q = random_psd(rng, k, rank=rng.integers(1, k))
        filt = design_filter(Q)
        assert abs(filt.a.sum() - 1) <= 1e-12
        assert verify_kkt(Q, filt) < 1e-6


def test_unsolvable():
    with pytest.raises(UnsolvableFilter):
        design_filter(np.zeros((3, 3)))
    with pytest.raises(UnsolvableFilter):
        design_filter(np.full((3, 3), np.nan))


def test_mean_preserved_end_to_end(rng):
    Q = random_psd(rng, 5)
    a = design_filter(Q)
    W = iteration_matrix(GraphSample.from_edges(4, [(0, 1), (1, 2), (2, 3)]), 0.3)
    out = apply_filter(evolve_window([W] * 4, np.full(4, -1.75)), a)
    assert np.allclose(out, -1.75, atol=1e-12)


def test_json_schema(tmp_path, rng):
    Q = random_psd(rng, 4)
    filt = design_filter(Q)
    filt.to_json(Q, tmp_path / "f.json")
    raw = json.loads((tmp_path / "f.json").read_text())
    assert set(raw) == {"d", "coefficients", "objective", "kkt_residual"}
    assert raw["d"] == 3 and sum(raw["coefficients"]) == pytest.approx(1, abs=1e-12)
    back = FilterCoefficients.from_json(tmp_path / "f.json")
    assert np.array_equal(back.a, filt.a)
