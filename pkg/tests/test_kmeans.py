import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jlkit.core import DomainError, ParameterError
from jlkit.kmeans import (
    Partition,
    centered_inner_sum,
    cost_centroid,
    cost_pairwise,
    jl_kmeans,
    lloyd,
    pairwise_preserved,
)


def test_cost_examples():
    X = np.array([[0.0], [2.0]])
    one = Partition([0, 0], 1)
    assert cost_centroid(X, one) == 2.0
    assert cost_pairwise(X, one) == 2.0
    assert cost_centroid(X, Partition([0, 1], 2)) == 0.0
    assert cost_pairwise(np.ones((5, 3)), Partition([0] * 5, 1)) == 0.0
    with pytest.raises(DomainError):
        cost_centroid(X, Partition([0, 0], 2))
    with pytest.raises(DomainError):
        cost_pairwise(X, Partition([1, 1], 2))


@given(st.integers(1, 40), st.integers(1, 6), st.integers(1, 8), st.integers(0, 2**32))
def test_centroid_equals_pairwise(n, k, dim, seed):
    rng = np.random.default_rng(seed)
    k = min(k, n)
    X = rng.normal(size=(n, dim)) * rng.uniform(0.01, 100)
    assign = np.concatenate([np.arange(k), rng.integers(0, k, n - k)])
    part = Partition(rng.permutation(assign), k)
    a, b = cost_centroid(X, part), cost_pairwise(X, part)
    assert a == pytest.approx(b, rel=1e-9, abs=1e-12)


@given(st.integers(1, 40), st.integers(1, 8), st.integers(0, 2**32))
def test_inner_product_lemma(n, dim, seed):
    X = np.random.default_rng(seed).normal(size=(n, dim)) + 5
    assert abs(centered_inner_sum(X)) <= 1e-9 * np.sum(X * X)


def test_lloyd_extremes(rng):
    X = rng.normal(size=(12, 3))
    res = lloyd(X, 12, seed=1)
    assert res.cost == 0.0
    assert sorted(res.partition.assignment.tolist()) == list(range(12))
    res = lloyd(X, 1, seed=1)
    assert np.allclose(res.centers[0], X.mean(axis=0))
    assert res.cost == pytest.approx(np.sum((X - X.mean(axis=0)) ** 2))
    with pytest.raises(ParameterError):
        lloyd(X, 13)


def test_lloyd_recovers_planted_pair(rng):
    X = np.vstack([rng.normal(size=(15, 4)), rng.normal(size=(15, 4)) + 100])
    truth = np.repeat([0, 1], 15)
    # brute force over both labelings of the planted split
    best = min(cost_centroid(X, Partition(lab, 2)) for lab in (truth, 1 - truth))
    for seed in range(30):
        res = lloyd(X, 2, seed=seed)
        a = res.partition.assignment
        assert np.array_equal(a, truth) or np.array_equal(a, 1 - truth)
        assert res.cost == pytest.approx(best)


@given(st.integers(2, 60), st.integers(1, 8), st.integers(0, 2**32))
def test_lloyd_cost_never_increases(n, k, seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    X[: n // 3] = X[0]  # duplicates exercise the empty-cluster repair
    res = lloyd(X, min(k, n), seed=seed)
    h = res.history
    assert all(b <= a + 1e-9 for a, b in zip(h, h[1:]))
    assert np.all(res.partition.sizes > 0)


def test_lloyd_tie_goes_to_lowest_id():
    X = np.array([[0.0], [1.0], [2.0]])
    res = lloyd(X, 2, init=np.array([0, 2]), max_iter=1)
    assert res.partition.assignment[1] == 0


def test_pairwise_preserved_guards():
    X = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    ok, worst = pairwise_preserved(X, X * 1.05, 0.25)
    assert ok and worst == pytest.approx(0.1025)


def test_jl_kmeans_identity(rng):
    X = rng.normal(size=(40, 6))
    rep = jl_kmeans(X, 4, 0.2, "identity", seed=3)
    assert rep.kappa_m == rep.kappa_d and rep.m == 6
    assert rep.distances_preserved and rep.worst_distortion == 0.0
    assert jl_kmeans(X, 40, 0.2, "gaussian", seed=1).kappa_m == 0.0


def test_jl_kmeans_transfer_bounds(rng):
    X = rng.normal(size=(60, 32))
    for seed in range(10):
        rep = jl_kmeans(X, 3, 0.3, "rademacher", seed=seed)
        if rep.distances_preserved:
            assert (1 - 0.3) * rep.kappa_d <= rep.kappa_m <= (1 + 0.3) * rep.kappa_d


def blobs(seed, n=200, d=64, k=5):
    rng = np.random.default_rng(10_000 + seed)  # keep data independent of transform seeds
    centers = rng.normal(size=(k, d)) * 4
    return centers[rng.integers(0, k, n)] + rng.normal(size=(n, d))


def test_blob_lifted_cost_close_to_direct():
    # restarts remove Lloyd's own local optima, which otherwise dominate the spread
    good = sum(
        jl_kmeans(blobs(s), 5, 0.2, "gaussian", seed=s, n_init=10).lifted_over_direct <= 1.8 for s in range(50)
    )
    assert good >= 48
