import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jlkit.core import DomainError, JlParams, ParameterError
from jlkit.sparse import (
    NuThresholdConfig,
    block_new,
    dks_new,
    dks_sparsity,
    duplicate_scale,
    feature_hashing_new,
    fh_hard_instance,
    graph_new,
    nu_fh,
    sparse_apply,
)


def dense_of(t):
    return t.to_scipy().toarray()


def test_feature_hashing_structure():
    t = feature_hashing_new(JlParams(500, 20, seed=3))
    A = dense_of(t)
    assert np.all(np.count_nonzero(A, axis=0) == 1)
    assert np.array_equal(t.rows, feature_hashing_new(JlParams(500, 20, seed=3)).rows)


def test_feature_hashing_row_histogram():
    t = feature_hashing_new(JlParams(100_000, 16, seed=5))
    counts = np.bincount(t.rows[:, 0], minlength=16)
    sigma = math.sqrt(100_000 * (1 / 16) * (15 / 16))
    assert np.all(np.abs(counts - 100_000 / 16) <= 3 * sigma)


@given(st.integers(1, 8), st.integers(1, 6), st.integers(1, 60), st.integers(0, 10**6))
def test_block_structure(s, blocks, d, seed):
    m = s * blocks
    t = block_new(JlParams(d, m, seed=seed), s)
    length = m // s
    assert t.rows.shape == (d, s)
    assert np.all(t.rows // length == np.arange(s))
    assert np.all(np.count_nonzero(dense_of(t), axis=0) == s)


def test_block_rounds_m_up():
    t = block_new(JlParams(10, 473, seed=0), 12)
    assert t.m == 480


def test_block_s_equals_m_is_dense_column():
    t = block_new(JlParams(30, 8, seed=1), 8)
    A = dense_of(t)
    assert np.allclose(np.abs(A), 1 / math.sqrt(8))


def test_block_s1_has_uniform_rows():
    t = block_new(JlParams(100_000, 16, seed=7), 1)
    counts = np.bincount(t.rows[:, 0], minlength=16)
    assert np.all(np.abs(counts - 6250) <= 3 * math.sqrt(100_000 / 16 * 15 / 16))


@given(st.integers(1, 12), st.integers(0, 10**6))
def test_graph_rows_distinct(s, seed):
    t = graph_new(JlParams(40, 12, seed=seed), s)
    assert all(len(set(r)) == s for r in t.rows.tolist())


def test_graph_s_equals_m_and_inclusion_rate():
    t = graph_new(JlParams(20, 6, seed=0), 6)
    assert all(sorted(r) == list(range(6)) for r in t.rows.tolist())
    t = graph_new(JlParams(10_000, 20, seed=1), 5)
    freq = np.bincount(t.rows.ravel(), minlength=20) / 10_000
    assert np.all(np.abs(freq - 0.25) <= 3 * math.sqrt(0.25 * 0.75 / 10_000))


def test_sparsity_guards():
    with pytest.raises(ParameterError):
        graph_new(JlParams(4, 3), 4)
    with pytest.raises(ParameterError):
        block_new(JlParams(4, 3), 0)


def test_duplicate_scale_examples():
    assert np.allclose(duplicate_scale([3, 4], 2), np.array([3, 3, 4, 4]) / math.sqrt(2))
    assert np.sum(duplicate_scale([3, 4], 2) ** 2) == pytest.approx(25)
    x = np.array([1.0, -2.0, 0.5])
    assert np.array_equal(duplicate_scale(x, 1), x)


@given(st.lists(st.floats(-100, 100), min_size=1, max_size=30), st.integers(1, 9))
def test_duplicate_scale_nu(x, s):
    x = np.array(x)
    if np.sum(x * x) < 1e-100:
        return
    y = duplicate_scale(x, s)
    nu = lambda v: np.max(np.abs(v)) / np.linalg.norm(v)
    assert nu(y) == pytest.approx(nu(x) / math.sqrt(s), rel=1e-12)


def test_dks_is_feature_hashing_of_duplicated_input(rng):
    p = JlParams(50, 16, seed=8)
    dks = dks_new(p, 4)
    fh = feature_hashing_new(JlParams(200, 16, p.eps, p.delta, p.seed))
    for _ in range(100):
        x = rng.normal(size=50)
        assert np.array_equal(dks.apply(x), fh.apply(duplicate_scale(x, 4)))
    assert np.all(np.count_nonzero(dense_of(dks), axis=0) <= 4)


def test_dks_s1_is_feature_hashing():
    p = JlParams(64, 16, seed=2)
    assert np.array_equal(dense_of(dks_new(p, 1)), dense_of(feature_hashing_new(p)))


@pytest.mark.parametrize(
    "make",
    [
        feature_hashing_new,
        lambda p: block_new(p, 4),
        lambda p: graph_new(p, 4),
        lambda p: dks_new(p, 1),
    ],
)
def test_basis_vectors_exact_norm(make):
    t = make(JlParams(30, 16, seed=5))
    for i in range(30):
        e = np.zeros(30)
        e[i] = 1
        assert np.sum(sparse_apply(t, e) ** 2) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("kind", ["fh", "block", "graph", "dks"])
def test_linearity_zero_and_scipy_agreement(kind, rng):
    p = JlParams(60, 16, seed=9)
    t = {
        "fh": lambda: feature_hashing_new(p),
        "block": lambda: block_new(p, 4),
        "graph": lambda: graph_new(p, 4),
        "dks": lambda: dks_new(p, 3),
    }[kind]()
    x, y = rng.normal(size=(2, 60))
    assert np.allclose(t.apply(3 * x + y), 3 * t.apply(x) + t.apply(y), atol=1e-12)
    assert not np.any(t.apply(np.zeros(60)))
    assert np.allclose(t.to_scipy() @ x, t.apply(x), atol=1e-12)


def test_nu_fh_branches():
    m_full = math.ceil(2 / (0.5**2 * 0.5))
    assert nu_fh(m_full, 0.5, 0.5) == 1.0
    assert nu_fh(1, 0.01, 0.01, NuThresholdConfig(D=1)) == 0.0
    grid = [nu_fh(m, 0.2, 0.01) for m in range(600, 4000, 100)]
    assert all(0 < a < b for a, b in zip(grid, grid[1:]))


def test_dks_sparsity_examples():
    assert dks_sparsity(0.3, 0.3, lead=2.5) == 3
    assert dks_sparsity(0.5, 0.25) == 4
    with pytest.raises(DomainError):
        dks_sparsity(0.5, 0.0)


def test_fh_hard_instance_examples():
    assert np.array_equal(fh_hard_instance(4, 8), [0.5] * 4 + [0] * 4)
    e1 = np.zeros(7)
    e1[0] = 1
    assert np.array_equal(fh_hard_instance(1, 7), e1)
    u = fh_hard_instance(9, 9)
    assert np.max(np.abs(u)) / np.linalg.norm(u) == pytest.approx(1 / 3)
