import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jlkit.core import JlParams, ParameterError, derive_seed, rng_for
from jlkit.dense import achlioptas_new, dense_apply, gaussian_new, rademacher_new

BIG = JlParams(1000, 1000, seed=4)


def test_gaussian_moments_and_determinism():
    A = gaussian_new(BIG).matrix
    assert abs(A.mean()) < 0.01
    assert abs(A.var() - 1) < 0.02
    assert np.array_equal(A, gaussian_new(BIG).matrix)


def test_rademacher_entries():
    A = rademacher_new(BIG).matrix
    assert np.all(np.abs(A) == 1)
    assert abs(A.mean()) < 0.01
    assert np.array_equal(A, rademacher_new(BIG).matrix)


def test_achlioptas_third():
    A = achlioptas_new(BIG).matrix
    nz = A[A != 0]
    assert np.allclose(np.abs(nz), math.sqrt(3))
    assert abs(np.mean(A == 0) - 2 / 3) < 0.01
    assert abs(A.var() - 1) < 0.02


def test_achlioptas_q_one_has_no_zeros():
    A = achlioptas_new(JlParams(50, 40), q=1.0).matrix
    assert np.all(np.abs(A) == 1)
    with pytest.raises(ParameterError):
        achlioptas_new(JlParams(5, 4), q=0.0)


@pytest.mark.parametrize("new", [gaussian_new, rademacher_new, achlioptas_new])
def test_zero_and_linearity(new, rng):
    t = new(JlParams(40, 16, seed=1))
    assert np.array_equal(dense_apply(t, np.zeros(40)), np.zeros(16))
    x, y = rng.normal(size=(2, 40))
    lhs = dense_apply(t, 2.5 * x - 0.5 * y)
    rhs = 2.5 * dense_apply(t, x) - 0.5 * dense_apply(t, y)
    assert np.allclose(lhs, rhs, rtol=0, atol=1e-12)


@given(st.floats(-1e6, 1e6), st.integers(1, 64), st.integers(0, 2**32))
def test_rademacher_one_dimensional_is_exact(c, m, seed):
    y = rademacher_new(JlParams(1, m, seed=seed)).apply([c])
    assert np.allclose(np.abs(y), abs(c) / math.sqrt(m), rtol=1e-15)
    assert np.sum(y * y) == pytest.approx(c * c, rel=1e-12)


@pytest.mark.parametrize("new", [gaussian_new, rademacher_new, achlioptas_new])
def test_unbiased(new):
    x = rng_for(9).normal(size=32)
    ratios = []
    for t in range(10_000):
        y = new(JlParams(32, 32, seed=derive_seed(77, t))).apply(x)
        ratios.append(np.sum(y * y) / np.sum(x * x))
    assert 0.98 <= np.mean(ratios) <= 1.02


def test_orthogonalized_rows():
    t = gaussian_new(JlParams(64, 16, seed=2), orthogonalize=True)
    G = t.matrix @ t.matrix.T
    assert np.allclose(G, 64 * np.eye(16))
    with pytest.raises(ParameterError):
        gaussian_new(JlParams(4, 8), orthogonalize=True)
