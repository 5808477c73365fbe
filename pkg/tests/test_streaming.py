import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from jlkit.core import DomainError
from jlkit.harness import zipf_stream
from jlkit.streaming import (
    IncompatibleSketchError,
    ams_f2_query,
    ams_new,
    ams_update,
    cs_f2_query,
    cs_new,
    cs_point_query,
    cs_update,
    sketch_merge,
    sketch_sizes,
    topk_process,
)


def test_sizes_example():
    assert sketch_sizes(0.5, 0.3) == (16, 11)
    s = ams_new(100, 0.5, 0.3, 1)
    assert (s.w, s.K) == (16, 11)
    assert ams_f2_query(s) == 0.0 and cs_f2_query(cs_new(100, 0.5, 0.3, 1)) == 0.0
    assert np.array_equal(s.sign_coeffs, ams_new(100, 0.5, 0.3, 1).sign_coeffs)


@pytest.mark.parametrize("new", [ams_new, cs_new])
def test_single_item_exact(new):
    s = new(100, 0.25, 0.05, 4)
    s.update(7, 5)
    assert np.allclose(s.repetition_estimates(), 25.0, rtol=0, atol=1e-12)
    assert s.f2() == 25.0
    s.update(7, -5)
    assert np.all(np.abs(s.raw) <= 1e-12)


def test_ams_same_index_sums():
    a, b = ams_new(50, 0.25, 0.05, 2), ams_new(50, 0.25, 0.05, 2)
    ams_update(a, 3, 2)
    ams_update(a, 3, 3)
    ams_update(b, 3, 5)
    assert np.array_equal(a.raw, b.raw)


def test_cs_point_queries_exact_for_separated_items():
    s = cs_new(1000, 0.25, 0.05, 6)
    cs_update(s, 10, 4)
    assert cs_point_query(s, 10) == 4.0
    b, _ = s.hashes(np.arange(1000))
    partner = next(j for j in range(11, 1000) if np.all(b[:, j] != b[:, 10]))
    cs_update(s, partner, -9)
    assert cs_point_query(s, 10) == 4.0 and cs_point_query(s, partner) == -9.0


def test_cs_untouched_index_reads_zero():
    s = cs_new(1000, 0.25, 0.05, 8)
    s.update(1, 7)
    b, _ = s.hashes([1, 2])
    assert np.mean(b[:, 0] != b[:, 1]) > 0.5
    assert s.point(2) == 0.0


def test_cs_touches_exactly_k_buckets():
    s = cs_new(1000, 0.1, 0.01, 1)
    s.update(3, 1)
    assert np.count_nonzero(s.raw) == s.K
    assert np.all(np.count_nonzero(s.raw, axis=1) == 1)


@pytest.mark.parametrize("new", [ams_new, cs_new])
def test_merge_and_guards(new, rng):
    idx = rng.integers(0, 500, size=10_000)
    val = rng.integers(-5, 6, size=10_000)
    whole = new(500, 0.25, 0.05, 3)
    whole.update_many(idx, val)
    a, b = new(500, 0.25, 0.05, 3), new(500, 0.25, 0.05, 3)
    a.update_many(idx[:4000], val[:4000])
    b.update_many(idx[4000:], val[4000:])
    assert np.array_equal(sketch_merge(a, b).raw, whole.raw)
    assert np.array_equal(sketch_merge(whole, new(500, 0.25, 0.05, 3)).raw, whole.raw)
    with pytest.raises(IncompatibleSketchError):
        sketch_merge(a, new(500, 0.25, 0.05, 4))
    with pytest.raises(IncompatibleSketchError):
        sketch_merge(ams_new(500, 0.25, 0.05, 3), cs_new(500, 0.25, 0.05, 3))


@given(
    st.lists(st.tuples(st.integers(0, 49), st.integers(-20, 20)), min_size=1, max_size=60),
    st.randoms(use_true_random=False),
)
def test_order_and_batching_do_not_matter(updates, shuffler):
    idx = np.array([u[0] for u in updates])
    val = np.array([u[1] for u in updates])
    for new in (ams_new, cs_new):
        one = new(50, 0.5, 0.3, 9)
        for i, v in updates:
            one.update(i, v)
        perm = list(range(len(updates)))
        shuffler.shuffle(perm)
        two = new(50, 0.5, 0.3, 9)
        two.update_many(idx[perm], val[perm])
        assert np.allclose(one.raw, two.raw, rtol=0, atol=1e-10)


def test_median_is_a_repetition_value(rng):
    s = cs_new(200, 0.5, 0.3, 2)
    s.update_many(rng.integers(0, 200, 500), rng.integers(1, 4, 500))
    assert s.f2() in s.repetition_estimates()
    assert all(s.point(i) in s.raw[np.arange(s.K), s.hashes([i])[0][:, 0]] * s.hashes([i])[1][:, 0] for i in range(5))


def test_ams_repetition_unbiased(rng):
    idx = np.arange(30)
    val = rng.integers(-4, 5, size=30)
    true = float(np.sum(val.astype(float) ** 2))
    first = [0.0] * 10_000
    for seed in range(10_000):
        s = ams_new(30, 0.5, 0.3, seed)
        s.update_many(idx, val)
        first[seed] = s.repetition_estimates()[0]
    assert abs(np.mean(first) - true) <= 0.02 * true


def test_update_bounds():
    s = cs_new(10, 0.5, 0.3, 0)
    with pytest.raises(DomainError):
        s.update(10, 1)
    with pytest.raises(DomainError):
        s.update_many([0, -1], [1, 1])


def reference_topk(indices, values, k, eps, delta, d, seed):
    """Count Sketch plus a sorted-list heap, one update at a time."""
    cs = cs_new(d, eps, delta, seed)
    held = {}
    for i, v in zip(indices.tolist(), values.tolist()):
        cs.update(i, v)
        e = cs.point(i)
        if i in held or len(held) < k:
            held[i] = e
            continue
        worst = min(held, key=lambda j: (held[j], -j))
        if (e, -i) > (held[worst], -worst):
            del held[worst]
            held[i] = e
    return held, cs


@pytest.mark.parametrize("seed", range(5))
def test_topk_matches_reference(seed):
    idx, val = zipf_stream(300, 3000, 1.1, seed)
    val = val * np.random.default_rng(seed).integers(1, 4, size=val.size)
    heap = topk_process(idx, val, 8, 0.3, 0.1, 300, seed)
    ref, cs = reference_topk(idx, val, 8, 0.3, 0.1, 300, seed)
    assert dict(heap.entries) == ref
    assert np.array_equal(heap.sketch.raw, cs.raw)
    est = [e for _, e in heap.items()]
    assert est == sorted(est, reverse=True)


def test_topk_trivial_streams():
    h = topk_process(np.array([5, 9, 2]), np.array([1, 1, 1]), 3, 0.25, 0.05, 10, 0)
    assert h.indices() == {2, 5, 9}
    h = topk_process(np.array([], dtype=int), np.array([], dtype=int), 3, 0.25, 0.05, 10, 0)
    assert h.entries == []
    with pytest.raises(DomainError):
        topk_process(np.array([1]), np.array([-1]), 1, 0.25, 0.05, 10, 0)


def test_topk_tie_evicts_larger_index():
    h = topk_process(np.array([4, 1, 7]), np.array([1, 1, 1]), 2, 0.1, 0.01, 10, 3)
    assert h.indices() == {1, 4}


@pytest.mark.slow
def test_topk_zipf_guarantee():
    d, k, eps = 10_000, 10, 0.1
    ok = 0
    for run in range(100):
        idx, val = zipf_stream(d, 10**6, 1.2, 1000 + run)
        counts = np.bincount(idx, minlength=d)
        heap = topk_process(idx, val, k, eps, 0.01, d, run)
        kth = np.sort(counts)[-k]
        ok += all(counts[i] > (1 - eps) * kth for i in heap.indices())
    assert ok >= 95
