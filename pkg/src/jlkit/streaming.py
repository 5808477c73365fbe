"""Linear sketches for turnstile streams: AMS, Count Sketch and a Count-Sketch-backed top-k heap.

Updates are integers, so tables accumulate the raw integer sums
``sum sigma(i) v`` in float64, which is exact below 2^53 and makes split
ingestion followed by :func:`sketch_merge` bit-identical to a single pass.
Normalisations are applied at query time.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .core import DimensionError, DomainError, ParameterError, derive_seed, rng_for
from .hashing import draw_coefficients, poly_eval_array

__all__ = [
    "IncompatibleSketchError",
    "TurnstileUpdate",
    "AmsSketch",
    "CountSketch",
    "HeavyHitterHeap",
    "sketch_sizes",
    "ams_new",
    "ams_update",
    "ams_f2_query",
    "cs_new",
    "cs_update",
    "cs_point_query",
    "cs_f2_query",
    "sketch_merge",
    "topk_process",
]

# keys per chunk when evaluating hash tensors, bounds memory at ~32 MB
_CHUNK_CELLS = 1 << 22


class IncompatibleSketchError(ValueError):
    """Sketches with different parameters or hash families cannot be merged."""


@dataclass(frozen=True)
class TurnstileUpdate:
    index: int
    value: int

    def check(self, d: int, M: int | None = None) -> "TurnstileUpdate":
        if not (0 <= self.index < d):
            raise DomainError(f"index {self.index} outside [0, {d})")
        if M is not None and abs(self.value) > M:
            raise DomainError(f"|value| = {abs(self.value)} exceeds M = {M}")
        return self


def sketch_sizes(eps: float, delta: float, width_const: float = 4.0, rep_const: float = 8.0):
    """Width ``ceil(width_const/eps^2)`` and the smallest odd ``K >= ceil(rep_const ln(1/delta))``."""
    if not (0 < eps < 1 and 0 < delta < 1):
        raise ParameterError("eps and delta must lie in (0, 1)")
    w = math.ceil(width_const / eps**2)
    K = max(1, math.ceil(rep_const * math.log(1.0 / delta)))
    return w, K if K % 2 else K + 1


def _as_updates(indices, values, d: int):
    idx = np.asarray(indices, dtype=np.int64).ravel()
    val = np.asarray(values, dtype=np.float64).ravel()
    if idx.shape != val.shape:
        raise DimensionError(f"{idx.size} indices but {val.size} values")
    if idx.size and (idx.min() < 0 or idx.max() >= d):
        raise DomainError(f"update index outside [0, {d})")
    return idx, val


def _combine(idx: np.ndarray, val: np.ndarray):
    """Net value per distinct key; exact for integer updates, so ingestion order is irrelevant."""
    keys, inverse = np.unique(idx, return_inverse=True)
    return keys, np.bincount(inverse, weights=val, minlength=keys.size)


def _median(values: np.ndarray, axis=0):
    # K is odd, so this is always one of the repetition values
    return np.median(values, axis=axis)


@dataclass(eq=False)
class AmsSketch:
    """``K`` repetitions of a width-``w`` dense sign sketch; every bucket has its own 4-wise sign hash."""

    d: int
    eps: float
    delta: float
    seed: int
    w: int
    K: int
    sign_coeffs: np.ndarray  # (K, w, 4)
    raw: np.ndarray = field(repr=False)  # (K, w): sum sigma_{r,b}(i) x_i

    @property
    def accumulators(self) -> np.ndarray:
        """``raw / sqrt(w)``: repetition ``r`` holds ``f_r(x) = w^-1/2 A_r x``."""
        return self.raw / math.sqrt(self.w)

    def signs(self, keys) -> np.ndarray:
        """``(K, w, len(keys))`` signs for ``keys``."""
        keys = np.asarray(keys, dtype=np.uint64)
        vals = poly_eval_array(self.sign_coeffs[..., None, :], keys)
        return 2.0 * (vals & np.uint64(1)).astype(np.float64) - 1.0

    def update(self, index: int, value: int) -> None:
        TurnstileUpdate(int(index), int(value)).check(self.d)
        self.raw += self.signs([index])[..., 0] * value

    def update_many(self, indices, values) -> None:
        idx, val = _combine(*_as_updates(indices, values, self.d))
        step = max(1, _CHUNK_CELLS // (self.K * self.w))
        for lo in range(0, idx.size, step):
            self.raw += self.signs(idx[lo : lo + step]) @ val[lo : lo + step]

    def repetition_estimates(self) -> np.ndarray:
        return np.sum(self.raw**2, axis=1) / self.w

    def f2(self) -> float:
        return float(_median(self.repetition_estimates()))


@dataclass(eq=False)
class CountSketch:
    """``K`` repetitions of Feature Hashing: a 2-wise bucket hash and a 4-wise sign hash each."""

    d: int
    eps: float
    delta: float
    seed: int
    w: int
    K: int
    bucket_coeffs: np.ndarray  # (K, 2)
    sign_coeffs: np.ndarray  # (K, 4)
    raw: np.ndarray = field(repr=False)  # (K, w)

    def hashes(self, keys):
        """Buckets ``(K, n)`` int64 and signs ``(K, n)`` float64 for ``keys``."""
        keys = np.asarray(keys, dtype=np.uint64)
        b = poly_eval_array(self.bucket_coeffs[:, None, :], keys) % np.uint64(self.w)
        s = poly_eval_array(self.sign_coeffs[:, None, :], keys) & np.uint64(1)
        return b.astype(np.int64), 2.0 * s.astype(np.float64) - 1.0

    def update(self, index: int, value: int) -> None:
        TurnstileUpdate(int(index), int(value)).check(self.d)
        b, s = self.hashes([index])
        self.raw[np.arange(self.K), b[:, 0]] += s[:, 0] * value

    def update_many(self, indices, values) -> None:
        idx, val = _combine(*_as_updates(indices, values, self.d))
        rows = np.arange(self.K)[:, None]
        step = max(1, _CHUNK_CELLS // self.K)
        for lo in range(0, idx.size, step):
            b, s = self.hashes(idx[lo : lo + step])
            np.add.at(self.raw, (np.broadcast_to(rows, b.shape), b), s * val[lo : lo + step])

    def point(self, index: int) -> float:
        if not (0 <= index < self.d):
            raise DomainError(f"index {index} outside [0, {self.d})")
        return float(self.points([index])[0])

    def points(self, indices) -> np.ndarray:
        b, s = self.hashes(indices)
        return _median(s * self.raw[np.arange(self.K)[:, None], b], axis=0)

    def repetition_estimates(self) -> np.ndarray:
        return np.sum(self.raw**2, axis=1)

    def f2(self) -> float:
        return float(_median(self.repetition_estimates()))


def ams_new(d: int, eps: float, delta: float, seed: int, width_const=4.0, rep_const=8.0) -> AmsSketch:
    w, K = sketch_sizes(eps, delta, width_const, rep_const)
    coeffs = draw_coefficients(4, (K, w), rng_for(derive_seed(seed, 0)))
    return AmsSketch(d, eps, delta, seed, w, K, coeffs, np.zeros((K, w)))


def ams_update(s: AmsSketch, index: int, value: int) -> None:
    s.update(index, value)


def ams_f2_query(s: AmsSketch) -> float:
    return s.f2()


def cs_new(d: int, eps: float, delta: float, seed: int, width_const=4.0, rep_const=8.0) -> CountSketch:
    w, K = sketch_sizes(eps, delta, width_const, rep_const)
    buckets = draw_coefficients(2, (K,), rng_for(derive_seed(seed, 0)))
    signs = draw_coefficients(4, (K,), rng_for(derive_seed(seed, 1)))
    return CountSketch(d, eps, delta, seed, w, K, buckets, signs, np.zeros((K, w)))


def cs_update(s: CountSketch, index: int, value: int) -> None:
    s.update(index, value)


def cs_point_query(s: CountSketch, index: int) -> float:
    return s.point(index)


def cs_f2_query(s: CountSketch) -> float:
    return s.f2()


def sketch_merge(a, b):
    """Entrywise sum of two sketches built with the same parameters and seed."""
    if type(a) is not type(b):
        raise IncompatibleSketchError(f"cannot merge {type(a).__name__} with {type(b).__name__}")
    if (a.d, a.w, a.K, a.seed) != (b.d, b.w, b.K, b.seed):
        raise IncompatibleSketchError("sketches differ in (d, w, K, seed)")
    return type(a)(**{**a.__dict__, "raw": a.raw + b.raw})


@dataclass
class HeavyHitterHeap:
    """At most ``k`` ``(index, estimate)`` pairs, kept as a min-heap on ``(estimate, -index)``."""

    k: int
    entries: list[tuple[int, float]]
    sketch: CountSketch

    def items(self) -> list[tuple[int, float]]:
        """Entries sorted by descending estimate (ties: smaller index first)."""
        return sorted(self.entries, key=lambda e: (-e[1], e[0]))

    def indices(self) -> set[int]:
        return {i for i, _ in self.entries}


@numba.njit(cache=True)
def _heap_less(est, idx, a, b):
    # the root is the entry evicted first: lowest estimate, larger index on ties
    return est[a] < est[b] or (est[a] == est[b] and idx[a] > idx[b])


@numba.njit(cache=True)
def _sift_down(est, idx, pos, size, at):
    while True:
        left = 2 * at + 1
        small = at
        if left < size and _heap_less(est, idx, left, small):
            small = left
        if left + 1 < size and _heap_less(est, idx, left + 1, small):
            small = left + 1
        if small == at:
            return
        est[at], est[small] = est[small], est[at]
        idx[at], idx[small] = idx[small], idx[at]
        pos[idx[at]] = at
        pos[idx[small]] = small
        at = small


@numba.njit(cache=True)
def _sift_up(est, idx, pos, at):
    while at > 0:
        parent = (at - 1) // 2
        if not _heap_less(est, idx, at, parent):
            return
        est[at], est[parent] = est[parent], est[at]
        idx[at], idx[parent] = idx[parent], idx[at]
        pos[idx[at]] = at
        pos[idx[parent]] = parent
        at = parent


@numba.njit(cache=True)
def _topk_kernel(keys, values, buckets, signs, table, k, est, idx, pos):
    K = table.shape[0]
    size = 0
    probe = np.empty(K)
    for t in range(keys.shape[0]):
        i = keys[t]
        v = values[t]
        for r in range(K):
            table[r, buckets[r, i]] += signs[r, i] * v
            probe[r] = signs[r, i] * table[r, buckets[r, i]]
        e = np.sort(probe)[K // 2]
        at = pos[i]
        if at >= 0:
            est[at] = e
            # own estimate only rises in insertion-only streams, but stay general
            _sift_up(est, idx, pos, at)
            _sift_down(est, idx, pos, size, pos[i])
        elif size < k:
            est[size] = e
            idx[size] = i
            pos[i] = size
            size += 1
            _sift_up(est, idx, pos, size - 1)
        elif e > est[0] or (e == est[0] and i < idx[0]):
            pos[idx[0]] = -1
            est[0] = e
            idx[0] = i
            pos[i] = 0
            _sift_down(est, idx, pos, size, 0)
    return size


def topk_process(indices, values, k: int, eps: float, delta: float, d: int, seed: int) -> HeavyHitterHeap:
    """Single pass over an insertion-only stream keeping the ``k`` items with largest estimates.

    Per update: Count Sketch update, point query of the updated item, then
    update it in the heap or let it replace the heap minimum.
    """
    if k < 1:
        raise ParameterError("k must be >= 1")
    idx_arr, val_arr = _as_updates(indices, values, d)
    if np.any(val_arr < 0):
        raise DomainError("negative update in an insertion-only stream")
    cs = cs_new(d, eps, delta, seed)
    buckets, signs = cs.hashes(np.arange(d))
    est = np.zeros(k)
    ids = np.full(k, -1, dtype=np.int64)
    pos = np.full(d, -1, dtype=np.int64)
    size = _topk_kernel(idx_arr, val_arr, buckets, signs, cs.raw, k, est, ids, pos)
    entries = [(int(ids[j]), float(est[j])) for j in range(size)]
    heap = [(e, -i) for i, e in entries]
    heapq.heapify(heap)
    return HeavyHitterHeap(k, [(-ni, e) for e, ni in heap], cs)
