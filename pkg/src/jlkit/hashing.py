"""k-wise independent polynomial hashing modulo the Mersenne prime 2^61 - 1.

A degree ``k - 1`` polynomial with coefficients drawn uniformly from
``[0, p)`` is a k-wise independent map ``[p) -> [p)``; reducing its value
mod ``w`` gives buckets, and its low bit gives Rademacher signs.

Scalar evaluation uses Python integers.  The vectorised path
(:func:`poly_eval_array`) works on uint64 arrays and relies on
``2^61 = 1 (mod p)`` to avoid 128-bit products; the two paths are checked
against each other in the test-suite.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DomainError, ParameterError, rng_for

__all__ = [
    "MERSENNE_61",
    "PolyHash",
    "SignHash",
    "poly_hash_new",
    "poly_hash_eval",
    "sign_hash_new",
    "sign_eval",
    "draw_coefficients",
    "mulmod61",
    "poly_eval_array",
]

MERSENNE_61 = (1 << 61) - 1
_P = np.uint64(MERSENNE_61)
_LO32 = np.uint64(0xFFFFFFFF)
_LO29 = np.uint64((1 << 29) - 1)


def _reduce(s):
    # valid for s < 2^63
    s = (s & _P) + (s >> np.uint64(61))
    return s - np.where(s >= _P, _P, np.uint64(0))


def mulmod61(a, b):
    """``a * b mod (2^61 - 1)`` for uint64 arrays with entries below 2^61."""
    a = np.asarray(a, dtype=np.uint64)
    b = np.asarray(b, dtype=np.uint64)
    a1, a0 = a >> np.uint64(32), a & _LO32
    b1, b0 = b >> np.uint64(32), b & _LO32
    hh = a1 * b1  # < 2^58, weight 2^64 = 8 (mod p)
    mid = a1 * b0 + a0 * b1  # < 2^62, weight 2^32
    ll = a0 * b0  # < 2^64
    s = (
        (hh << np.uint64(3))
        + (mid >> np.uint64(29))
        + ((mid & _LO29) << np.uint64(32))
        + (ll & _P)
        + (ll >> np.uint64(61))
    )
    return _reduce(s)


def poly_eval_array(coeffs, keys) -> np.ndarray:
    """Evaluate polynomials mod p by Horner's rule, broadcasting.

    ``coeffs[..., 0]`` is the leading coefficient.  ``coeffs[..., j]`` is
    broadcast against ``keys``, so ``coeffs`` of shape ``(H, 1, k)`` and keys
    of shape ``(N,)`` give an ``(H, N)`` result.
    """
    coeffs = np.asarray(coeffs, dtype=np.uint64)
    keys = np.asarray(keys, dtype=np.uint64)
    if np.any(keys >= _P):
        raise DomainError("hash keys must be < 2^61 - 1")
    acc = np.broadcast_to(coeffs[..., 0], np.broadcast_shapes(coeffs.shape[:-1], keys.shape))
    acc = acc.astype(np.uint64, copy=True)
    for j in range(1, coeffs.shape[-1]):
        acc = _reduce(mulmod61(acc, keys) + coeffs[..., j])
    return acc


def draw_coefficients(k: int, shape: tuple[int, ...], rng: np.random.Generator) -> np.ndarray:
    """``shape + (k,)`` coefficients drawn uniformly from ``[0, p)``."""
    if k not in (2, 4):
        raise ParameterError(f"k must be 2 or 4, got {k!r}")
    return rng.integers(0, MERSENNE_61, size=tuple(shape) + (k,), dtype=np.uint64)


@dataclass(frozen=True)
class PolyHash:
    """``key -> ((sum_i a_i key^i) mod p) mod w``; coefficients leading-first."""

    coefficients: tuple[int, ...]
    w: int

    def __post_init__(self):
        if self.w < 1:
            raise ParameterError(f"range w must be >= 1, got {self.w!r}")
        if any(not (0 <= c < MERSENNE_61) for c in self.coefficients):
            raise ParameterError("coefficients must lie in [0, p)")

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def __call__(self, key: int) -> int:
        return poly_hash_eval(self, key)

    def eval_many(self, keys) -> np.ndarray:
        raw = poly_eval_array(np.array(self.coefficients, dtype=np.uint64), keys)
        return (raw % np.uint64(self.w)).astype(np.int64)


@dataclass(frozen=True)
class SignHash:
    """Rademacher sign from the low bit of a width-2 polynomial hash: 0 -> -1, 1 -> +1."""

    inner: PolyHash

    def __post_init__(self):
        if self.inner.w != 2:
            raise ParameterError("sign hashes need an inner hash of range 2")

    def __call__(self, key: int) -> int:
        return sign_eval(self, key)

    def eval_many(self, keys) -> np.ndarray:
        return 2 * self.inner.eval_many(keys) - 1


def poly_hash_new(k: int, w: int, seed: int) -> PolyHash:
    """A k-wise independent (k in {2, 4}) hash into ``[0, w)`` drawn from ``seed``."""
    if w < 1:
        raise ParameterError(f"range w must be >= 1, got {w!r}")
    coeffs = draw_coefficients(k, (), rng_for(seed))
    return PolyHash(tuple(int(c) for c in coeffs), int(w))


def poly_hash_eval(h: PolyHash, key: int) -> int:
    key = int(key)
    if not (0 <= key < MERSENNE_61):
        raise DomainError(f"hash key must lie in [0, 2^61 - 1), got {key}")
    acc = 0
    for c in h.coefficients:
        acc = (acc * key + c) % MERSENNE_61
    return acc % h.w


def sign_hash_new(seed: int, k: int = 4) -> SignHash:
    return SignHash(poly_hash_new(k, 2, seed))


def sign_eval(s: SignHash, key: int) -> int:
    return 2 * poly_hash_eval(s.inner, key) - 1
