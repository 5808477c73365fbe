"""Shared parameter types, seeding, target-dimension formulas and distortion accounting."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

__all__ = [
    "ParameterError",
    "DomainError",
    "DimensionError",
    "JlParams",
    "SeedStream",
    "DistortionStats",
    "as_vector",
    "derive_seed",
    "rng_for",
    "target_dim_fm",
    "target_dim_union",
    "sq_norm_ratio",
    "next_pow2",
]

SEED_MASK = (1 << 64) - 1


class ParameterError(ValueError):
    """A construction parameter is outside its valid range."""


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class DimensionError(ValueError):
    """A vector does not have the dimension a transform expects."""


def _check_open_unit(name: str, value: float) -> None:
    if not (0.0 < value < 1.0) or not math.isfinite(value):
        raise ParameterError(f"{name} must lie in (0, 1), got {value!r}")


@dataclass(frozen=True)
class JlParams:
    """Source dimension ``d``, target dimension ``m``, distortion ``eps``,
    failure probability ``delta`` and the 64-bit master ``seed``.

    ``m > d`` is allowed (oversampling).
    """

    d: int
    m: int
    eps: float = 0.25
    delta: float = 0.05
    seed: int = 0

    def __post_init__(self):
        if int(self.d) != self.d or self.d < 1:
            raise ParameterError(f"d must be a positive integer, got {self.d!r}")
        if int(self.m) != self.m or self.m < 1:
            raise ParameterError(f"m must be a positive integer, got {self.m!r}")
        _check_open_unit("eps", self.eps)
        _check_open_unit("delta", self.delta)
        if not (0 <= int(self.seed) <= SEED_MASK):
            raise ParameterError(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")

    def with_seed(self, seed: int) -> "JlParams":
        return replace(self, seed=int(seed))

    def with_m(self, m: int) -> "JlParams":
        return replace(self, m=int(m))


@dataclass(frozen=True)
class SeedStream:
    """A master seed from which independent per-index seeds are derived."""

    master: int
    index: int = 0

    def derive(self, i: int) -> int:
        return derive_seed(self, i)

    def spawn(self, i: int) -> "SeedStream":
        """A child stream whose master is the ``i``-th derived seed."""
        return SeedStream(derive_seed(self, i))


def derive_seed(stream: SeedStream | int, i: int) -> int:
    """Derive the ``i``-th 64-bit seed of ``stream``.

    The mixing function is numpy's ``SeedSequence`` with entropy ``master``
    and spawn key ``(index, i)``; its output is specified bit-for-bit by numpy
    and independent of platform.
    """
    if isinstance(stream, SeedStream):
        master, base = stream.master, stream.index
    else:
        master, base = int(stream), 0
    ss = np.random.SeedSequence(int(master) & SEED_MASK, spawn_key=(int(base), int(i)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def rng_for(seed: int) -> np.random.Generator:
    """The generator every construction draws from: PCG64 seeded with ``seed``."""
    return np.random.Generator(np.random.PCG64(int(seed) & SEED_MASK))


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Validate ``x`` as a finite 1-D float64 vector, optionally of dimension ``dim``."""
    v = np.asarray(x, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionError(f"expected a non-empty 1-D vector, got shape {v.shape}")
    if dim is not None and v.size != dim:
        raise DimensionError(f"expected dimension {dim}, got {v.size}")
    if not np.all(np.isfinite(v)):
        raise DomainError("vector entries must be finite")
    return v


def target_dim_fm(eps: float, n: int) -> int:
    """Frankl-Maehara target dimension ``ceil(8 ln n / (eps^2 - 2 eps^3 / 3))``, at least 1."""
    _check_open_unit("eps", eps)
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n!r}")
    return max(1, math.ceil(8.0 / (eps * eps - 2.0 * eps**3 / 3.0) * math.log(n)))


def target_dim_union(eps: float, delta: float, const: float = 8.0) -> int:
    """Distributional target dimension ``ceil(const * eps^-2 * ln(2 / delta))``, at least 1."""
    _check_open_unit("eps", eps)
    _check_open_unit("delta", delta)
    return max(1, math.ceil(const / (eps * eps) * math.log(2.0 / delta)))


def sq_norm_ratio(x, y) -> float:
    """``||y||^2 / ||x||^2`` where ``y`` is the embedding of ``x``."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    nx = float(np.dot(x, x))
    if nx == 0.0:
        raise DomainError("squared-norm ratio of the zero vector is undefined")
    return float(np.dot(y, y)) / nx


def next_pow2(n: int) -> int:
    return 1 << max(0, int(n) - 1).bit_length()


@dataclass(frozen=True)
class DistortionStats:
    trials: int
    failures: int
    mean_sq_ratio: float
    failure_rate: float
    ci95_halfwidth: float

    @classmethod
    def from_ratios(cls, ratios, eps: float) -> "DistortionStats":
        """Summarise squared-norm ratios; a trial fails when ``|ratio - 1| > eps``."""
        ratios = np.asarray(ratios, dtype=np.float64)
        trials = int(ratios.size)
        if trials == 0:
            raise DomainError("no trials")
        failures = int(np.count_nonzero(np.abs(ratios - 1.0) > eps))
        rate = failures / trials
        return cls(
            trials=trials,
            failures=failures,
            mean_sq_ratio=math.fsum(ratios.tolist()) / trials,
            failure_rate=rate,
            ci95_halfwidth=1.96 * math.sqrt(rate * (1.0 - rate) / trials),
        )
