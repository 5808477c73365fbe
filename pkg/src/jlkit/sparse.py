"""Sparse constructions (Feature Hashing, block, graph, DKS) and their sizing formulas."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .base import Transform
from .core import DomainError, JlParams, ParameterError, as_vector, derive_seed, rng_for
from .hashing import poly_hash_new, sign_hash_new

__all__ = [
    "SparseTransform",
    "NuThresholdConfig",
    "feature_hashing_new",
    "block_new",
    "graph_new",
    "dks_new",
    "duplicate_scale",
    "sparse_apply",
    "nu_fh",
    "dks_sparsity",
    "fh_hard_instance",
]


@dataclass(frozen=True, repr=False, eq=False)
class SparseTransform(Transform):
    """Column ``i`` has nonzeros ``signs[i, k] / sqrt(s)`` at rows ``rows[i, k]``.

    For ``kind == "dks"`` the structure belongs to a Feature Hashing map over
    dimension ``s * d`` (held in ``inner``) and ``apply`` duplicates first.
    """

    kind: str
    rows: np.ndarray  # (d, s) int64
    signs: np.ndarray  # (d, s) float64, entries +-1
    params: JlParams
    s: int = 1
    inner: "SparseTransform | None" = None

    def __post_init__(self):
        self.rows.setflags(write=False)
        self.signs.setflags(write=False)

    def _apply(self, x):
        if self.inner is not None:
            return self.inner._apply(duplicate_scale(x, self.s))
        nz = np.flatnonzero(x)
        y = np.bincount(
            self.rows[nz].ravel(),
            weights=(self.signs[nz] * x[nz, None]).ravel(),
            minlength=self.m,
        )
        return y / math.sqrt(self.s)

    def to_scipy(self) -> sp.csc_matrix:
        """The ``m x d`` matrix with duplicate entries summed."""
        if self.inner is not None:
            dup = sp.kron(sp.identity(self.d), np.ones((self.s, 1)) / math.sqrt(self.s))
            return (self.inner.to_scipy() @ dup).tocsc()
        d, s = self.rows.shape
        cols = np.repeat(np.arange(d), s)
        data = self.signs.ravel() / math.sqrt(self.s)
        return sp.csc_matrix((data, (self.rows.ravel(), cols)), shape=(self.m, d))

    def _embed(self, X):
        return np.asarray((self.to_scipy() @ X.T).T)


@dataclass(frozen=True)
class NuThresholdConfig:
    """Constants of the Feature Hashing ``l_inf/l_2`` threshold; only their existence is known."""

    C: float = 3.0
    D: float = 0.5
    lead: float = 1.0

    def __post_init__(self):
        if not (self.D > 0 and self.C >= self.D and self.lead > 0):
            raise ParameterError("need C >= D > 0 and lead > 0")


def _check_sparsity(s: int, m: int | None = None) -> None:
    if int(s) != s or s < 1:
        raise ParameterError(f"sparsity must be a positive integer, got {s!r}")
    if m is not None and s > m:
        raise ParameterError(f"sparsity s={s} exceeds target dimension m={m}")


def feature_hashing_new(p: JlParams) -> SparseTransform:
    """One signed nonzero per column: row from a 2-wise hash, sign from a 4-wise hash."""
    keys = np.arange(p.d)
    rows = poly_hash_new(2, p.m, derive_seed(p.seed, 0)).eval_many(keys)
    signs = sign_hash_new(derive_seed(p.seed, 1)).eval_many(keys).astype(np.float64)
    return SparseTransform("feature_hashing", rows[:, None], signs[:, None], p, 1)


def block_new(p: JlParams, s: int) -> SparseTransform:
    """One nonzero in each of ``s`` consecutive row blocks.

    When ``s`` does not divide ``m`` the target dimension is rounded up to the
    next multiple of ``s``; the returned transform's ``m`` reflects that.
    """
    _check_sparsity(s, p.m)
    m = -(-p.m // s) * s
    length = m // s
    rng = rng_for(p.seed)
    rows = rng.integers(0, length, size=(p.d, s)) + length * np.arange(s)
    signs = 2.0 * rng.integers(0, 2, size=(p.d, s)) - 1.0
    return SparseTransform("block", rows, signs, p.with_m(m), s)


def graph_new(p: JlParams, s: int) -> SparseTransform:
    """``s`` distinct rows per column, sampled without replacement."""
    _check_sparsity(s, p.m)
    rng = rng_for(p.seed)
    if s == p.m:
        rows = np.tile(np.arange(p.m), (p.d, 1))
    else:
        # the s smallest of m i.i.d. uniforms index a uniform s-subset
        rows = np.argpartition(rng.random((p.d, p.m)), s - 1, axis=1)[:, :s]
    signs = 2.0 * rng.integers(0, 2, size=(p.d, s)) - 1.0
    return SparseTransform("graph", np.ascontiguousarray(rows, dtype=np.int64), signs, p, s)


def duplicate_scale(x, s: int) -> np.ndarray:
    """Repeat each entry ``s`` times and scale by ``1/sqrt(s)``; norm-preserving."""
    _check_sparsity(s)
    x = np.asarray(x, dtype=np.float64)
    return np.repeat(x / math.sqrt(s), s)


def dks_new(p: JlParams, s: int) -> SparseTransform:
    """Duplicate-then-hash: Feature Hashing over dimension ``s * d``.

    Hashes of one source coordinate may collide.
    """
    _check_sparsity(s)
    fh = feature_hashing_new(JlParams(p.d * s, p.m, p.eps, p.delta, p.seed))
    return SparseTransform(
        "dks", fh.rows.reshape(p.d, s), fh.signs.reshape(p.d, s), p, s, inner=fh
    )


def sparse_apply(t: SparseTransform, x) -> np.ndarray:
    return t.apply(x)


def nu_fh(m: int, eps: float, delta: float, cfg: NuThresholdConfig = NuThresholdConfig()) -> float:
    """Largest ``l_inf/l_2`` ratio Feature Hashing handles, up to the constants in ``cfg``.

    Three branches: 1 when ``m >= 2/(eps^2 delta)``; 0 when
    ``m < D lg(1/delta) / eps^2``; otherwise
    ``lead * sqrt(eps) * min(lg(eps m / L) / L, sqrt(lg(eps^2 m / L) / L))``
    with ``L = lg(1/delta)``, clamped to ``[0, 1]``.
    """
    if m >= 2.0 / (eps * eps * delta):
        return 1.0
    L = math.log2(1.0 / delta)
    if m < cfg.D * L / (eps * eps):
        return 0.0
    a = math.log2(eps * m / L) / L
    b = math.sqrt(max(0.0, math.log2(eps * eps * m / L)) / L)
    return min(1.0, max(0.0, cfg.lead * math.sqrt(eps) * min(a, b)))


def dks_sparsity(nu_dks: float, nu_fh: float, lead: float = 1.0, m: int | None = None) -> int:
    """Column sparsity ``ceil(lead * nu_dks^2 / nu_fh^2)``, clamped to ``[1, m]``."""
    if nu_fh <= 0.0:
        raise DomainError("nu_fh = 0: Feature Hashing is insufficient at any sparsity")
    if not (nu_fh <= nu_dks <= 1.0):
        raise ParameterError("need 0 < nu_fh <= nu_dks <= 1")
    s = max(1, math.ceil(lead * nu_dks**2 / nu_fh**2))
    return s if m is None else min(s, m)


def fh_hard_instance(k: int, d: int) -> np.ndarray:
    """Unit vector with ``k`` leading entries ``1/sqrt(k)``."""
    if not (1 <= k <= d):
        raise ParameterError(f"need 1 <= k <= d, got k={k}, d={d}")
    x = np.zeros(d)
    x[:k] = 1.0 / math.sqrt(k)
    return as_vector(x)
