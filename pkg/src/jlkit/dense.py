"""Dense i.i.d. constructions: Gaussian, Rademacher and Achlioptas.

The stored matrix has unit-variance entries; ``apply`` multiplies by
``1/sqrt(m)`` so that ``E||f(x)||^2 = ||x||^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import Transform
from .core import JlParams, ParameterError, rng_for

__all__ = ["DenseTransform", "gaussian_new", "rademacher_new", "achlioptas_new", "dense_apply"]


@dataclass(frozen=True, repr=False, eq=False)
class DenseTransform(Transform):
    kind: str
    matrix: np.ndarray
    params: JlParams
    q: float = 1.0

    def __post_init__(self):
        self.matrix.setflags(write=False)

    def _apply(self, x):
        return self.matrix @ x / math.sqrt(self.m)

    def _embed(self, X):
        return X @ self.matrix.T / math.sqrt(self.m)


def gaussian_new(p: JlParams, orthogonalize: bool = False) -> DenseTransform:
    """i.i.d. standard normal entries (numpy's ziggurat sampler on PCG64(seed)).

    With ``orthogonalize`` the rows are Gram-Schmidt orthonormalised (QR of
    the transpose) and rescaled to norm ``sqrt(d)``, which gives the
    ``sqrt(d/m)`` scaled orthogonal projection.  Requires ``m <= d``.
    """
    A = rng_for(p.seed).standard_normal((p.m, p.d))
    if orthogonalize:
        if p.m > p.d:
            raise ParameterError("orthogonal rows need m <= d")
        q, r = np.linalg.qr(A.T)
        # sign fix makes the factorisation unique (Haar-distributed rows)
        q = q * np.sign(np.diag(r))
        A = q.T * math.sqrt(p.d)
    return DenseTransform("gaussian", A, p)


def rademacher_new(p: JlParams) -> DenseTransform:
    signs = rng_for(p.seed).integers(0, 2, size=(p.m, p.d), dtype=np.int8)
    return DenseTransform("rademacher", (2.0 * signs - 1.0), p)


def achlioptas_new(p: JlParams, q: float = 1.0 / 3.0) -> DenseTransform:
    """Entries ``0`` w.p. ``1 - q`` and ``+-1/sqrt(q)`` w.p. ``q/2`` each."""
    if not (0.0 < q <= 1.0):
        raise ParameterError(f"q must lie in (0, 1], got {q!r}")
    rng = rng_for(p.seed)
    keep = rng.random((p.m, p.d)) < q
    signs = 2.0 * rng.integers(0, 2, size=(p.m, p.d), dtype=np.int8) - 1.0
    return DenseTransform("achlioptas", np.where(keep, signs / math.sqrt(q), 0.0), p, q=q)


def dense_apply(t: DenseTransform, x) -> np.ndarray:
    return t.apply(x)
