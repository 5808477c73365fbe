"""Construction of any transform kind by name."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .base import Transform
from .core import JlParams, ParameterError
from . import dense, sparse, structured

__all__ = ["KINDS", "LINEAR_KINDS", "IdentityTransform", "default_sparsity", "make_transform"]


@dataclass(frozen=True, repr=False, eq=False)
class IdentityTransform(Transform):
    params: JlParams
    kind: str = "identity"

    def __post_init__(self):
        if self.params.m != self.params.d:
            raise ParameterError("identity transform needs m == d")

    def _apply(self, x):
        return x.copy()

    def _embed(self, X):
        return X.copy()


def default_sparsity(eps: float, delta: float) -> int:
    """``ceil(eps^-1 ln(1/delta))``, the column sparsity used when none is given."""
    return max(1, math.ceil(math.log(1.0 / delta) / eps))


def _sparse_kind(builder):
    def make(p: JlParams, s: int | None = None) -> Transform:
        return builder(p, s if s is not None else default_sparsity(p.eps, p.delta))

    return make


_BUILDERS = {
    "identity": IdentityTransform,
    "gaussian": dense.gaussian_new,
    "rademacher": dense.rademacher_new,
    "achlioptas": dense.achlioptas_new,
    "feature_hashing": sparse.feature_hashing_new,
    "block": _sparse_kind(sparse.block_new),
    "graph": _sparse_kind(sparse.graph_new),
    "dks": _sparse_kind(sparse.dks_new),
    "fjlt": structured.fjlt_new,
    "srht": structured.srht_new,
    "toeplitz": structured.toeplitz_new,
    "lwtjl": structured.lwtjl_new,
    "kacjl": structured.kacjl_new,
}

KINDS = tuple(_BUILDERS)
# every kind except identity is a random linear map R^d -> R^m
LINEAR_KINDS = tuple(k for k in KINDS if k != "identity")


def make_transform(kind: str, params: JlParams, **options) -> Transform:
    """Sample a transform of ``kind``; ``options`` are passed to its constructor.

    ``block``/``graph``/``dks`` take ``s``; ``achlioptas`` takes ``q``;
    ``fjlt`` takes ``c_q``; ``lwtjl`` takes ``seed_mat`` and ``inner``;
    ``kacjl`` takes ``n_points``, ``consts``, ``mode``, ``first_phase_only``;
    ``gaussian`` takes ``orthogonalize``.
    """
    try:
        builder = _BUILDERS[kind]
    except KeyError:
        raise ParameterError(f"unknown transform kind {kind!r}; choose from {', '.join(KINDS)}")
    return builder(params, **options)

