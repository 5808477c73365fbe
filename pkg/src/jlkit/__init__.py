"""Johnson-Lindenstrauss transforms, streaming sketches and JL-accelerated k-means."""
from .core import (
    DimensionError,
    DistortionStats,
    DomainError,
    JlParams,
    ParameterError,
    SeedStream,
    derive_seed,
    rng_for,
    sq_norm_ratio,
    target_dim_fm,
    target_dim_union,
)
from .base import Transform
from .transforms import KINDS, LINEAR_KINDS, default_sparsity, make_transform

__all__ = [
    "DimensionError",
    "DistortionStats",
    "DomainError",
    "JlParams",
    "KINDS",
    "LINEAR_KINDS",
    "ParameterError",
    "SeedStream",
    "Transform",
    "default_sparsity",
    "derive_seed",
    "make_transform",
    "rng_for",
    "sq_norm_ratio",
    "target_dim_fm",
    "target_dim_union",
]
