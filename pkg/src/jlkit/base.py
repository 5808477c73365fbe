from __future__ import annotations

import numpy as np

from .core import DimensionError, JlParams, as_vector


class Transform:
    """A sampled linear map ``R^d -> R^m``; immutable once constructed.

    Subclasses implement ``_apply`` on a validated 1-D vector and may
    override ``_embed`` with a batched version.
    """

    kind: str
    params: JlParams

    @property
    def d(self) -> int:
        return self.params.d

    @property
    def m(self) -> int:
        return self.params.m

    def apply(self, x) -> np.ndarray:
        return self._apply(as_vector(x, self.d))

    __call__ = apply

    def embed(self, X) -> np.ndarray:
        """Embed every row of ``X`` (shape ``(n, d)``); returns ``(n, m)``."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.d:
            raise DimensionError(f"expected rows of dimension {self.d}, got shape {X.shape}")
        return self._embed(X)

    def _embed(self, X: np.ndarray) -> np.ndarray:
        if X.shape[0] == 0:
            return np.zeros((0, self.m))
        return np.stack([self._apply(row) for row in X])

    def _apply(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def materialize(self) -> np.ndarray:
        """The ``m x d`` matrix of this map, built column by column from basis vectors."""
        return self._embed(np.eye(self.d)).T

    def __repr__(self):
        return f"{type(self).__name__}(kind={self.kind!r}, d={self.d}, m={self.m})"
