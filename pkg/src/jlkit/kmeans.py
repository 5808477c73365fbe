"""Lloyd's algorithm, centroid and pairwise k-means costs, and JL-accelerated clustering."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist, pdist

from .core import DomainError, JlParams, ParameterError, derive_seed, rng_for, target_dim_fm
from .transforms import make_transform

__all__ = [
    "Partition",
    "ClusteringResult",
    "JlKmeansReport",
    "lloyd",
    "cost_centroid",
    "cost_pairwise",
    "centered_inner_sum",
    "pairwise_preserved",
    "jl_kmeans",
]


@dataclass(frozen=True, eq=False)
class Partition:
    assignment: np.ndarray
    k: int

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.ndim != 1 or (a.size and (a.min() < 0 or a.max() >= self.k)):
            raise ParameterError(f"assignment must map points into [0, {self.k})")
        object.__setattr__(self, "assignment", a)

    @property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.k)

    def members(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == i)

    def _require_nonempty(self):
        if np.any(self.sizes == 0):
            raise DomainError("partition has an empty cluster")


@dataclass(frozen=True, eq=False)
class ClusteringResult:
    centers: np.ndarray
    partition: Partition
    cost: float
    iterations: int
    converged: bool
    history: list[float] = field(default_factory=list)


def _means(X: np.ndarray, part: Partition) -> np.ndarray:
    sums = np.zeros((part.k, X.shape[1]))
    np.add.at(sums, part.assignment, X)
    return sums / part.sizes[:, None]


def cost_centroid(X, partition: Partition) -> float:
    """Sum of squared distances of every point to the mean of its cluster."""
    X = np.asarray(X, dtype=np.float64)
    partition._require_nonempty()
    diff = X - _means(X, partition)[partition.assignment]
    return float(np.sum(diff * diff))


def cost_pairwise(X, partition: Partition) -> float:
    """``1/2 sum_i |X_i|^-1 sum_{x, y in X_i} ||x - y||^2`` over ordered pairs."""
    X = np.asarray(X, dtype=np.float64)
    partition._require_nonempty()
    total = 0.0
    for i in range(partition.k):
        pts = X[partition.members(i)]
        ordered = 2.0 * np.sum(pdist(pts, "sqeuclidean")) if len(pts) > 1 else 0.0
        total += 0.5 * ordered / len(pts)
    return total


def centered_inner_sum(X) -> float:
    """``sum_{x, y} <x - mu, y - mu>`` by explicit double sum over the Gram matrix."""
    C = np.asarray(X, dtype=np.float64)
    C = C - C.mean(axis=0)
    return float(np.sum(C @ C.T))


def lloyd(
    X,
    k: int,
    seed: int = 0,
    max_iter: int = 100,
    rel_tol: float = 1e-9,
    init: np.ndarray | None = None,
) -> ClusteringResult:
    """Alternate nearest-center assignment and mean updates.

    Centers start at ``k`` distinct points chosen uniformly with ``seed``
    (or the point indices in ``init``).  Ties go to the lowest cluster id.
    An empty cluster takes the point farthest from its current center.
    Stops when the relative cost decrease drops below ``rel_tol``.
    """
    X = np.asarray(X, dtype=np.float64)
    n = X.shape[0]
    if not (1 <= k <= n):
        raise ParameterError(f"need 1 <= k <= |X|, got k={k}, |X|={n}")
    if init is None:
        init = rng_for(seed).choice(n, size=k, replace=False)
    centers = X[np.asarray(init)].copy()
    history: list[float] = []
    converged = False
    part = None
    for it in range(1, max_iter + 1):
        dist = cdist(X, centers, "sqeuclidean")
        assign = np.argmin(dist, axis=1)
        sizes = np.bincount(assign, minlength=k)
        for empty in np.flatnonzero(sizes == 0):
            far = int(np.argmax(dist[np.arange(n), assign]))
            assign[far] = empty
            dist[far] = 0.0
            sizes = np.bincount(assign, minlength=k)
        part = Partition(assign, k)
        centers = _means(X, part)
        cost = cost_centroid(X, part)
        history.append(cost)
        if len(history) > 1 and history[-2] - cost <= rel_tol * history[-2]:
            converged = True
            break
        if cost == 0.0:
            converged = True
            break
    return ClusteringResult(centers, part, history[-1], it, converged, history)


def pairwise_preserved(X, Y, eps: float) -> tuple[bool, float]:
    """Whether every squared pairwise distance of ``X`` is kept within ``1 +- eps`` in ``Y``.

    Also returns the worst relative distortion; coincident points must stay coincident.
    """
    dx = pdist(np.asarray(X, dtype=np.float64), "sqeuclidean")
    dy = pdist(np.asarray(Y, dtype=np.float64), "sqeuclidean")
    zero = dx == 0
    if np.any(dy[zero] != 0):
        return False, float("inf")
    if np.all(zero):
        return True, 0.0
    worst = float(np.max(np.abs(dy[~zero] - dx[~zero]) / dx[~zero]))
    return worst <= eps, worst


@dataclass(frozen=True)
class JlKmeansReport:
    m: int
    kind: str
    kappa_m: float  # cost of the low-dimensional partition in the embedded space
    kappa_d: float  # cost of the same partition lifted back to the original space
    kappa_d_direct: float  # Lloyd run directly in the original space, same init
    lifted_over_direct: float
    transfer_ratio: float  # kappa_d (1 - eps) / kappa_m
    distances_preserved: bool
    worst_distortion: float
    iterations_m: int
    iterations_d: int

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def jl_kmeans(
    X,
    k: int,
    eps: float,
    transform_kind: str = "gaussian",
    seed: int = 0,
    m: int | None = None,
    delta: float = 0.05,
    max_iter: int = 100,
    rel_tol: float = 1e-9,
    n_init: int = 1,
    **transform_options,
) -> JlKmeansReport:
    """Embed ``X``, cluster in both spaces from the same initial points, and compare costs.

    ``m`` defaults to ``target_dim_fm(eps, |X|)`` (``d`` for the identity map).
    The transform is seeded with ``seed``; the initial points come from the
    separate stream ``derive_seed(seed, 0)``.  With
    ``n_init > 1`` both spaces try the same ``n_init`` initialisations and
    each keeps its own cheapest run.
    """
    X = np.asarray(X, dtype=np.float64)
    n, d = X.shape
    if n < 2:
        raise ParameterError("need at least two points")
    if m is None:
        m = d if transform_kind == "identity" else target_dim_fm(eps, n)
    t = make_transform(transform_kind, JlParams(d, m, eps, delta, seed), **transform_options)
    Y = t.embed(X)
    if n_init < 1:
        raise ParameterError("n_init must be >= 1")
    rng = rng_for(derive_seed(seed, 0))
    inits = [rng.choice(n, size=k, replace=False) for _ in range(n_init)]
    low = min((lloyd(Y, k, max_iter=max_iter, rel_tol=rel_tol, init=i) for i in inits), key=lambda r: r.cost)
    high = min((lloyd(X, k, max_iter=max_iter, rel_tol=rel_tol, init=i) for i in inits), key=lambda r: r.cost)
    kappa_m = low.cost
    kappa_d = cost_centroid(X, low.partition)
    ok, worst = pairwise_preserved(X, Y, eps)
    return JlKmeansReport(
        m=t.m,
        kind=transform_kind,
        kappa_m=kappa_m,
        kappa_d=kappa_d,
        kappa_d_direct=high.cost,
        lifted_over_direct=kappa_d / high.cost if high.cost > 0 else (1.0 if kappa_d == 0 else float("inf")),
        transfer_ratio=kappa_d * (1 - eps) / kappa_m if kappa_m > 0 else float("nan"),
        distances_preserved=ok,
        worst_distortion=worst,
        iterations_m=low.iterations,
        iterations_d=high.iterations,
    )
