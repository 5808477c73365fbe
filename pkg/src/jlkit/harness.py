"""Monte Carlo checks of distortion guarantees, hard instances and timing."""
from __future__ import annotations

import itertools
import math
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .core import (
    DistortionStats,
    JlParams,
    ParameterError,
    derive_seed,
    rng_for,
    sq_norm_ratio,
)
from .sparse import fh_hard_instance
from .structured import SeedMatrix, default_seed_matrix, lwt_hard_instance, lwt_level
from .transforms import LINEAR_KINDS, make_transform

__all__ = [
    "VECTOR_KINDS",
    "VectorGen",
    "TrialRecord",
    "BenchRecord",
    "PointsetReport",
    "DotProductReport",
    "HardInstanceReport",
    "estimate_failure",
    "audit_failures",
    "failure_report",
    "acceptance_margin",
    "verify_pointset",
    "dot_product_check",
    "bench_embed",
    "lwt_zero_probability",
    "hard_instance_experiment",
    "zipf_stream",
]

VECTOR_KINDS = ("unit_sphere", "binary_k", "fh_hard", "lwt_hard", "fixed")


@dataclass(frozen=True, eq=False)
class VectorGen:
    """Source of test vectors; ``sample(i)`` is deterministic in ``(seed, i)``.

    ``binary_k`` draws a fresh random support of size ``k``; ``fh_hard`` is the
    fixed vector with ``k`` leading ones; ``lwt_hard`` is the null-space instance
    for ``delta`` (its length overrides ``dim``); ``fixed`` cycles through ``data`` rows.
    """

    kind: str
    dim: int
    seed: int = 0
    k: int | None = None
    delta: float | None = None
    data: np.ndarray | None = None
    seed_matrix: SeedMatrix | None = None

    def __post_init__(self):
        if self.kind not in VECTOR_KINDS:
            raise ParameterError(f"unknown vector kind {self.kind!r}")
        if self.kind in ("binary_k", "fh_hard") and not (self.k and 1 <= self.k <= self.dim):
            raise ParameterError(f"{self.kind} needs 1 <= k <= dim")
        if self.kind == "lwt_hard":
            if self.delta is None:
                raise ParameterError("lwt_hard needs delta")
            x = lwt_hard_instance(self.seed_matrix or default_seed_matrix(), self.delta)
            object.__setattr__(self, "data", x[None, :])
            object.__setattr__(self, "dim", x.size)
        if self.kind == "fh_hard":
            object.__setattr__(self, "data", fh_hard_instance(self.k, self.dim)[None, :])
        if self.kind == "fixed":
            data = np.atleast_2d(np.asarray(self.data, dtype=np.float64))
            if data.shape[1] != self.dim or np.any(~data.any(axis=1)):
                raise ParameterError("fixed vectors must be nonzero rows of length dim")
            object.__setattr__(self, "data", data)

    def sample(self, i: int = 0) -> np.ndarray:
        if self.kind == "unit_sphere":
            g = rng_for(derive_seed(self.seed, i)).standard_normal(self.dim)
            return g / np.linalg.norm(g)
        if self.kind == "binary_k":
            x = np.zeros(self.dim)
            x[rng_for(derive_seed(self.seed, i)).choice(self.dim, self.k, replace=False)] = 1.0
            return x
        return self.data[i % len(self.data)].copy()


@dataclass(frozen=True)
class TrialRecord:
    seed: int
    ratio: float


def estimate_failure(
    kind: str,
    params: JlParams,
    gen: VectorGen,
    trials: int,
    log: list | None = None,
    **options,
) -> DistortionStats:
    """Estimate ``Pr[| ||f(x)||^2 - ||x||^2 | > eps ||x||^2]``.

    Trial ``t`` uses a fresh transform seeded with ``derive_seed(params.seed, t)``
    and vector ``gen.sample(t)``.  If ``log`` is a list, one ``TrialRecord`` per
    trial is appended.
    """
    if trials < 100:
        raise ParameterError("need at least 100 trials")
    ratios = np.empty(trials)
    for t in range(trials):
        seed_t = derive_seed(params.seed, t)
        f = make_transform(kind, params.with_seed(seed_t), **options)
        x = gen.sample(t)
        ratios[t] = sq_norm_ratio(x, f.apply(x))
        if log is not None:
            log.append(TrialRecord(seed_t, float(ratios[t])))
    return DistortionStats.from_ratios(ratios, params.eps)


def audit_failures(log: list[TrialRecord], kind: str, params: JlParams, gen: VectorGen, **options) -> int:
    """Recount failures from a trial log by rebuilding each transform from its recorded seed."""
    failures = 0
    for t, rec in enumerate(log):
        f = make_transform(kind, params.with_seed(rec.seed), **options)
        x = gen.sample(t)
        y = f.apply(x)
        nx = sum(v * v for v in x.tolist())
        ny = sum(v * v for v in y.tolist())
        failures += abs(ny - nx) > params.eps * nx
    return failures


def acceptance_margin(delta: float, trials: int) -> float:
    """Three binomial standard deviations at rate ``delta``."""
    return 3.0 * math.sqrt(delta / trials)


def failure_report(kind: str, params: JlParams, stats: DistortionStats) -> dict:
    return {
        "kind": kind,
        "d": params.d,
        "m": params.m,
        "eps": params.eps,
        "delta": params.delta,
        "trials": stats.trials,
        "failures": stats.failures,
        "failure_rate": stats.failure_rate,
        "ci95": stats.ci95_halfwidth,
        "mean_sq_ratio": stats.mean_sq_ratio,
        "seed": params.seed,
    }


@dataclass(frozen=True)
class PointsetReport:
    passed: bool
    worst_distortion: float
    resamples: int
    pairs: int


def _pair_distortion(X: np.ndarray, Y: np.ndarray) -> tuple[float, bool]:
    i, j = np.triu_indices(len(X), 1)
    dx = np.sum((X[i] - X[j]) ** 2, axis=1)
    dy = np.sum((Y[i] - Y[j]) ** 2, axis=1)
    zero = dx == 0
    if np.any(dy[zero] != 0):
        return math.inf, False
    if np.all(zero):
        return 0.0, True
    return float(np.max(np.abs(dy[~zero] - dx[~zero]) / dx[~zero])), True


def verify_pointset(kind: str, params: JlParams, X, max_resamples: int = 0, **options) -> PointsetReport:
    """Sample one transform and check every pairwise squared distance of ``X``.

    With ``max_resamples > 0`` a failing transform is redrawn (seeds derived
    from ``params.seed``) until one passes or the budget runs out.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or len(X) < 2:
        raise ParameterError("need at least two points")
    pairs = len(X) * (len(X) - 1) // 2
    for attempt in range(max_resamples + 1):
        seed = params.seed if attempt == 0 else derive_seed(params.seed, attempt)
        f = make_transform(kind, params.with_seed(seed), **options)
        worst, _ = _pair_distortion(X, f.embed(X))
        if worst <= params.eps:
            return PointsetReport(True, worst, attempt, pairs)
    return PointsetReport(False, worst, max_resamples, pairs)


@dataclass(frozen=True)
class DotProductReport:
    total: int
    conditioned: int
    violations: int  # among conditioned (pair, seed) trials
    unconditional_violations: int


def _preserved(orig: np.ndarray, emb: np.ndarray, eps: float) -> np.ndarray:
    no = np.sum(orig * orig, axis=-1)
    ne = np.sum(emb * emb, axis=-1)
    return np.abs(ne - no) <= eps * no


def dot_product_check(kind: str, params: JlParams, pairs, trials: int, **options) -> DotProductReport:
    """Check ``|<f x, f y> - <x, y>| <= eps ||x|| ||y||`` on trials where ``f`` preserves the polarisation norms.

    A trial is conditioned when ``f`` ``eps``-preserves the squared norms of
    ``x``, ``y``, ``x + y``, ``x - y``, ``u + v`` and ``u - v`` with
    ``u, v`` the normalised ``x, y``.  Pairs with a zero vector are always conditioned.
    """
    if kind not in LINEAR_KINDS:
        raise ParameterError(f"{kind!r} is not a random linear map")
    P = np.array([np.asarray(p[0], dtype=np.float64) for p in pairs])
    Q = np.array([np.asarray(p[1], dtype=np.float64) for p in pairs])
    nx = np.linalg.norm(P, axis=1)
    ny = np.linalg.norm(Q, axis=1)
    nonzero = (nx > 0) & (ny > 0)
    U = np.where(nonzero[:, None], P / np.where(nx > 0, nx, 1)[:, None], 0)
    V = np.where(nonzero[:, None], Q / np.where(ny > 0, ny, 1)[:, None], 0)
    dots = np.sum(P * Q, axis=1)
    total = conditioned = violations = uncond = 0
    for t in range(trials):
        f = make_transform(kind, params.with_seed(derive_seed(params.seed, t)), **options)
        FP, FQ = f.embed(P), f.embed(Q)
        FU = FP / np.where(nx > 0, nx, 1)[:, None]
        FV = FQ / np.where(ny > 0, ny, 1)[:, None]
        err = np.abs(np.sum(FP * FQ, axis=1) - dots)
        bad = err > params.eps * nx * ny
        cond = ~nonzero.copy()
        keep = (
            _preserved(P, FP, params.eps)
            & _preserved(Q, FQ, params.eps)
            & _preserved(P + Q, FP + FQ, params.eps)
            & _preserved(P - Q, FP - FQ, params.eps)
            & _preserved(U + V, FU + FV, params.eps)
            & _preserved(U - V, FU - FV, params.eps)
        )
        cond |= nonzero & keep
        total += len(P)
        conditioned += int(cond.sum())
        violations += int((bad & cond).sum())
        uncond += int(bad.sum())
    return DotProductReport(total, conditioned, violations, uncond)


@dataclass(frozen=True)
class BenchRecord:
    kind: str
    d: int
    m: int
    median_ns: float
    reps: int


def bench_embed(kinds, d_list, m: int, reps: int = 7, seed: int = 0, **options) -> list[BenchRecord]:
    """Median wall time of ``apply`` per (kind, d) on a fixed dense vector, after one warm-up call."""
    if reps < 5:
        raise ParameterError("need at least 5 repetitions")
    out = []
    for kind in kinds:
        for d in d_list:
            f = make_transform(kind, JlParams(d, m, seed=seed), **options)
            x = rng_for(derive_seed(seed, d)).standard_normal(d)
            f.apply(x)
            times = []
            for _ in range(reps):
                t0 = time.perf_counter_ns()
                f.apply(x)
                times.append(time.perf_counter_ns() - t0)
            out.append(BenchRecord(kind, d, f.m, float(np.median(times)), reps))
    return out


def lwt_zero_probability(seed_mat: SeedMatrix, x) -> float:
    """Exact ``Pr_D[A_l D x = 0]`` by enumerating sign patterns on the support of ``x``.

    ``A_l`` is built as an explicit Kronecker power.
    """
    x = np.asarray(x, dtype=np.float64)
    level = lwt_level(seed_mat.c, x.size)
    A = seed_mat.entries
    for _ in range(level - 1):
        A = np.kron(A, seed_mat.entries)
    xp = np.zeros(A.shape[1])
    xp[: x.size] = x
    sup = np.flatnonzero(xp)
    if sup.size > 20:
        raise ParameterError("support too large to enumerate")
    signs = np.array(list(itertools.product((-1.0, 1.0), repeat=sup.size)))
    Y = (A[:, sup] * xp[sup]) @ signs.T
    return float(np.mean(np.max(np.abs(Y), axis=0) < 1e-12))


@dataclass(frozen=True)
class HardInstanceReport:
    target: str
    trials: int
    rate: float  # failure rate (fh, toeplitz) or zero-output rate (lwt)
    delta: float
    exceeds_delta: bool
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)


def hard_instance_experiment(
    target: str,
    params: JlParams,
    trials: int = 10_000,
    k: int = 2,
    seed_mat: SeedMatrix | None = None,
) -> HardInstanceReport:
    """Run a structured worst-case input through its matching construction.

    ``fh`` and ``toeplitz_fh_shape`` feed ``fh_hard_instance(k, d)`` to feature
    hashing or the Toeplitz map.  ``lwt`` counts trials with ``f(x) = 0`` on the
    null-space instance for ``params.delta``; ``G`` is Gaussian so it cannot
    cancel a nonzero ``A_l D x``.
    """
    if target in ("fh", "toeplitz_fh_shape"):
        kind = "feature_hashing" if target == "fh" else "toeplitz"
        gen = VectorGen("fh_hard", params.d, params.seed, k=k)
        stats = estimate_failure(kind, params, gen, trials)
        return HardInstanceReport(
            target, trials, float(stats.failure_rate), params.delta, bool(stats.failure_rate > params.delta),
            {"k": k, "failures": stats.failures, "mean_sq_ratio": stats.mean_sq_ratio},
        )
    if target != "lwt":
        raise ParameterError(f"unknown hard-instance target {target!r}")
    seed_mat = seed_mat or default_seed_matrix()
    x = lwt_hard_instance(seed_mat, params.delta)
    level = lwt_level(seed_mat.c, x.size)
    m = min(params.m, seed_mat.r**level)
    p = JlParams(x.size, m, params.eps, params.delta, params.seed)
    zeros = fixed = fixed_nonzero = 0
    scale = np.linalg.norm(x)
    for t in range(trials):
        f = make_transform("lwtjl", p.with_seed(derive_seed(p.seed, t)), seed_mat=seed_mat, inner="gaussian")
        dx, _, fx = f.stages(x)
        is_zero = bool(np.linalg.norm(fx) <= 1e-12 * scale)
        zeros += is_zero
        if np.array_equal(dx[: x.size], x):
            fixed += 1
            fixed_nonzero += not is_zero
    rate = zeros / trials
    return HardInstanceReport(
        "lwt", trials, rate, params.delta, bool(rate > params.delta),
        {
            "support": int(np.count_nonzero(x)),
            "dim": int(x.size),
            "m": m,
            "two_pow_neg_support": 2.0 ** -int(np.count_nonzero(x)),
            "exact_zero_probability": lwt_zero_probability(seed_mat, x),
            "sigma": math.sqrt(rate * (1 - rate) / trials),
            "dx_equals_x_rate": fixed / trials,
            "dx_equals_x_but_nonzero": fixed_nonzero,
        },
    )


def zipf_stream(d: int, length: int, exponent: float, seed: int) -> tuple[np.ndarray, np.ndarray]:
    """Insert-only stream whose item ids follow a Zipf law over ``[0, d)`` (rank ``r`` has weight ``r^-exponent``)."""
    w = np.arange(1, d + 1, dtype=np.float64) ** -exponent
    idx = rng_for(seed).choice(d, size=length, p=w / w.sum())
    return idx.astype(np.int64), np.ones(length, dtype=np.int64)
