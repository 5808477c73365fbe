"""FFT and Walsh-Hadamard based constructions: FJLT, SRHT, Toeplitz, LWTJL and KacJL.

Hadamard-based kinds zero-pad the input to the next power of two; padded
coordinates carry zeros and never contribute to the output.  Every kind is
scaled so that ``E||f(x)||^2 = ||x||^2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numba
import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .base import Transform
from .core import (
    DimensionError,
    JlParams,
    ParameterError,
    as_vector,
    derive_seed,
    next_pow2,
    rng_for,
)

__all__ = [
    "fwht",
    "hadamard",
    "fft_circular_convolve",
    "FJLT",
    "SRHT",
    "ToeplitzSpec",
    "Toeplitz",
    "SeedMatrix",
    "LWTJL",
    "KacWalk",
    "KacJL",
    "fjlt_q",
    "fjlt_new",
    "srht_new",
    "toeplitz_new",
    "toeplitz_apply_blocked",
    "toeplitz_apply_naive",
    "default_seed_matrix",
    "lwt_apply",
    "lwt_level",
    "lwtjl_new",
    "lwt_hard_instance",
    "kac_walk_new",
    "kacjl_new",
    "kacjl_sizes",
    "structured_apply",
]


def _is_pow2(n: int) -> bool:
    return n >= 1 and n & (n - 1) == 0


def fwht(x) -> np.ndarray:
    """Unnormalised Walsh-Hadamard transform along the last axis, Sylvester order.

    Computes ``H x`` with ``H_ij = (-1)^popcount(i & j)`` in ``O(d log d)``.
    """
    a = np.array(x, dtype=np.float64)
    n = a.shape[-1]
    if not _is_pow2(n):
        raise DimensionError(f"fwht needs a power-of-two length, got {n}")
    lead = a.shape[:-1]
    h = 1
    while h < n:
        a = a.reshape(lead + (n // (2 * h), 2, h))
        top, bot = a[..., 0, :], a[..., 1, :]
        a = np.stack((top + bot, top - bot), axis=-2)
        h *= 2
    return a.reshape(lead + (n,))


def hadamard(n: int) -> np.ndarray:
    """Explicit Sylvester-order Walsh-Hadamard matrix (for oracles and small cases)."""
    if not _is_pow2(n):
        raise DimensionError(f"Hadamard order must be a power of two, got {n}")
    i = np.arange(n)
    bits = np.bitwise_and.outer(i, i)
    parity = np.zeros_like(bits)
    while np.any(bits):
        parity ^= bits & 1
        bits >>= 1
    return 1.0 - 2.0 * parity


def fft_circular_convolve(a, b) -> np.ndarray:
    """Circular convolution along the last axis via the FFT; lengths equal powers of two."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    n = a.shape[-1]
    if b.shape[-1] != n:
        raise DimensionError(f"length mismatch: {n} vs {b.shape[-1]}")
    if not _is_pow2(n):
        raise DimensionError(f"convolution length must be a power of two, got {n}")
    return np.fft.irfft(np.fft.rfft(a) * np.fft.rfft(b), n=n)


def _rademacher(rng: np.random.Generator, size) -> np.ndarray:
    return 2.0 * rng.integers(0, 2, size=size) - 1.0


def _pad(X: np.ndarray, n: int) -> np.ndarray:
    if X.shape[-1] == n:
        return X
    out = np.zeros(X.shape[:-1] + (n,))
    out[..., : X.shape[-1]] = X
    return out


# ---------------------------------------------------------------- FJLT / SRHT


def fjlt_q(d: int, delta: float, c_q: float = 1.0) -> float:
    """Nonzero density ``min(1, c_q ln^2(2/delta) / d)`` of the sparse projection."""
    return min(1.0, c_q * math.log(2.0 / delta) ** 2 / d)


def _bernoulli_positions(rng: np.random.Generator, total: int, q: float) -> np.ndarray:
    """Sorted positions in ``[0, total)`` each kept independently w.p. ``q``.

    Geometric gap skipping, so the cost is proportional to the number kept.
    """
    if q >= 1.0:
        return np.arange(total)
    chunks, pos = [], -1
    batch = max(16, int(1.2 * total * q) + 16)
    while True:
        steps = rng.geometric(q, size=batch)
        cand = pos + np.cumsum(steps)
        chunks.append(cand[cand < total])
        if cand[-1] >= total:
            break
        pos = int(cand[-1])
    return np.concatenate(chunks)


@dataclass(frozen=True, repr=False, eq=False)
class FJLT(Transform):
    """``(1/sqrt(m)) P (H/sqrt(D)) diag(signs) x`` on the input zero-padded to ``D``."""

    params: JlParams
    P: sp.csr_matrix
    signs: np.ndarray
    q: float
    kind: str = "fjlt"

    @property
    def padded_dim(self) -> int:
        return self.signs.size

    def _embed(self, X):
        D = self.padded_dim
        Y = fwht(_pad(X, D) * self.signs) / math.sqrt(D)
        return np.asarray((self.P @ Y.T).T) / math.sqrt(self.m)

    def _apply(self, x):
        return self._embed(x[None, :])[0]


def fjlt_new(p: JlParams, c_q: float = 1.0) -> FJLT:
    """Nonzeros of ``P`` appear w.p. ``q`` and are ``N(0, 1/q)``; ``signs`` is Rademacher."""
    D = next_pow2(p.d)
    q = fjlt_q(D, p.delta, c_q)
    rng = rng_for(p.seed)
    signs = _rademacher(rng, D)
    pos = _bernoulli_positions(rng, p.m * D, q)
    vals = rng.standard_normal(pos.size) / math.sqrt(q)
    P = sp.csr_matrix((vals, (pos // D, pos % D)), shape=(p.m, D))
    return FJLT(p, P, signs, q)


@dataclass(frozen=True, repr=False, eq=False)
class SRHT(Transform):
    """``sqrt(D/m)`` times ``m`` sampled rows of ``(H/sqrt(D)) diag(signs)`` (with replacement)."""

    params: JlParams
    rows: np.ndarray
    signs: np.ndarray
    kind: str = "srht"

    @property
    def padded_dim(self) -> int:
        return self.signs.size

    def _embed(self, X):
        # sqrt(D/m) * H / sqrt(D) = H / sqrt(m)
        return fwht(_pad(X, self.padded_dim) * self.signs)[:, self.rows] / math.sqrt(self.m)

    def _apply(self, x):
        return self._embed(x[None, :])[0]


def srht_new(p: JlParams) -> SRHT:
    D = next_pow2(p.d)
    rng = rng_for(p.seed)
    signs = _rademacher(rng, D)
    rows = rng.integers(0, D, size=p.m)
    return SRHT(p, rows, signs)


# ---------------------------------------------------------------- Toeplitz


@dataclass(frozen=True, eq=False)
class ToeplitzSpec:
    """``T_ij = t[j - i]`` stored with offset: ``t_values[k + m - 1] = t_k`` for ``k in [-(m-1), d-1]``."""

    m: int
    d: int
    t_values: np.ndarray
    sign_diag: np.ndarray

    def t(self, k):
        return self.t_values[np.asarray(k) + self.m - 1]

    def matrix(self) -> np.ndarray:
        i = np.arange(self.m)[:, None]
        j = np.arange(self.d)[None, :]
        return self.t(j - i)


def toeplitz_apply_naive(spec: ToeplitzSpec, x) -> np.ndarray:
    """``T diag(sign_diag) x`` by explicit ``O(md)`` matrix-vector product."""
    return spec.matrix() @ (spec.sign_diag * np.asarray(x, dtype=np.float64))


def _block_kernels(spec: ToeplitzSpec, L: int) -> np.ndarray:
    """First columns of the size-``L`` circulant embeddings of each ``m x m`` block."""
    m, d = spec.m, spec.d
    nblocks = -(-d // m)
    # t_k for k in [-(m-1), nblocks*m - 1]; columns past d meet zero input
    t_ext = np.zeros(nblocks * m + m - 1)
    t_ext[: spec.t_values.size] = spec.t_values
    base = np.arange(nblocks)[:, None] * m
    kern = np.zeros((nblocks, L))
    k = np.arange(m)
    kern[:, :m] = t_ext[base - k + m - 1]  # c[k] = T_b[k, 0] = t_{bm - k}
    kern[:, L - k[1:]] = t_ext[base + k[1:] + m - 1]  # c[L-k] = T_b[0, k] = t_{bm + k}
    return kern


def toeplitz_apply_blocked(spec: ToeplitzSpec, x) -> np.ndarray:
    """``T diag(sign_diag) x`` in ``O(d log m)``.

    The columns are cut into ``ceil(d/m)`` blocks; each ``m x m`` block is
    Toeplitz, embedded in a circulant of power-of-two size ``L >= 2m - 1``
    and applied with :func:`fft_circular_convolve`.  Block outputs are summed.
    """
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    X = np.atleast_2d(X) * spec.sign_diag
    m, d = spec.m, spec.d
    nblocks = -(-d // m)
    L = next_pow2(2 * m - 1)
    blocks = _pad(X, nblocks * m).reshape(X.shape[0], nblocks, m)
    blocks = _pad(blocks, L)
    out = fft_circular_convolve(_block_kernels(spec, L), blocks)[..., :m].sum(axis=1)
    return out[0] if single else out


@dataclass(frozen=True, repr=False, eq=False)
class Toeplitz(Transform):
    """``(1/sqrt(m)) T diag(signs) x`` with Rademacher Toeplitz ``T``."""

    params: JlParams
    spec: ToeplitzSpec
    kind: str = "toeplitz"

    def _embed(self, X):
        return toeplitz_apply_blocked(self.spec, X) / math.sqrt(self.m)

    def _apply(self, x):
        return toeplitz_apply_blocked(self.spec, x) / math.sqrt(self.m)


def toeplitz_new(p: JlParams) -> Toeplitz:
    rng = rng_for(p.seed)
    t_values = _rademacher(rng, p.d + p.m - 1)
    sign_diag = _rademacher(rng, p.d)
    return Toeplitz(p, ToeplitzSpec(p.m, p.d, t_values, sign_diag))


# ---------------------------------------------------------------- lean Walsh


@dataclass(frozen=True, eq=False)
class SeedMatrix:
    """``r x c`` with ``r < c``, unit columns, and orthogonal rows of equal norm."""

    entries: np.ndarray
    tol: float = 1e-9

    def __post_init__(self):
        A = np.asarray(self.entries, dtype=np.float64)
        object.__setattr__(self, "entries", A)
        r, c = A.shape
        if r >= c:
            raise ParameterError(f"seed matrix needs r < c, got {r}x{c}")
        if not np.allclose(np.linalg.norm(A, axis=0), 1.0, atol=self.tol):
            raise ParameterError("seed matrix columns must have unit norm")
        if not np.allclose(A @ A.T, (c / r) * np.eye(r), atol=self.tol):
            raise ParameterError("seed matrix rows must be orthogonal with equal norms")

    @property
    def r(self) -> int:
        return self.entries.shape[0]

    @property
    def c(self) -> int:
        return self.entries.shape[1]


def default_seed_matrix() -> SeedMatrix:
    """First two rows of the 4x4 Walsh-Hadamard matrix, scaled by ``1/sqrt(2)``."""
    return SeedMatrix(hadamard(4)[:2] / math.sqrt(2.0))


def lwt_level(c: int, d: int) -> int:
    """Smallest ``l >= 1`` with ``c^l >= d``."""
    level, size = 1, c
    while size < d:
        level, size = level + 1, size * c
    return level


def _lwt(A: np.ndarray, level: int, X: np.ndarray) -> np.ndarray:
    # A_l = A_1 kron A_{l-1}: apply A_{l-1} to each of the c stripes, then A_1 across them
    if level == 1:
        return X @ A.T
    r, c = A.shape
    n = X.shape[0]
    inner = _lwt(A, level - 1, X.reshape(n * c, -1)).reshape(n, c, -1)
    return np.einsum("rc,ncj->nrj", A, inner).reshape(n, -1)


def lwt_apply(seed: SeedMatrix, level: int, x) -> np.ndarray:
    """``A_l x`` for ``A_l`` the ``level``-fold Kronecker power of the seed, never materialised.

    Accepts a vector of length ``c^l`` or a batch of them as rows.
    """
    X = np.asarray(x, dtype=np.float64)
    if X.shape[-1] != seed.c**level:
        raise DimensionError(f"expected length {seed.c ** level}, got {X.shape[-1]}")
    if X.ndim == 1:
        return _lwt(seed.entries, level, X[None, :])[0]
    return _lwt(seed.entries, level, X)


@dataclass(frozen=True, repr=False, eq=False)
class LWTJL(Transform):
    """``G A_l diag(signs) x``; input zero-padded to ``c^l``, ``G`` an inner JL map on ``r^l`` dims."""

    params: JlParams
    seed_matrix: SeedMatrix
    level: int
    signs: np.ndarray
    inner: Transform
    kind: str = "lwtjl"

    def stages(self, x):
        """Intermediate results ``(D x, A_l D x, G A_l D x)`` of the pipeline."""
        x = as_vector(x, self.d)
        dx = _pad(x, self.signs.size) * self.signs
        ax = lwt_apply(self.seed_matrix, self.level, dx)
        return dx, ax, self.inner.apply(ax)

    def _embed(self, X):
        A = lwt_apply(self.seed_matrix, self.level, _pad(X, self.signs.size) * self.signs)
        return self.inner.embed(A)

    def _apply(self, x):
        return self.stages(x)[2]


def lwtjl_new(
    p: JlParams, seed_mat: SeedMatrix | None = None, inner: str = "rademacher"
) -> LWTJL:
    """``inner`` names the map ``G``: ``"rademacher"`` (default), ``"gaussian"`` or ``"identity"``."""
    from .transforms import make_transform

    seed_mat = seed_mat or default_seed_matrix()
    level = lwt_level(seed_mat.c, p.d)
    width = seed_mat.r**level
    if p.m > width:
        raise ParameterError(f"m={p.m} exceeds the lean Walsh output dimension r^l={width}")
    signs = _rademacher(rng_for(p.seed), seed_mat.c**level)
    g_params = JlParams(width, p.m, p.eps, p.delta, derive_seed(p.seed, 1))
    return LWTJL(p, seed_mat, level, signs, make_transform(inner, g_params))


def lwt_hard_instance(seed_mat: SeedMatrix, delta: float, dim: int | None = None) -> np.ndarray:
    """Vector that every ``A_l`` annihilates whenever the random signs fix it.

    ``k = floor(lg(1/delta)/c - 1)`` copies of a null vector ``z`` of the seed
    (first row of the reduced row echelon basis of its null space, scaled to
    ``||z||_inf = 1``) followed by zeros up to ``dim`` (default: the smallest
    power ``c^l >= c k``).
    """
    c = seed_mat.c
    k = math.floor(math.log2(1.0 / delta) / c - 1.0)
    if k < 1:
        raise ParameterError(f"delta={delta} too large: k={k} copies < 1")
    z = _rref(scipy.linalg.null_space(seed_mat.entries).T)[0]
    z[np.abs(z) < 1e-12] = 0.0
    z /= np.max(np.abs(z))
    z = np.round(z, 12)  # strip solver noise so integer patterns are exact
    dim = c ** lwt_level(c, c * k) if dim is None else dim
    if dim < c * k:
        raise ParameterError(f"dimension {dim} cannot hold {k} copies of length {c}")
    x = np.zeros(dim)
    x[: c * k] = np.tile(z, k)
    return x


def _rref(M: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    M = np.array(M, dtype=np.float64)
    rows, cols = M.shape
    lead = 0
    for col in range(cols):
        if lead >= rows:
            break
        piv = lead + int(np.argmax(np.abs(M[lead:, col])))
        if abs(M[piv, col]) < tol:
            continue
        M[[lead, piv]] = M[[piv, lead]]
        M[lead] /= M[lead, col]
        for r in range(rows):
            if r != lead:
                M[r] -= M[r, col] * M[lead]
        lead += 1
    return M


# ---------------------------------------------------------------- Kac walks

ANGLE_MODES = ("continuous", "four-angle", "single-angle")


@numba.njit(cache=True)
def _kac_kernel(X, ii, jj, cos, sin):
    for n in range(X.shape[0]):
        for t in range(ii.shape[0]):
            a = X[n, ii[t]]
            b = X[n, jj[t]]
            X[n, ii[t]] = a * cos[t] - b * sin[t]
            X[n, jj[t]] = a * sin[t] + b * cos[t]


@dataclass(frozen=True, eq=False)
class KacWalk:
    """A product of plane rotations; step ``t`` rotates coordinates ``(i[t], j[t])`` by ``theta[t]``.

    In single-angle mode a Rademacher diagonal ``sign_diag`` is applied first.
    """

    dim: int
    i: np.ndarray
    j: np.ndarray
    theta: np.ndarray
    cos: np.ndarray
    sin: np.ndarray
    angle_mode: str = "continuous"
    sign_diag: np.ndarray | None = None

    @property
    def steps(self) -> int:
        return int(self.i.size)

    def apply(self, x) -> np.ndarray:
        X = np.array(x, dtype=np.float64, ndmin=2)
        if X.shape[-1] != self.dim:
            raise DimensionError(f"expected dimension {self.dim}, got {X.shape[-1]}")
        if self.sign_diag is not None:
            X *= self.sign_diag
        X = np.ascontiguousarray(X)
        _kac_kernel(X, self.i, self.j, self.cos, self.sin)
        return X[0] if np.ndim(x) == 1 else X

    def matrix(self) -> np.ndarray:
        return self.apply(np.eye(self.dim)).T


def kac_walk_new(n: int, T: int, seed: int, mode: str = "continuous") -> KacWalk:
    """``T`` i.i.d. steps: a uniform pair ``i < j`` and an angle drawn per ``mode``.

    ``continuous``: uniform on ``[0, 2pi)``; ``four-angle``: uniform on
    ``{pi/4, 3pi/4, 5pi/4, 7pi/4}``; ``single-angle``: always ``pi/4`` plus a
    random sign diagonal.  The discrete modes set cos/sin to ``+-sqrt(1/2)``
    directly.
    """
    if n < 2:
        raise ParameterError(f"Kac walks need dimension >= 2, got {n}")
    if T < 0:
        raise ParameterError(f"walk length must be >= 0, got {T}")
    if mode not in ANGLE_MODES:
        raise ParameterError(f"unknown angle mode {mode!r}")
    rng = rng_for(seed)
    a = rng.integers(0, n, size=T)
    b = rng.integers(0, n - 1, size=T)
    b = b + (b >= a)
    i, j = np.minimum(a, b), np.maximum(a, b)
    sign_diag = None
    half = math.sqrt(0.5)
    if mode == "continuous":
        theta = rng.uniform(0.0, 2.0 * math.pi, size=T)
        cos, sin = np.cos(theta), np.sin(theta)
    elif mode == "four-angle":
        q = rng.integers(0, 4, size=T)
        theta = (2 * q + 1) * (math.pi / 4)
        cos = np.where((q == 0) | (q == 3), half, -half)
        sin = np.where(q < 2, half, -half)
    else:
        theta = np.full(T, math.pi / 4)
        cos = np.full(T, half)
        sin = np.full(T, half)
        sign_diag = _rademacher(rng, n)
    return KacWalk(n, i, j, theta, cos, sin, mode, sign_diag)


@dataclass(frozen=True)
class KacSizes:
    padded_dim: int
    T1: int
    mid_dim: int
    T2: int


def kacjl_sizes(
    p: JlParams,
    n_points: int,
    c1: float = 1.0,
    c2: float = 1.0,
    c3: float = 1.0,
    mode: str = "continuous",
) -> KacSizes:
    """Walk lengths and intermediate dimension.

    ``D = max(d, m)`` (source zero-padded when oversampling), ``T1 =
    ceil(c1 D ln D)``, ``d' = ceil(c3 eps^-2 ln n (ln ln max(n, 3))^2 (ln D)^3)``
    clamped to ``[m, D]``, ``T2 = ceil(c2 d' ln n)``.  Discrete angle modes
    lengthen ``T1`` by ``ln ln D`` and ``T2`` by ``ln D``.
    """
    D = max(p.d, p.m)
    lnD = math.log(D)
    ln_n = math.log(max(n_points, 2))
    T1 = c1 * D * lnD
    mid = c3 / p.eps**2 * ln_n * math.log(math.log(max(n_points, 3))) ** 2 * lnD**3
    mid = min(D, max(p.m, math.ceil(mid)))
    T2 = c2 * mid * ln_n
    if mode != "continuous":
        T1 *= max(1.0, math.log(max(lnD, 1.0)))
        T2 *= max(1.0, lnD)
    return KacSizes(D, math.ceil(T1), mid, math.ceil(T2))


@dataclass(frozen=True, repr=False, eq=False)
class KacJL(Transform):
    """``sqrt(D/m) S2 K2 S1 K1 x``; ``S1``, ``S2`` keep coordinates ``keep1``, ``keep2``.

    ``keep1``/``keep2`` are prefixes except in single-angle mode, where they
    are uniformly random subsets.  With ``first_phase_only`` the output is
    ``sqrt(D/d') S1 K1 x`` and ``m = d'``.
    """

    params: JlParams
    walk1: KacWalk
    keep1: np.ndarray
    walk2: KacWalk | None
    keep2: np.ndarray | None
    kind: str = "kacjl"
    sizes: KacSizes | None = field(default=None)

    def _embed(self, X):
        Y = self.walk1.apply(_pad(X, self.walk1.dim))[:, self.keep1]
        if self.walk2 is not None:
            Y = self.walk2.apply(Y)[:, self.keep2]
        return Y * math.sqrt(self.walk1.dim / self.m)

    def _apply(self, x):
        return self._embed(x[None, :])[0]


def kacjl_new(
    p: JlParams,
    n_points: int | None = None,
    consts: tuple[float, float, float] = (1.0, 1.0, 1.0),
    mode: str = "continuous",
    first_phase_only: bool = False,
) -> KacJL:
    """Two Kac walks with projections in between.

    ``n_points`` defaults to ``ceil(delta^-1/2)``, the point-set size whose
    pairwise union bound matches ``delta``.
    """
    if p.d < 2:
        raise ParameterError("KacJL needs d >= 2")
    if n_points is None:
        n_points = math.ceil(p.delta**-0.5)
    c1, c2, c3 = consts
    sizes = kacjl_sizes(p, n_points, c1, c2, c3, mode)
    D, mid = sizes.padded_dim, sizes.mid_dim
    walk1 = kac_walk_new(D, sizes.T1, derive_seed(p.seed, 0), mode)
    rng = rng_for(derive_seed(p.seed, 2))
    random_keep = mode == "single-angle"
    keep1 = np.sort(rng.choice(D, mid, replace=False)) if random_keep else np.arange(mid)
    if first_phase_only:
        return KacJL(p.with_m(mid), walk1, keep1, None, None, sizes=sizes)
    walk2 = kac_walk_new(mid, sizes.T2, derive_seed(p.seed, 1), mode) if mid >= 2 else None
    keep2 = np.sort(rng.choice(mid, p.m, replace=False)) if random_keep else np.arange(p.m)
    if walk2 is None:
        keep1 = keep1[keep2]
    return KacJL(p, walk1, keep1, walk2, None if walk2 is None else keep2, sizes=sizes)


def structured_apply(t: Transform, x) -> np.ndarray:
    return t.apply(x)
