"""Near-linear recovery for Bernoulli-support signals.

The pipeline maintains three bucketings (coarse base, previous, next). Each
round reads the signal on a decimated grid, FFTs it to get base-bucket values,
subtracts the already-recovered spectrum, and solves a small well-conditioned
least-squares system per base bucket to refine the list of nonempty buckets
from the previous resolution to the next one. Buckets that pass a one-sparse
test are decoded and peeled; colliding buckets survive into the next round at
double the resolution.
"""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass

import numpy as np

from .core import Dims, SignalOracle, SparseSpectrum, flatten_many
from .recover import RecoveryReport

__all__ = [
    "RandomSupportConfig",
    "SingularSystemError",
    "make_bucket",
    "bucket_value",
    "least_squares_solve",
    "hashing",
    "test_buckets",
    "sparse_fft_random_support",
    "bernoulli_collision_stats",
]


@dataclass(frozen=True)
class RandomSupportConfig:
    gamma: int = 2
    c_hash: float = 2.0
    c_test: float = 0.02
    eps_zero: float = 1e-12

    def __post_init__(self):
        if self.gamma < 2:
            raise ValueError("refinement factor must be at least 2")

    def to_json(self) -> dict:
        return asdict(self)


class SingularSystemError(np.linalg.LinAlgError):
    def __init__(self, message, bucket=None):
        super().__init__(message)
        self.bucket = bucket


def _is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


def make_bucket(b: int, dims: Dims) -> tuple[int, ...]:
    """Bucket vector of total size b: fill whole coordinates with n first,
    then one partial power of two, then ones."""
    b = int(b)
    if not _is_pow2(b) or b > dims.N:
        raise ValueError(f"bucket count must be a power of two in [1, {dims.N}], got {b}")
    lb, ln = b.bit_length() - 1, dims.log2_n
    p = lb // ln
    if p >= dims.d:
        return (dims.n,) * dims.d
    rest = [1 << (lb - p * ln)] + [1] * (dims.d - p - 1)
    return (dims.n,) * p + tuple(rest)


def bucket_size(B) -> int:
    return int(np.prod(np.asarray(B, dtype=np.int64)))


def _bucket_grid(B) -> np.ndarray:
    """All indices of [B] as a (|B|, d) array, coordinate 1 fastest."""
    B = tuple(int(x) for x in B)
    idx = np.arange(bucket_size(B), dtype=np.int64)
    out = np.empty((idx.size, len(B)), dtype=np.int64)
    for q, bq in enumerate(B):
        out[:, q] = idx % bq
        idx = idx // bq
    return out


def _bucket_flat(pts: np.ndarray, B) -> np.ndarray:
    """Flatten [B] indices with coordinate 1 fastest (mirrors core flattening)."""
    B = np.asarray(B, dtype=np.int64)
    pts = np.asarray(pts, dtype=np.int64) % B
    strides = np.concatenate([[1], np.cumprod(B[:-1])])
    return pts @ strides


def bucket_value(spectrum: SparseSpectrum, B, b, a) -> complex:
    """Brute-force bucketing oracle: sum of xhat over the congruence class of
    b modulo B, weighted by the time-shift phase e^{2*pi*i f.a/n}."""
    dims = spectrum.dims
    B = tuple(int(x) for x in B)
    b = tuple(int(x) for x in b)
    if len(b) != dims.d or any(c < 0 or c >= Bq for c, Bq in zip(b, B)):
        raise ValueError(f"bucket index {b} invalid under {B}")
    a = np.asarray(a, dtype=np.int64)
    total = 0j
    for f, v in spectrum.items():
        if all(fq % Bq == bq for fq, Bq, bq in zip(f, B, b)):
            phase = int(np.dot(f, a)) % dims.n
            total += v * np.exp(2j * np.pi * phase / dims.n)
    return total


def least_squares_solve(A: np.ndarray, w: np.ndarray, bucket=None) -> np.ndarray:
    """Minimum-norm least squares with a rank check; complex systems use the
    Hermitian adjoint internally (SVD), not the literal transpose."""
    A = np.asarray(A, dtype=np.complex128)
    w = np.asarray(w, dtype=np.complex128)
    sol, _, rank, _ = np.linalg.lstsq(A, w, rcond=None)
    if rank < A.shape[1]:
        raise SingularSystemError(
            f"rank-deficient least-squares system ({rank} < {A.shape[1]})", bucket=bucket
        )
    return sol


def _shift_phases(F: np.ndarray, shifts: np.ndarray, dims: Dims) -> np.ndarray:
    """e^{2*pi*i F.shift/n} for an (m, d) support and (s, d) shift array -> (m, s)."""
    return np.exp(2j * np.pi * ((F @ shifts.T) % dims.n) / dims.n)


def hashing(
    oracle: SignalOracle,
    chi: SparseSpectrum,
    B_base,
    B_prev,
    B_next,
    alpha,
    R,
    config: RandomSupportConfig = RandomSupportConfig(),
    seed=0,
    diagnostics: dict | None = None,
) -> dict[tuple[int, ...], complex]:
    """Refine the nonempty-bucket list R from the B_prev resolution to B_next.

    Returns W mapping every lift of R to the bucket value of the residual
    x - chi at shift alpha, computed by downsampled FFTs plus per-base-bucket
    least squares.
    """
    dims = oracle.dims
    B_base = tuple(int(x) for x in B_base)
    B_prev = tuple(int(x) for x in B_prev)
    B_next = tuple(int(x) for x in B_next)
    for q in range(dims.d):
        if B_prev[q] % B_base[q] or B_next[q] % B_prev[q] or dims.n % B_next[q]:
            raise ValueError("bucket vectors must refine coordinatewise and divide n")
    R = [tuple(int(x) for x in r) for r in R]
    if not R:
        return {}
    alpha = np.asarray(alpha, dtype=np.int64)

    # group R by base-bucket class
    groups: dict[int, list[tuple[int, ...]]] = {}
    for r in R:
        key = int(_bucket_flat(np.asarray(r)[None, :], B_base)[0])
        groups.setdefault(key, []).append(r)
    lift = bucket_size(B_next) // bucket_size(B_prev)
    m = lift * max(len(g) for g in groups.values())
    log_term = max(1.0, math.log2(m) ** 2 if m > 1 else 0.0)
    n_beta = math.ceil(config.c_hash * m * log_term * dims.d * dims.log2_n)

    rng = np.random.default_rng(seed)
    betas = rng.integers(0, np.asarray(B_next, dtype=np.int64), size=(n_beta, dims.d), dtype=np.int64)

    # decimated reads: t = g * (n / B_base) + alpha + beta * (n / B_next), entrywise
    base_grid = _bucket_grid(B_base)
    stride_base = np.array([dims.n // bq for bq in B_base], dtype=np.int64)
    stride_next = np.array([dims.n // bq for bq in B_next], dtype=np.int64)
    a_all = (alpha[None, :] + betas * stride_next[None, :]) % dims.n  # (s, d)
    pts = (base_grid[None, :, :] * stride_base[None, None, :] + a_all[:, None, :]) % dims.n
    vals = oracle.read_flat(flatten_many(pts.reshape(-1, dims.d), dims))
    Z = (dims.N / bucket_size(B_base)) * vals.reshape(n_beta, bucket_size(B_base))

    # FFT over the base grid gives base-bucket values of x at each shift
    shape = tuple(reversed(B_base))
    Zhat = np.fft.fftn(Z.reshape((n_beta,) + shape), axes=range(1, dims.d + 1))
    Zhat = Zhat.reshape(n_beta, bucket_size(B_base))

    # subtract the contribution of the recovered spectrum chi
    if len(chi):
        F = chi.support_array()
        weights = chi.values_array()[:, None] * _shift_phases(F, a_all, dims)  # (mchi, s)
        classes = _bucket_flat(F, B_base)
        acc = np.zeros((bucket_size(B_base), n_beta), dtype=np.complex128)
        np.add.at(acc, classes, weights)
        Zhat = Zhat - acc.T

    W: dict[tuple[int, ...], complex] = {}
    lift_grid = _bucket_grid([B_next[q] // B_prev[q] for q in range(dims.d)])
    Bprev_arr = np.asarray(B_prev, dtype=np.int64)
    inv_next = 1.0 / np.asarray(B_next, dtype=np.float64)
    for key in sorted(groups):
        phis = []
        for r in groups[key]:
            phis.append(np.asarray(r, dtype=np.int64)[None, :] + lift_grid * Bprev_arr[None, :])
        phis = np.concatenate(phis, axis=0)  # (cols, d) indices in [B_next]
        A = np.exp(2j * np.pi * ((betas * inv_next[None, :]) @ phis.T))
        w = Zhat[:, key]
        if diagnostics is not None:
            sv = np.linalg.svd(A, compute_uv=False)
            diagnostics.setdefault("cond", []).append(float((sv[0] / sv[-1]) ** 2))
        sol = least_squares_solve(A, w, bucket=key)
        for phi, value in zip(phis, sol):
            W[tuple(int(c) for c in phi)] = complex(value)
    return W


def test_buckets(
    W_by_shift: dict,
    a_shifts,
    B,
    dims: Dims,
    config: RandomSupportConfig = RandomSupportConfig(),
) -> tuple[SparseSpectrum, list[tuple[int, ...]]]:
    """Zero-test and one-sparse-test every bucket; decode singletons.

    Returns the decoded spectrum and the list of still-colliding bucket
    indices. Requires the zero shift and every basis shift e_q in the map.
    """
    zero = (0,) * dims.d
    basis = [tuple(int(q == j) for j in range(dims.d)) for q in range(dims.d)]
    for req in [zero, *basis]:
        if req not in W_by_shift:
            raise ValueError(f"bucket value list missing required shift {req}")
    a_shifts = [tuple(int(c) for c in a) for a in a_shifts]
    buckets = sorted(W_by_shift[zero])
    n_shifts = max(len(a_shifts), 1)

    # global energy scale across buckets, floored at unit scale
    all_e = [abs(W_by_shift[a][b]) ** 2 for a in a_shifts for b in buckets]
    scale = max(1.0, float(np.mean(all_e)) if all_e else 0.0)

    chi = SparseSpectrum(dims)
    collisions: list[tuple[int, ...]] = []
    for b in buckets:
        energy = sum(abs(W_by_shift[a][b]) ** 2 for a in a_shifts)
        if energy <= config.eps_zero * n_shifts * scale:
            continue  # empty bucket
        w0 = W_by_shift[zero][b]
        if abs(w0) ** 2 <= config.eps_zero * scale:
            collisions.append(b)  # cancellation at shift zero: not a singleton
            continue
        f = tuple(
            int(round(dims.n / (2 * np.pi) * np.angle(W_by_shift[eq][b] / w0))) % dims.n
            for eq in basis
        )
        fa = np.asarray(f, dtype=np.int64)
        resid = sum(
            abs(w0 * np.exp(2j * np.pi * (int(fa @ np.asarray(a)) % dims.n) / dims.n) - W_by_shift[a][b]) ** 2
            for a in a_shifts
        )
        bucket_scale = max(scale, energy / n_shifts)
        if resid <= config.eps_zero * n_shifts * bucket_scale:
            chi[f] = w0
        else:
            collisions.append(b)
    return chi, collisions


test_buckets.__test__ = False  # not a pytest case despite the name


def _pow2_floor(x: float) -> int:
    return 1 << max(0, math.floor(math.log2(max(1.0, x))))


def sparse_fft_random_support(
    oracle: SignalOracle,
    k: int,
    config: RandomSupportConfig = RandomSupportConfig(),
    seed=0,
) -> RecoveryReport:
    """Outer loop: geometric refinement of the bucket resolution, keeping
    |B_base| * |B_next| of order k^2 while peeling decoded singletons."""
    if not _is_pow2(k):
        raise ValueError("sparsity must be a power of two")
    dims = oracle.dims
    t0 = time.perf_counter()
    s0, d0 = oracle.counters()
    gamma = config.gamma
    N = dims.N

    B_base = make_bucket(min(_pow2_floor(gamma * k), N), dims)
    B_prev = B_base
    B_next = make_bucket(min(_pow2_floor(gamma**2 * k), N), dims)
    chi = SparseSpectrum(dims)
    R = [tuple(int(c) for c in row) for row in _bucket_grid(B_prev)]
    L = math.ceil(math.log(k, gamma)) if k > 1 else 0

    seeds = np.random.SeedSequence(seed).spawn(L + 1)
    n_a = math.ceil(config.c_test * dims.log2_N**2 * max(1.0, math.log2(dims.log2_N)) ** 2)
    iterations = 0
    for t in range(L + 1):
        if not R:
            break
        rng = np.random.default_rng(seeds[t])
        a_draw = rng.integers(0, dims.n, size=(n_a, dims.d), dtype=np.int64)
        a_shifts = sorted({tuple(int(c) for c in row) for row in a_draw})
        basis = [tuple(int(q == j) for j in range(dims.d)) for q in range(dims.d)]
        shifts_all = [(0,) * dims.d] + basis + a_shifts
        call_seeds = seeds[t].spawn(len(shifts_all))
        W_by_shift = {}
        for shift, cs in zip(shifts_all, call_seeds):
            W_by_shift[shift] = hashing(
                oracle, chi, B_base, B_prev, B_next, np.asarray(shift), R, config, seed=cs
            )
        chi_new, R = test_buckets(W_by_shift, a_shifts, B_next, dims, config)
        for f, v in chi_new.items():
            chi.add(f, v)
        iterations += 1
        B_prev = B_next
        B_base = make_bucket(min(_pow2_floor(k / gamma**t), N), dims)
        B_next = make_bucket(min(_pow2_floor(gamma ** (t + 3) * k), N), dims)

    s1, d1 = oracle.counters()
    return RecoveryReport(
        spectrum=chi,
        samples_used=s1 - s0,
        distinct_points_used=d1 - d0,
        zero_tests_run=0,
        iterations=iterations,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
        success=not R,
        residual_energy=float("nan"),
    )


@dataclass
class CollisionStats:
    rows: list  # (trial, collisions, max_per_coarse)
    mean_collisions: float
    std_collisions: float
    bound: float
    B: tuple
    B_coarse: tuple

    def to_csv_rows(self):
        return [("trial", "collisions", "max_per_coarse_bucket")] + [
            (t, c, m) for t, c, m in self.rows
        ]


def bernoulli_collision_stats(
    dims: Dims, k: int, B, trials: int, seed=0, B_coarse=None
) -> CollisionStats:
    """Monte-Carlo statistics of colliding congruence classes under the
    Bernoulli support model: per trial, the number of B-classes holding two
    or more support elements, and the maximum count of such classes within
    one coarse class."""
    if trials < 1:
        raise ValueError("trials must be positive")
    B = tuple(int(x) for x in B)
    if any(dims.n % bq for bq in B):
        raise ValueError("bucket vector entries must divide n")
    if B_coarse is None:
        target = max(1, (k * k) // bucket_size(B))
        target = 1 << (target - 1).bit_length()  # round up to a power of two
        B_coarse = make_bucket(min(target, bucket_size(B), dims.N), dims)
    B_coarse = tuple(int(x) for x in B_coarse)
    if any(bq % cq for bq, cq in zip(B, B_coarse)):
        raise ValueError("coarse bucketing must divide the fine one coordinatewise")
    rng = np.random.default_rng(seed)
    p = k / dims.N

    # precompute class maps for all N points
    from .core import unflatten_many

    all_pts = unflatten_many(np.arange(dims.N, dtype=np.int64), dims)
    fine = _bucket_flat(all_pts, B)
    fine_grid = _bucket_grid(B)
    coarse_of_fine = _bucket_flat(fine_grid, B_coarse)

    rows = []
    for t in range(trials):
        mask = rng.random(dims.N) < p
        counts = np.bincount(fine[mask], minlength=bucket_size(B))
        colliding = counts >= 2
        n_coll = int(colliding.sum())
        if n_coll:
            per_coarse = np.bincount(coarse_of_fine[colliding], minlength=bucket_size(B_coarse))
            max_pc = int(per_coarse.max())
        else:
            max_pc = 0
        rows.append((t, n_coll, max_pc))
    cols = np.array([r[1] for r in rows], dtype=float)
    return CollisionStats(
        rows=rows,
        mean_collisions=float(cols.mean()),
        std_collisions=float(cols.std(ddof=1)) if trials > 1 else 0.0,
        bound=k * k / bucket_size(B),
        B=B,
        B_coarse=B_coarse,
    )
