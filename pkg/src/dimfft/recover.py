"""Sparse recovery without known support.

The worst-case algorithm explores the splitting tree from the root: at each
step it expands the minimum-weight leaf, zero-tests both candidate children
against a fixed multiset of time-domain probes, keeps the nonzero ones, and
peels a frequency exactly once a leaf reaches full depth. The probe set is
sized for a restricted isometry of the sparsity order in the worst case, or
polylogarithmically when the signal has random phases.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from .core import Dims, SignalOracle, SparseSpectrum, flatten_many, unflatten
from .filters import build_isolating_filter
from .tree import SplittingTree, min_weight_leaf, remove_leaf

__all__ = [
    "RecoveryConfig",
    "SampleSet",
    "RecoveryReport",
    "make_sample_set",
    "zero_test",
    "sparse_fft_worst_case",
    "sparse_fft_random_phase",
]


@dataclass(frozen=True)
class RecoveryConfig:
    """Tunable constants behind the probe-set sizes and the zero threshold."""

    c_rip: float = 2.0
    c_phase: float = 2.0
    eps_zero: float = 1e-12
    trace: bool = False

    def to_json(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class SampleSet:
    """Multiset of time-domain probe locations."""

    kind: str  # "rip" | "uniform-phase"
    points: np.ndarray  # (m, d) int64
    flat: np.ndarray  # (m,) flattened indices

    @property
    def size(self) -> int:
        return len(self.flat)


def rip_sample_count(k: int, dims: Dims, c_rip: float) -> int:
    log2k = math.log2(k) if k > 1 else 0.0
    return math.ceil(c_rip * max(1.0, k * log2k**2) * dims.d * dims.log2_n)


def phase_sample_count(dims: Dims, c_phase: float) -> int:
    return math.ceil(c_phase * dims.d**3 * dims.log2_n**3)


def make_sample_set(kind: str, k: int, dims: Dims, seed, config: RecoveryConfig | None = None) -> SampleSet:
    """Draw the probe multiset: RIP-sized for worst-case sparsity k, or the
    polylogarithmic uniform set for random-phase signals. Deterministic under
    the seed; points are i.i.d. uniform over [n]^d either way."""
    if k < 1:
        raise ValueError("sparsity must be at least 1")
    cfg = config or RecoveryConfig()
    if kind == "rip":
        m = rip_sample_count(k, dims, cfg.c_rip)
    elif kind == "uniform-phase":
        m = phase_sample_count(dims, cfg.c_phase)
    else:
        raise ValueError(f"unknown sample set kind {kind!r}")
    return _draw_sample_set(kind, m, dims, seed)


def _draw_sample_set(kind: str, m: int, dims: Dims, seed) -> SampleSet:
    rng = np.random.default_rng(seed)
    pts = rng.integers(0, dims.n, size=(m, dims.d), dtype=np.int64)
    return SampleSet(kind=kind, points=pts, flat=flatten_many(pts, dims))


@dataclass
class RecoveryReport:
    spectrum: SparseSpectrum
    samples_used: int
    distinct_points_used: int
    zero_tests_run: int
    iterations: int
    wall_time_ms: float
    success: bool
    residual_energy: float
    trace: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "spectrum": self.spectrum.to_json(),
            "samples_used": self.samples_used,
            "distinct_points_used": self.distinct_points_used,
            "zero_tests_run": self.zero_tests_run,
            "iterations": self.iterations,
            "wall_time_ms": self.wall_time_ms,
            "success": self.success,
            "residual_energy": self.residual_energy,
        }


def _chi_through_filter(chi: SparseSpectrum, filt, sample_points: np.ndarray, dims: Dims) -> np.ndarray:
    """h_Delta = (1/N) sum_xi chihat(xi) Ghat(xi) e^{2*pi*i xi.Delta/n} for all probes."""
    m = sample_points.shape[0]
    if not len(chi):
        return np.zeros(m, dtype=np.complex128)
    xi = chi.support_array()
    weights = chi.values_array() * filt.frequency_many(xi)
    phases = np.exp(2j * np.pi * ((xi @ sample_points.T) % dims.n) / dims.n)
    return (weights @ phases) / dims.N


def zero_test(
    oracle: SignalOracle,
    chi: SparseSpectrum,
    tree: SplittingTree,
    v,
    samples: SampleSet,
    config: RecoveryConfig = RecoveryConfig(),
    energy_scale: float = 0.0,
) -> bool:
    """True iff the residual spectrum has mass inside v's frequency cone.

    Computes H_Delta = (x*G)(Delta) - (chi*G)(Delta) over the probe multiset
    and compares the mean squared magnitude against the zero threshold.
    """
    if v not in tree._leaves:
        raise ValueError("zero_test expects a leaf of the given tree")
    dims = oracle.dims
    filt = build_isolating_filter(tree, v)
    h = _chi_through_filter(chi, filt, samples.points, dims)
    H = filt.convolve_at(oracle, samples.points) - h
    mean_energy = float(np.mean(np.abs(H) ** 2)) if samples.size else 0.0
    return mean_energy > config.eps_zero * max(1.0, energy_scale)


def _peel_value(oracle, chi, tree, v) -> complex:
    """Exact residual value at a full-depth leaf, via the isolating filter."""
    dims = oracle.dims
    filt = build_isolating_filter(tree, v)
    h = 0j
    if len(chi):
        h = complex(chi.values_array() @ filt.frequency_many(chi.support_array()))
    conv0 = complex(filt.convolve_at(oracle, np.zeros((1, dims.d), dtype=np.int64))[0])
    return dims.N * conv0 - h


def _sparse_fft(oracle: SignalOracle, k: int, samples: SampleSet, config: RecoveryConfig) -> RecoveryReport:
    dims = oracle.dims
    t0 = time.perf_counter()
    s0, d0 = oracle.counters()

    # Raw signal energy on the probe set: used both for the zero threshold
    # scale (an estimate of ||xhat||^2 / N^2) and the final residual check.
    x_probe = oracle.read_flat(samples.flat)
    energy_scale = float(np.mean(np.abs(x_probe) ** 2)) if samples.size else 0.0

    tree = SplittingTree(dims)
    tree.make_root()
    chi = SparseSpectrum(dims)
    zero_tests = 0
    iterations = 0
    trace = []
    max_iterations = (1 + dims.log2_N) * max(k, 1) + 4

    while tree and iterations < max_iterations:
        v = min_weight_leaf(tree)
        if v.level == dims.log2_N:
            f = unflatten(v.label, dims)
            chi.add(f, _peel_value(oracle, chi, tree, v))
            remove_leaf(tree, v)
            event = ("peel", f)
        else:
            right = tree.add_child(v, "right")
            left = tree.add_child(v, "left")
            keep_right = zero_test(oracle, chi, tree, right, samples, config, energy_scale)
            keep_left = zero_test(oracle, chi, tree, left, samples, config, energy_scale)
            zero_tests += 2
            if not keep_left:
                tree.detach_child(v, left)
            if not keep_right:
                tree.detach_child(v, right)
            if not (keep_left or keep_right):
                # the whole cone tested empty: drop the leaf and its chain
                remove_leaf(tree, v)
            event = ("expand", (v.label, v.level), keep_right, keep_left)
        iterations += 1
        if config.trace:
            trace.append(
                {
                    "event": event,
                    "chi": dict(chi.items()),
                    "leaf_levels": [u.level for u in tree.leaves()],
                }
            )

    chi.drop_small(config.eps_zero)

    # A posteriori failure detection: residual energy on the fixed probe set.
    if len(chi):
        xi = chi.support_array()
        phases = np.exp(2j * np.pi * ((xi @ samples.points.T) % dims.n) / dims.n)
        chi_probe = (chi.values_array() @ phases) / dims.N
    else:
        chi_probe = np.zeros_like(x_probe)
    residual_energy = float(np.mean(np.abs(x_probe - chi_probe) ** 2))
    success = bool(tree.root is None) and residual_energy <= config.eps_zero * max(1.0, energy_scale)

    s1, d1 = oracle.counters()
    return RecoveryReport(
        spectrum=chi,
        samples_used=s1 - s0,
        distinct_points_used=d1 - d0,
        zero_tests_run=zero_tests,
        iterations=iterations,
        wall_time_ms=(time.perf_counter() - t0) * 1e3,
        success=success,
        residual_energy=residual_energy,
        trace=trace,
    )


def sparse_fft_worst_case(
    oracle: SignalOracle, k: int, config: RecoveryConfig = RecoveryConfig(), seed=0
) -> RecoveryReport:
    """Exact recovery of any signal with at most k nonzero frequencies,
    using a RIP-sized probe set."""
    dims = oracle.dims
    m = rip_sample_count(k, dims, config.c_rip)
    samples = _draw_sample_set("rip", m, dims, seed)
    return _sparse_fft(oracle, k, samples, config)


def sparse_fft_random_phase(
    oracle: SignalOracle, k: int, config: RecoveryConfig = RecoveryConfig(), seed=0
) -> RecoveryReport:
    """Same control flow with the polylogarithmic uniform probe set; sound
    when nonzero values carry independent uniform phases."""
    dims = oracle.dims
    m = phase_sample_count(dims, config.c_phase)
    samples = _draw_sample_set("uniform-phase", m, dims, seed)
    return _sparse_fft(oracle, k, samples, config)
