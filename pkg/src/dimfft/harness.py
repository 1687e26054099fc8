"""End-to-end runners: execute one algorithm against one generated instance,
diff the result against the dense reference, and aggregate grids of runs."""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import SparseSpectrum, dft
from .estimate import estimate
from .recover import RecoveryConfig, sparse_fft_random_phase, sparse_fft_worst_case
from .randsupport import RandomSupportConfig, sparse_fft_random_support
from .signals import SignalSpec, generate

__all__ = ["RunReport", "run", "sweep", "ALGORITHMS", "spectrum_l2_error", "fit_loglog_slope"]

ALGORITHMS = ("estimate", "worst", "random-phase", "random-support", "dense-fft-baseline")

SUCCESS_RTOL = 1e-6

_MODEL_ALGORITHM = {
    "worst-case": "worst",
    "hamming-ball": "worst",
    "random-phase": "random-phase",
    "random-support": "random-support",
}


@dataclass
class RunReport:
    spec: dict
    algorithm: str
    success: bool
    l2_error: float
    ref_l2: float
    samples_read: int
    distinct_points_read: int
    wall_time_ms: float
    iterations: int
    realized_sparsity: int
    flags: list = field(default_factory=list)
    schema: int = 1

    def to_json(self) -> dict:
        return {
            "schema": self.schema,
            "spec": self.spec,
            "algorithm": self.algorithm,
            "success": self.success,
            "l2_error": self.l2_error,
            "ref_l2": self.ref_l2,
            "samples_read": self.samples_read,
            "distinct_points_read": self.distinct_points_read,
            "wall_time_ms": self.wall_time_ms,
            "iterations": self.iterations,
            "realized_sparsity": self.realized_sparsity,
            "flags": self.flags,
        }

    def csv_row(self) -> dict:
        row = {k: self.spec[k] for k in ("model", "n", "d", "k", "seed")}
        row.update(
            algorithm=self.algorithm,
            success=int(self.success),
            l2_error=self.l2_error,
            samples_read=self.samples_read,
            distinct_points_read=self.distinct_points_read,
            wall_time_ms=self.wall_time_ms,
            iterations=self.iterations,
            realized_sparsity=self.realized_sparsity,
        )
        return row


CSV_FIELDS = [
    "model",
    "n",
    "d",
    "k",
    "seed",
    "algorithm",
    "success",
    "l2_error",
    "samples_read",
    "distinct_points_read",
    "wall_time_ms",
    "iterations",
    "realized_sparsity",
]


def spectrum_l2_error(ref: SparseSpectrum, got: SparseSpectrum) -> float:
    keys = set(ref.entries) | set(got.entries)
    return math.sqrt(sum(abs(ref[f] - got[f]) ** 2 for f in keys))


def run(spec: SignalSpec, algorithm: str, config=None, seed=None) -> RunReport:
    """Generate the instance, run the algorithm, and diff against the
    reference spectrum. The run seed defaults to the spec seed."""
    if algorithm not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {algorithm!r}")
    oracle, ref = generate(spec)
    seed = spec.seed if seed is None else seed
    t0 = time.perf_counter()
    iterations = 0

    if algorithm == "estimate":
        support = sorted(ref.entries)
        if not support:
            support = [(0,) * spec.d]
        rep = estimate(oracle, support)
        out, iterations = rep.spectrum, rep.iterations
    elif algorithm == "worst":
        cfg = config if isinstance(config, RecoveryConfig) else RecoveryConfig()
        rep = sparse_fft_worst_case(oracle, max(spec.k, 1), cfg, seed=seed)
        out, iterations = rep.spectrum, rep.iterations
    elif algorithm == "random-phase":
        cfg = config if isinstance(config, RecoveryConfig) else RecoveryConfig()
        rep = sparse_fft_random_phase(oracle, max(spec.k, 1), cfg, seed=seed)
        out, iterations = rep.spectrum, rep.iterations
    elif algorithm == "random-support":
        cfg = config if isinstance(config, RandomSupportConfig) else RandomSupportConfig()
        k_eff = max(1, 1 << (max(spec.k, 1) - 1).bit_length())  # power of two bound
        rep = sparse_fft_random_support(oracle, k_eff, cfg, seed=seed)
        out, iterations = rep.spectrum, rep.iterations
    else:  # dense-fft-baseline
        dims = spec.dims
        dense = oracle.read_flat(np.arange(dims.N, dtype=np.int64))
        X = dft(dense, dims)
        tol = 1e-9 * max(1.0, float(np.abs(X).max(initial=0.0)))
        out = SparseSpectrum.from_dense(X, dims, tol=tol)
        iterations = 1

    wall = (time.perf_counter() - t0) * 1e3
    err = spectrum_l2_error(ref, out)
    flags = []
    expected = _MODEL_ALGORITHM.get(spec.model)
    if algorithm not in ("estimate", "dense-fft-baseline") and algorithm != expected:
        flags.append(f"algorithm {algorithm} run on {spec.model} instance")
    return RunReport(
        spec=spec.to_json(),
        algorithm=algorithm,
        success=err <= SUCCESS_RTOL * ref.l2(),
        l2_error=err,
        ref_l2=ref.l2(),
        samples_read=oracle.samples_read,
        distinct_points_read=oracle.distinct_points_read,
        wall_time_ms=wall,
        iterations=iterations,
        realized_sparsity=len(ref),
        flags=flags,
    )


def _run_point(args) -> dict:
    spec_dict, algorithm = args
    return run(SignalSpec(**spec_dict), algorithm).csv_row()


def fit_loglog_slope(ks, samples) -> float:
    """Least-squares slope of log(samples) against log(k)."""
    ks = np.asarray(ks, dtype=float)
    samples = np.asarray(samples, dtype=float)
    keep = (ks > 0) & (samples > 0)
    if keep.sum() < 2 or len(set(ks[keep])) < 2:
        return float("nan")
    return float(np.polyfit(np.log(ks[keep]), np.log(samples[keep]), 1)[0])


@dataclass
class SweepResult:
    rows: list
    summary: dict
    csv_path: Path | None = None
    summary_path: Path | None = None
    figure_paths: list = field(default_factory=list)

    @property
    def all_success(self) -> bool:
        return all(r["success"] for r in self.rows)


def sweep(
    models,
    ns,
    ds,
    ks,
    seeds,
    out_dir=None,
    workers: int = 1,
    figures: bool = True,
    algorithm=None,
) -> SweepResult:
    """Cartesian grid of runs, merged in grid order, with success-rate and
    sample-scaling aggregates. Writes CSV, a JSON summary, and (by default)
    figures next to them when an output directory is given."""
    grid = []
    for model in models:
        for n in ns:
            for d in ds:
                for k in ks:
                    for seed in seeds:
                        spec = dict(model=model, n=n, d=d, k=k, seed=seed)
                        if k > n**d or (model == "hamming-ball" and d != 1):
                            continue
                        try:
                            SignalSpec(**spec)
                        except ValueError:
                            continue
                        grid.append((spec, algorithm or _MODEL_ALGORITHM[model]))

    if workers > 1 and len(grid) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_run_point, grid))
    else:
        rows = [_run_point(g) for g in grid]

    summary: dict = {"schema": 1, "runs": len(rows), "models": {}}
    for model in models:
        mrows = [r for r in rows if r["model"] == model]
        if not mrows:
            continue
        slope = fit_loglog_slope([r["k"] for r in mrows], [r["samples_read"] for r in mrows])
        summary["models"][model] = {
            "runs": len(mrows),
            "success_rate": sum(r["success"] for r in mrows) / len(mrows),
            "samples_vs_k_slope": slope,
        }

    result = SweepResult(rows=rows, summary=summary)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        result.csv_path = out / "sweep.csv"
        with open(result.csv_path, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_FIELDS)
            writer.writeheader()
            writer.writerows(rows)
        result.summary_path = out / "summary.json"
        result.summary_path.write_text(json.dumps(summary, indent=2))
        if figures:
            from .plotting import save_sweep_figures

            result.figure_paths = save_sweep_figures(rows, out)
    return result
