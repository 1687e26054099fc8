"""Command-line interface.

Subcommands: estimate, recover, prune-sim, bernoulli-stats, sweep, selftest.
The environment variable DIMFFT_SEED supplies the seed when --seed is not
given. The exit code is 0 iff every run succeeded.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

from .core import Dims, SignalOracle, read_signal
from .estimate import estimate
from .harness import run, sweep
from .pruning import verify_lower_bound
from .randsupport import (
    RandomSupportConfig,
    bernoulli_collision_stats,
    make_bucket,
    sparse_fft_random_support,
)
from .recover import RecoveryConfig, sparse_fft_random_phase, sparse_fft_worst_case
from .signals import SignalSpec, generate

PRUNE_FIELDS = ["log_n", "c", "tau", "leaves", "rounds", "bound", "holds"]


def _default_seed(args) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    return int(os.environ.get("DIMFFT_SEED", "0"))


def _emit(text: str, out_path) -> None:
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _load_support(path, dims: Dims):
    obj = json.loads(Path(path).read_text())
    if isinstance(obj, dict) and "entries" in obj:
        freqs = [tuple(e["f"]) for e in obj["entries"]]
    elif isinstance(obj, dict) and "support" in obj:
        freqs = [tuple(f) for f in obj["support"]]
    elif isinstance(obj, list):
        freqs = [tuple(f) if isinstance(f, list) else (int(f),) for f in obj]
    else:
        raise ValueError("support JSON must be a list or carry 'support'/'entries'")
    return [dims.validate_freq(f) for f in freqs]


def _oracle_from_file(path, n, d) -> SignalOracle:
    x, dims = read_signal(path)
    if n is not None and n != dims.n or d is not None and d != dims.d:
        raise ValueError(
            f"--n/--d disagree with the signal header (n={dims.n}, d={dims.d})"
        )
    return SignalOracle(dims, x)


def cmd_estimate(args) -> int:
    oracle = _oracle_from_file(args.signal, args.n, args.d)
    support = _load_support(args.support, oracle.dims)
    report = estimate(oracle, support)
    _emit(json.dumps(report.to_json(), indent=2), args.out)
    return 0


def cmd_recover(args) -> int:
    seed = _default_seed(args)
    rec_cfg = RecoveryConfig(c_rip=args.c_rip, c_phase=args.c_phase, eps_zero=args.eps_zero)
    rs_cfg = RandomSupportConfig(gamma=args.gamma, eps_zero=args.eps_zero)

    def run_one(oracle, k, run_seed):
        if args.mode == "worst":
            return sparse_fft_worst_case(oracle, k, rec_cfg, seed=run_seed)
        if args.mode == "random-phase":
            return sparse_fft_random_phase(oracle, k, rec_cfg, seed=run_seed)
        return sparse_fft_random_support(oracle, k, rs_cfg, seed=run_seed)

    if args.signal:
        oracle = _oracle_from_file(args.signal, args.n, args.d)
        report = run_one(oracle, args.k, seed)
        _emit(json.dumps(report.to_json(), indent=2), args.out)
        return 0 if report.success else 1

    # no signal file: generate seeded instances of the matching model
    if args.n is None or args.d is None:
        raise SystemExit("recover needs --signal or both --n and --d")
    model = {"worst": "worst-case", "random-phase": "random-phase", "random-support": "random-support"}[args.mode]
    reports = []
    for t in range(args.trials):
        spec = SignalSpec(model=model, n=args.n, d=args.d, k=args.k, seed=seed + t)
        oracle, ref = generate(spec)
        rep = run_one(oracle, max(1, 1 << (args.k - 1).bit_length()) if args.mode == "random-support" else args.k, seed + t)
        err = math.sqrt(
            sum(abs(ref[f] - rep.spectrum[f]) ** 2 for f in set(ref.entries) | set(rep.spectrum.entries))
        )
        ok = err <= 1e-6 * ref.l2()
        body = rep.to_json()
        body["spec"] = spec.to_json()
        body["l2_error_vs_reference"] = err
        body["success"] = bool(ok)
        reports.append(body)
    agg = {
        "schema": 1,
        "trials": args.trials,
        "successes": sum(r["success"] for r in reports),
        "reports": reports,
    }
    _emit(json.dumps(agg, indent=2), args.out)
    return 0 if agg["successes"] == args.trials else 1


def cmd_prune_sim(args) -> int:
    rows = []
    if args.sweep:
        for log_n in (16, 32, 64):
            for c in (1, 2, 3):
                tree_leaves = sum(math.comb(log_n, j) for j in range(c + 1))
                base = math.ceil(math.log2(tree_leaves))
                for j in (0, 1, 2):
                    rows.append(verify_lower_bound(log_n, c, base + j).to_row())
    else:
        if args.log_n is None or args.c is None or args.tau is None:
            raise SystemExit("prune-sim needs --log-n, --c and --tau (or --sweep)")
        rows.append(verify_lower_bound(args.log_n, args.c, args.tau).to_row())

    lines = [",".join(PRUNE_FIELDS)]
    lines += [",".join(str(x) for x in row) for row in rows]
    _emit("\n".join(lines) + "\n", args.out)

    if args.figures and args.out:
        from .plotting import save_prune_figure

        save_prune_figure(rows, Path(args.out).parent)
    return 0 if all(r[-1] for r in rows) else 1


def cmd_bernoulli_stats(args) -> int:
    seed = _default_seed(args)
    dims = Dims(args.n, args.d)
    B = make_bucket(args.buckets, dims)
    coarse = make_bucket(args.coarse, dims) if args.coarse else None
    stats = bernoulli_collision_stats(dims, args.k, B, args.trials, seed=seed, B_coarse=coarse)
    lines = [",".join(str(c) for c in row) for row in stats.to_csv_rows()]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_sweep(args) -> int:
    seeds = list(range(args.seed0, args.seed0 + args.seeds))
    result = sweep(
        models=args.models,
        ns=args.n,
        ds=args.d,
        ks=args.k,
        seeds=seeds,
        out_dir=args.out,
        workers=args.workers,
        figures=not args.no_figures,
    )
    sys.stdout.write(json.dumps(result.summary, indent=2) + "\n")
    return 0 if result.all_success else 1


def cmd_selftest(args) -> int:
    seed = _default_seed(args)
    checks = []

    def check(name, fn):
        try:
            ok = bool(fn())
            detail = ""
        except Exception as exc:  # pragma: no cover - defensive
            ok, detail = False, f" ({exc})"
        checks.append(ok)
        print(f"[{'PASS' if ok else 'FAIL'}] {name}{detail}")

    check(
        "estimate: exact recovery with known support",
        lambda: run(SignalSpec("worst-case", 16, 2, 12, seed), "estimate").success,
    )
    check(
        "worst-case recovery (k=4, n=16, d=2)",
        lambda: run(SignalSpec("worst-case", 16, 2, 4, seed), "worst").success,
    )
    check(
        "random-phase recovery (k=4, n=16, d=2)",
        lambda: run(SignalSpec("random-phase", 16, 2, 4, seed), "random-phase").success,
    )
    check(
        "random-support recovery (k=4, n=16, d=3)",
        lambda: run(SignalSpec("random-support", 16, 3, 4, seed), "random-support").success,
    )
    check(
        "dense baseline",
        lambda: run(SignalSpec("random-phase", 8, 2, 4, seed), "dense-fft-baseline").success,
    )
    check(
        "pruning lower bound (log_n=16, c=2)",
        lambda: verify_lower_bound(16, 2, 8, monotonicity_trials=5, seed=seed).holds,
    )
    print(f"selftest: {sum(checks)}/{len(checks)} passed")
    return 0 if all(checks) else 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dimfft", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    pe = sub.add_parser("estimate", help="estimate a spectrum with known support")
    pe.add_argument("--signal", required=True, help="binary signal file")
    pe.add_argument("--support", required=True, help="JSON support file")
    pe.add_argument("--n", type=int)
    pe.add_argument("--d", type=int)
    pe.add_argument("--out")
    pe.set_defaults(fn=cmd_estimate)

    pr = sub.add_parser("recover", help="sparse recovery without known support")
    pr.add_argument("--mode", choices=("worst", "random-phase", "random-support"), required=True)
    pr.add_argument("--signal")
    pr.add_argument("--k", type=int, required=True)
    pr.add_argument("--n", type=int)
    pr.add_argument("--d", type=int)
    pr.add_argument("--seed", type=int)
    pr.add_argument("--trials", type=int, default=1)
    pr.add_argument("--c-rip", type=float, default=2.0)
    pr.add_argument("--c-phase", type=float, default=2.0)
    pr.add_argument("--eps-zero", type=float, default=1e-12)
    pr.add_argument("--gamma", type=int, default=2)
    pr.add_argument("--out")
    pr.set_defaults(fn=cmd_recover)

    pp = sub.add_parser("prune-sim", help="tree pruning lower-bound simulator")
    pp.add_argument("--log-n", type=int)
    pp.add_argument("--c", type=int)
    pp.add_argument("--tau", type=int)
    pp.add_argument("--sweep", action="store_true", help="run the full verification grid")
    pp.add_argument("--figures", action="store_true", help="render a figure beside --out")
    pp.add_argument("--out")
    pp.set_defaults(fn=cmd_prune_sim)

    pb = sub.add_parser("bernoulli-stats", help="collision statistics for Bernoulli supports")
    pb.add_argument("--k", type=int, required=True)
    pb.add_argument("--buckets", type=int, required=True, help="total bucket count |B|")
    pb.add_argument("--trials", type=int, required=True)
    pb.add_argument("--n", type=int, default=16)
    pb.add_argument("--d", type=int, default=3)
    pb.add_argument("--coarse", type=int, help="coarse bucket count |B'|")
    pb.add_argument("--seed", type=int)
    pb.add_argument("--out")
    pb.set_defaults(fn=cmd_bernoulli_stats)

    ps = sub.add_parser("sweep", help="grid of end-to-end runs with aggregates")
    ps.add_argument("--models", nargs="+", default=["worst-case", "random-phase", "random-support"])
    ps.add_argument("--n", nargs="+", type=int, default=[16])
    ps.add_argument("--d", nargs="+", type=int, default=[2])
    ps.add_argument("--k", nargs="+", type=int, default=[2, 4, 8])
    ps.add_argument("--seeds", type=int, default=3, help="number of seeds per point")
    ps.add_argument("--seed0", type=int, default=0, help="first seed")
    ps.add_argument("--workers", type=int, default=1)
    ps.add_argument("--no-figures", action="store_true")
    ps.add_argument("--out", help="output directory for CSV, summary, figures")
    ps.set_defaults(fn=cmd_sweep)

    pt = sub.add_parser("selftest", help="compact end-to-end battery")
    pt.add_argument("--seed", type=int)
    pt.set_defaults(fn=cmd_selftest)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    raise SystemExit(main())
