"""End-to-end runners, sweep aggregation and outputs, and the CLI surface."""

import csv
import json
import math
import subprocess
import sys

from dimfft.core import Dims, SparseSpectrum, idft, write_signal
from dimfft.harness import run, spectrum_l2_error, sweep
from dimfft.signals import SignalSpec, generate
from dimfft.cli import main


def test_dense_baseline_reads_everything():
    rep = run(SignalSpec("random-phase", 8, 2, 5, seed=1), "dense-fft-baseline")
    assert rep.success
    assert rep.samples_read == 64 and rep.distinct_points_read == 64


def test_estimate_succeeds_on_every_model():
    for model in ("worst-case", "random-phase", "random-support", "hamming-ball"):
        k = 11 if model == "hamming-ball" else 6
        rep = run(SignalSpec(model, 16, 1, k, seed=3), "estimate")
        assert rep.success, model


def test_worst_case_run_with_budget():
    rep = run(SignalSpec("worst-case", 16, 2, 8, seed=2), "worst")
    assert rep.success
    assert rep.samples_read <= 4_000_000


def test_success_flag_consistent_with_error():
    rep = run(SignalSpec("random-phase", 16, 2, 4, seed=9), "random-phase")
    assert rep.success == (rep.l2_error <= 1e-6 * rep.ref_l2)
    assert rep.flags == []


def test_model_algorithm_mismatch_flagged():
    # permitted, but the report carries a flag
    rep = run(SignalSpec("worst-case", 16, 1, 4, seed=2), "random-support")
    assert rep.flags and "worst-case" in rep.flags[0]


def test_reports_deterministic_except_wall_time():
    a = run(SignalSpec("worst-case", 16, 2, 4, seed=11), "worst")
    b = run(SignalSpec("worst-case", 16, 2, 4, seed=11), "worst")
    ja, jb = a.to_json(), b.to_json()
    ja.pop("wall_time_ms"), jb.pop("wall_time_ms")
    assert ja == jb


def test_sweep_csv_and_summary(tmp_path):
    result = sweep(
        models=["worst-case", "random-phase"],
        ns=[16],
        ds=[2],
        ks=[2, 4],
        seeds=[0, 1],
        out_dir=tmp_path,
        figures=True,
    )
    assert result.all_success
    rows = list(csv.DictReader(open(tmp_path / "sweep.csv")))
    assert len(rows) == 8
    summary = json.loads((tmp_path / "summary.json").read_text())
    assert summary["models"]["worst-case"]["success_rate"] == 1.0
    assert math.isfinite(summary["models"]["worst-case"]["samples_vs_k_slope"])
    assert (tmp_path / "samples_vs_k.png").exists()
    assert (tmp_path / "success_rate.png").exists()


def test_sweep_empty_grid(tmp_path):
    result = sweep(models=["worst-case"], ns=[16], ds=[2], ks=[1000], seeds=[0], out_dir=tmp_path, figures=False)
    assert result.rows == []
    header = open(tmp_path / "sweep.csv").readline().strip()
    assert header.startswith("model,n,d,k,seed")


def test_random_support_sample_slope():
    # near-linear scaling: fitted slope of log(samples) vs log(k) at most 1.3
    from dimfft.harness import fit_loglog_slope
    from dimfft.randsupport import sparse_fft_random_support

    ks, samples = [], []
    for k in (2, 4, 8, 16):
        for seed in range(5):
            oracle, _ = generate(SignalSpec("random-support", 16, 3, k, seed=seed))
            rep = sparse_fft_random_support(oracle, k, seed=123 + seed)
            ks.append(k)
            samples.append(rep.samples_used)
    slope = fit_loglog_slope(ks, samples)
    print(f"\n[random-support] samples-vs-k slope = {slope:.3f}")
    assert slope <= 1.3


def test_sweep_worker_pool_matches_serial(tmp_path):
    serial = sweep(["random-phase"], [16], [1], [2, 4], [0], out_dir=None, figures=False)
    parallel = sweep(["random-phase"], [16], [1], [2, 4], [0], out_dir=None, workers=2, figures=False)
    for a, b in zip(serial.rows, parallel.rows):
        a, b = dict(a), dict(b)
        a.pop("wall_time_ms"), b.pop("wall_time_ms")
        assert a == b


def _write_instance(tmp_path, model="worst-case", n=16, d=2, k=4, seed=0):
    oracle, ref = generate(SignalSpec(model, n, d, k, seed=seed))
    sig = tmp_path / "x.bin"
    dims = Dims(n, d)
    write_signal(sig, idft(ref.to_dense(), dims), dims)
    return sig, ref


def test_cli_estimate(tmp_path, capsys):
    sig, ref = _write_instance(tmp_path)
    sup = tmp_path / "support.json"
    sup.write_text(json.dumps([list(f) for f in ref.entries]))
    rc = main(["estimate", "--signal", str(sig), "--support", str(sup), "--n", "16", "--d", "2"])
    assert rc == 0
    body = json.loads(capsys.readouterr().out)
    got = SparseSpectrum.from_json(body["spectrum"])
    assert spectrum_l2_error(ref, got) <= 1e-6 * ref.l2()
    assert body["samples_used"] > 0


def test_cli_estimate_accepts_spectrum_schema_support(tmp_path, capsys):
    sig, ref = _write_instance(tmp_path)
    sup = tmp_path / "support.json"
    sup.write_text(json.dumps(ref.to_json()))
    assert main(["estimate", "--signal", str(sig), "--support", str(sup)]) == 0


def test_cli_recover_signal_file(tmp_path, capsys):
    sig, ref = _write_instance(tmp_path, k=3)
    rc = main(["recover", "--mode", "worst", "--signal", str(sig), "--k", "3", "--seed", "5"])
    assert rc == 0
    body = json.loads(capsys.readouterr().out)
    got = SparseSpectrum.from_json(body["spectrum"])
    assert spectrum_l2_error(ref, got) <= 1e-6 * ref.l2()


def test_cli_recover_generated_trials(tmp_path, capsys):
    out = tmp_path / "rep.json"
    rc = main(
        [
            "recover", "--mode", "random-support", "--k", "4", "--n", "16", "--d", "2",
            "--trials", "3", "--seed", "1", "--gamma", "2", "--out", str(out),
        ]
    )
    body = json.loads(out.read_text())
    assert body["trials"] == 3
    assert rc == (0 if body["successes"] == 3 else 1)


def test_cli_recover_respects_env_seed(tmp_path, capsys, monkeypatch):
    sig, ref = _write_instance(tmp_path, k=2)
    monkeypatch.setenv("DIMFFT_SEED", "123")
    assert main(["recover", "--mode", "worst", "--signal", str(sig), "--k", "2"]) == 0
    first = json.loads(capsys.readouterr().out)
    monkeypatch.setenv("DIMFFT_SEED", "123")
    assert main(["recover", "--mode", "worst", "--signal", str(sig), "--k", "2"]) == 0
    second = json.loads(capsys.readouterr().out)
    assert first["samples_used"] == second["samples_used"]


def test_cli_prune_sim_single(capsys):
    rc = main(["prune-sim", "--log-n", "16", "--c", "2", "--tau", "8"])
    assert rc == 0
    out = capsys.readouterr().out.strip().splitlines()
    assert out[0] == "log_n,c,tau,leaves,rounds,bound,holds"
    fields = out[1].split(",")
    assert fields[:4] == ["16", "2", "8", "137"]
    assert fields[6] == "True"


def test_cli_prune_sim_sweep_with_figure(tmp_path):
    out = tmp_path / "prune.csv"
    rc = main(["prune-sim", "--sweep", "--figures", "--out", str(out)])
    assert rc == 0
    rows = out.read_text().strip().splitlines()
    assert len(rows) == 1 + 27  # 3 heights x 3 radii x 3 thresholds
    assert (tmp_path / "prune_lower_bound.png").exists()


def test_cli_bernoulli_stats(capsys):
    rc = main(["bernoulli-stats", "--k", "8", "--buckets", "32", "--trials", "20", "--n", "16", "--d", "3"])
    assert rc == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "trial,collisions,max_per_coarse_bucket"
    assert len(lines) == 21


def test_cli_sweep(tmp_path, capsys):
    rc = main(
        [
            "sweep", "--models", "random-phase", "--n", "16", "--d", "1",
            "--k", "2", "4", "--seeds", "2", "--out", str(tmp_path / "out"), "--no-figures",
        ]
    )
    assert rc == 0
    assert (tmp_path / "out" / "sweep.csv").exists()


def test_cli_selftest(capsys):
    rc = main(["selftest", "--seed", "0"])
    out = capsys.readouterr().out
    assert rc == 0
    assert out.count("[PASS]") == 6


def test_console_script_help():
    proc = subprocess.run(
        [sys.executable, "-m", "dimfft.cli", "--help"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    for sub in ("estimate", "recover", "prune-sim", "bernoulli-stats", "sweep", "selftest"):
        assert sub in proc.stdout
