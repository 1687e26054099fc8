"""Estimation with known support: exactness, peeling order, the residual
support invariant, determinism, and quadratic sample complexity."""

import numpy as np
import pytest

from dimfft.core import Dims, SignalOracle, SparseSpectrum, dft, flatten, idft, unflatten
from dimfft.estimate import estimate
from conftest import random_spectrum


class RecordingOracle(SignalOracle):
    def __init__(self, dims, backing):
        super().__init__(dims, backing)
        self.trace = []

    def read_flat(self, idx):
        self.trace.extend(int(i) for i in np.asarray(idx).reshape(-1))
        return super().read_flat(idx)


def _oracle_for(spec: SparseSpectrum) -> SignalOracle:
    return SignalOracle(spec.dims, idft(spec.to_dense(), spec.dims))


def test_single_frequency():
    dims = Dims(4, 1)
    spec = SparseSpectrum(dims, {(0,): 1.0})
    rep = estimate(_oracle_for(spec), [(0,)])
    assert rep.iterations == 1
    assert rep.spectrum[(0,)] == pytest.approx(1.0, abs=1e-9)


def test_three_frequency_example_peels_min_weight_first():
    dims = Dims(8, 1)
    spec = SparseSpectrum(dims, {(2,): 1.0, (4,): 2j, (5,): -1.0})
    rep = estimate(_oracle_for(spec), [(2,), (4,), (5,)])
    assert rep.peel_order[0] == (5,)
    for f, v in spec.items():
        assert rep.spectrum[f] == pytest.approx(v, abs=1e-6)
    assert set(rep.spectrum.entries) == set(spec.entries)


def test_exact_recovery_k16_d3(rng):
    dims = Dims(16, 3)
    oracle, spec = random_spectrum(dims, 16, rng)
    rep = estimate(oracle, list(spec.entries))
    for f, v in spec.items():
        assert rep.spectrum[f] == pytest.approx(v, abs=1e-6 * spec.l2())
    assert rep.samples_used <= 2 * 16**2


def test_superset_support_extras_dropped(rng):
    dims = Dims(16, 1)
    oracle, spec = random_spectrum(dims, 4, rng)
    sup = set(spec.entries)
    extra = {unflatten(int(v), dims) for v in rng.choice(16, 6, replace=False)}
    rep = estimate(oracle, sorted(sup | extra))
    assert set(rep.spectrum.entries) == sup
    for f, v in spec.items():
        assert rep.spectrum[f] == pytest.approx(v, abs=1e-6)


def test_residual_support_induction(rng):
    # after t peels, supp(xhat - chihat) is exactly the unpeeled support
    for _ in range(10):
        n, d = [(16, 1), (4, 2), (2, 6)][int(rng.integers(3))]
        dims = Dims(n, d)
        k = int(rng.integers(2, 9))
        oracle, spec = random_spectrum(dims, k, rng)
        rep = estimate(oracle, list(spec.entries), drop_tol=0.0)
        x = idft(spec.to_dense(), dims)
        remaining = set(spec.entries)
        for t, f in enumerate(rep.peel_order, start=1):
            chi_t = SparseSpectrum(dims, {g: rep.spectrum[g] for g in rep.peel_order[:t]})
            residual = dft(x - idft(chi_t.to_dense(), dims), dims)
            remaining.discard(f)
            support = {
                unflatten(int(v), dims)
                for v in np.nonzero(np.abs(residual) > 1e-6)[0]
            }
            assert support == remaining


def test_determinism_including_access_sequence(rng):
    dims = Dims(16, 2)
    _, spec = random_spectrum(dims, 12, rng)
    x = idft(spec.to_dense(), dims)
    runs = []
    for _ in range(2):
        oracle = RecordingOracle(dims, x)
        rep = estimate(oracle, sorted(spec.entries))
        runs.append((dict(rep.spectrum.items()), rep.peel_order, oracle.trace))
    assert runs[0] == runs[1]


def test_sample_complexity_quadratic(rng):
    # a single constant c with samples <= c * |S|^2 across the grid
    dims = Dims(16, 3)  # N = 4096
    worst = 0.0
    for k in (4, 8, 16, 32):
        oracle, spec = random_spectrum(dims, k, rng)
        rep = estimate(oracle, list(spec.entries))
        worst = max(worst, rep.samples_used / k**2)
    print(f"\n[estimate] fitted sample constant c = {worst:.3f} (samples <= c k^2)")
    assert worst <= 1.05


def test_empty_support_rejected():
    dims = Dims(8, 1)
    oracle = SignalOracle(dims, np.zeros(8, complex))
    with pytest.raises(ValueError):
        estimate(oracle, [])


def test_wrong_dimension_support_rejected():
    dims = Dims(8, 1)
    oracle = SignalOracle(dims, np.zeros(8, complex))
    with pytest.raises(ValueError):
        estimate(oracle, [(1, 2)])
