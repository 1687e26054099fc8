"""Shared independent oracles: direct-summation transforms and a literal
sequential implementation of the pruning round, kept free of the code paths
they are used to check."""

from __future__ import annotations

import numpy as np
import pytest

from dimfft.core import Dims, unflatten_many


def all_points(dims: Dims) -> np.ndarray:
    """Every point of [n]^d as an (N, d) array in flat order."""
    return unflatten_many(np.arange(dims.N, dtype=np.int64), dims)


def dft_direct(x: np.ndarray, dims: Dims) -> np.ndarray:
    """O(N^2) forward transform straight from the defining sum."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    P = all_points(dims)
    M = np.exp(-2j * np.pi * ((P @ P.T) % dims.n) / dims.n)
    return M @ x


def idft_direct(X: np.ndarray, dims: Dims) -> np.ndarray:
    X = np.asarray(X, dtype=np.complex128).reshape(-1)
    P = all_points(dims)
    M = np.exp(2j * np.pi * ((P @ P.T) % dims.n) / dims.n)
    return (M @ X) / dims.N


def convolve_direct(a: np.ndarray, b: np.ndarray, dims: Dims) -> np.ndarray:
    """O(N^2) cyclic convolution by the defining double sum."""
    a = np.asarray(a, dtype=np.complex128).reshape(-1)
    b = np.asarray(b, dtype=np.complex128).reshape(-1)
    P = all_points(dims)
    out = np.zeros(dims.N, dtype=np.complex128)
    from dimfft.core import flatten_many

    for tau in range(dims.N):
        shift = flatten_many((P - P[tau]) % dims.n, dims)
        out += a[tau] * b[shift]
    return out


def tensor_direct(factors, dims: Dims) -> np.ndarray:
    """Pointwise product over coordinates, straight from the definition."""
    P = all_points(dims)
    out = np.ones(dims.N, dtype=np.complex128)
    for q in range(dims.d):
        out *= np.asarray(factors[q], dtype=np.complex128)[P[:, q]]
    return out


def random_spectrum(dims: Dims, k: int, rng, values="gaussian"):
    """A k-sparse spectrum with a dense time-domain realization."""
    from dimfft.core import SignalOracle, SparseSpectrum, idft, unflatten

    flat = rng.choice(dims.N, size=k, replace=False)
    spec = SparseSpectrum(dims)
    for v in flat:
        if values == "gaussian":
            val = complex(rng.normal(), rng.normal())
        elif values == "phase":
            val = np.exp(2j * np.pi * rng.random())
        else:
            val = rng.choice([1.0, -1.0])
        spec[unflatten(int(v), dims)] = val
    x = idft(spec.to_dense(), dims)
    return SignalOracle(dims, x), spec


def prune_rounds_reference(tree, tau: int, reverse_order: bool = False):
    """Sequential pruning on a SplittingTree copy: per round, select leaves of
    weight <= tau against the round-start tree, then remove one at a time with
    chain removal against the evolving tree."""
    from dimfft.tree import leaf_weight, remove_leaf

    t = tree.copy()
    removals = []
    while t.root is not None:
        batch = [v for v in t.leaves() if leaf_weight(t, v) <= tau]
        if not batch:
            raise RuntimeError("stalled")
        if reverse_order:
            batch = batch[::-1]
        for v in batch:
            remove_leaf(t, v)
        removals.append(len(batch))
    return removals


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)
