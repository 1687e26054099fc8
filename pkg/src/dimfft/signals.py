"""Seeded generators for the three input models plus the adversarial family.

Every model draws a reference spectrum, materializes the dense time-domain
signal by inverse transform (desk scale only), and wraps it in a counted
oracle. The same seed always yields the same instance.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import Dims, SignalOracle, SparseSpectrum, idft, unflatten
from .pruning import hamming_ball

__all__ = ["SignalSpec", "generate", "MODELS"]

MODELS = ("worst-case", "random-phase", "random-support", "hamming-ball")

MAX_DENSE_N = 1 << 16


def _ball_radius(log_n: int, k: int):
    """The radius whose ball has exactly k elements, or None."""
    from math import comb

    total = 0
    for c in range(log_n + 1):
        total += comb(log_n, c)
        if total == k:
            return c
        if total > k:
            return None
    return None


@dataclass(frozen=True)
class SignalSpec:
    model: str
    n: int
    d: int
    k: int
    seed: int = 0
    beta: float = 1.0  # magnitude of every nonzero value

    def __post_init__(self):
        if self.model not in MODELS:
            raise ValueError(f"unknown model {self.model!r}; choose from {MODELS}")
        dims = self.dims
        if self.k > dims.N:
            raise ValueError(f"sparsity {self.k} exceeds N = {dims.N}")
        if self.model == "hamming-ball":
            if self.d != 1:
                raise ValueError("the hamming-ball model is one-dimensional")
            if _ball_radius(dims.log2_n, self.k) is None:
                raise ValueError(
                    f"hamming-ball model needs k to be a ball size over {dims.log2_n} bits"
                )

    @property
    def dims(self) -> Dims:
        return Dims(self.n, self.d)

    def to_json(self) -> dict:
        return asdict(self)


def _hamming_ordered(N: int) -> np.ndarray:
    """All of [N] ordered by (popcount, value): nested Hamming balls."""
    vals = np.arange(N, dtype=np.int64)
    pop = np.array([int(v).bit_count() for v in vals])
    return vals[np.lexsort((vals, pop))]


def _worst_case_support(dims: Dims, k: int, rng) -> list[int]:
    # adversarial default in one dimension, uniform without replacement otherwise
    if dims.d == 1:
        return [int(v) for v in _hamming_ordered(dims.N)[:k]]
    return [int(v) for v in rng.choice(dims.N, size=k, replace=False)]


def _signs(rng, m: int) -> np.ndarray:
    return rng.choice(np.array([1.0, -1.0]), size=m)


def generate(spec: SignalSpec) -> tuple[SignalOracle, SparseSpectrum]:
    """Draw the reference spectrum for the model and wrap the dense inverse
    transform in a counted oracle."""
    dims = spec.dims
    if dims.N > MAX_DENSE_N:
        raise ValueError(f"dense-backed generation is limited to N <= {MAX_DENSE_N}")
    rng = np.random.default_rng(spec.seed)
    ref = SparseSpectrum(dims)

    if spec.model in ("worst-case", "random-phase"):
        flat = _worst_case_support(dims, spec.k, rng)
        if spec.model == "worst-case":
            values = spec.beta * _signs(rng, spec.k)
        else:
            values = spec.beta * np.exp(2j * np.pi * rng.random(spec.k))
        for v, val in zip(flat, values):
            ref[unflatten(v, dims)] = val
    elif spec.model == "random-support":
        mask = rng.random(dims.N) < spec.k / dims.N
        flat = np.nonzero(mask)[0]
        values = spec.beta * _signs(rng, len(flat))
        for v, val in zip(flat, values):
            ref[unflatten(int(v), dims)] = val
    else:  # hamming-ball
        ball = hamming_ball(dims.log2_n, _ball_radius(dims.log2_n, spec.k))
        values = spec.beta * _signs(rng, len(ball))
        for v, val in zip(ball, values):
            ref[unflatten(v, dims)] = val

    x = idft(ref.to_dense(), dims)
    return SignalOracle(dims, x), ref
