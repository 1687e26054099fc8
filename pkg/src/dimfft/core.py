"""Dense reference transforms, signal containers, and the counted sampling oracle.

Conventions used throughout the package:

* Signals live on the grid ``[n]^d`` with ``n`` a power of two and ``N = n^d``.
* The forward transform is unnormalized,
  ``X[f] = sum_t x[t] * exp(-2j*pi*<f,t>/n)``, and the inverse carries the
  ``1/N`` factor, so Parseval reads ``||X||^2 = N * ||x||^2``.
* Dense storage is flat, indexed by the flattening
  ``flat(f) = sum_q f_q * n^(q-1)`` (coordinate 1 varies fastest).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

__all__ = [
    "Dims",
    "SparseSpectrum",
    "SignalOracle",
    "flatten",
    "unflatten",
    "flatten_many",
    "unflatten_many",
    "dft",
    "idft",
    "convolve",
    "tensor",
    "read_signal",
    "write_signal",
]


def _is_pow2(x: int) -> bool:
    return x >= 1 and (x & (x - 1)) == 0


@dataclass(frozen=True)
class Dims:
    """Grid geometry: side length ``n`` (a power of two) and dimension ``d``."""

    n: int
    d: int

    def __post_init__(self):
        if self.n < 2 or not _is_pow2(self.n):
            raise ValueError(f"side length must be a power of two >= 2, got {self.n}")
        if self.d < 1:
            raise ValueError(f"dimension must be positive, got {self.d}")

    @property
    def N(self) -> int:
        return self.n**self.d

    @property
    def log2_n(self) -> int:
        return self.n.bit_length() - 1

    @property
    def log2_N(self) -> int:
        return self.d * self.log2_n

    @property
    def shape(self) -> tuple[int, ...]:
        # numpy shape for a flat array in our layout: axis 0 is coordinate d
        # (the slowest), axis d-1 is coordinate 1 (stride 1).
        return (self.n,) * self.d

    def validate_freq(self, f) -> tuple[int, ...]:
        f = tuple(int(c) for c in f)
        if len(f) != self.d or any(c < 0 or c >= self.n for c in f):
            raise ValueError(f"{f} is not a valid point of [{self.n}]^{self.d}")
        return f


def flatten(f, dims: Dims) -> int:
    """Map a d-dimensional frequency to its flat index, coordinate q at stride n^(q-1)."""
    f = dims.validate_freq(f)
    out = 0
    for q in range(dims.d - 1, -1, -1):
        out = out * dims.n + f[q]
    return out


def unflatten(v: int, dims: Dims) -> tuple[int, ...]:
    """Inverse of :func:`flatten`."""
    v = int(v)
    if v < 0 or v >= dims.N:
        raise ValueError(f"flat index {v} out of range [0, {dims.N})")
    out = []
    for _ in range(dims.d):
        out.append(v % dims.n)
        v //= dims.n
    return tuple(out)


def flatten_many(F: np.ndarray, dims: Dims) -> np.ndarray:
    """Vectorized flatten of an (m, d) int array, with cyclic reduction mod n."""
    F = np.asarray(F, dtype=np.int64) % dims.n
    strides = dims.n ** np.arange(dims.d, dtype=np.int64)
    return F @ strides


def unflatten_many(v: np.ndarray, dims: Dims) -> np.ndarray:
    v = np.asarray(v, dtype=np.int64)
    out = np.empty(v.shape + (dims.d,), dtype=np.int64)
    for q in range(dims.d):
        out[..., q] = v % dims.n
        v = v // dims.n
    return out


class SparseSpectrum:
    """Finite map from frequency vectors to complex amplitudes.

    Entries with amplitude exactly zero are never stored.
    """

    def __init__(self, dims: Dims, entries=None):
        self.dims = dims
        self.entries: dict[tuple[int, ...], complex] = {}
        if entries:
            for f, v in dict(entries).items():
                self[f] = v

    def __getitem__(self, f) -> complex:
        return self.entries.get(self.dims.validate_freq(f), 0j)

    def __setitem__(self, f, value):
        f = self.dims.validate_freq(f)
        value = complex(value)
        if value == 0:
            self.entries.pop(f, None)
        else:
            self.entries[f] = value

    def add(self, f, value):
        self[f] = self[f] + complex(value)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __eq__(self, other) -> bool:
        return isinstance(other, SparseSpectrum) and self.dims == other.dims and self.entries == other.entries

    def items(self):
        return self.entries.items()

    def copy(self) -> "SparseSpectrum":
        out = SparseSpectrum(self.dims)
        out.entries = dict(self.entries)
        return out

    def drop_small(self, tol: float) -> "SparseSpectrum":
        """Remove entries with modulus at most ``tol`` (in place)."""
        self.entries = {f: v for f, v in self.entries.items() if abs(v) > tol}
        return self

    def support_array(self) -> np.ndarray:
        """Support as an (m, d) int64 array in insertion order."""
        if not self.entries:
            return np.empty((0, self.dims.d), dtype=np.int64)
        return np.array(list(self.entries.keys()), dtype=np.int64)

    def values_array(self) -> np.ndarray:
        return np.array(list(self.entries.values()), dtype=np.complex128)

    def l2(self) -> float:
        return float(np.sqrt(sum(abs(v) ** 2 for v in self.entries.values())))

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.dims.N, dtype=np.complex128)
        for f, v in self.entries.items():
            out[flatten(f, self.dims)] = v
        return out

    @classmethod
    def from_dense(cls, arr: np.ndarray, dims: Dims, tol: float = 0.0) -> "SparseSpectrum":
        arr = np.asarray(arr).reshape(-1)
        if arr.size != dims.N:
            raise ValueError(f"expected length {dims.N}, got {arr.size}")
        out = cls(dims)
        for v in np.nonzero(np.abs(arr) > tol)[0]:
            out[unflatten(int(v), dims)] = complex(arr[v])
        return out

    def to_json(self) -> dict:
        entries = sorted(self.entries.items(), key=lambda kv: flatten(kv[0], self.dims))
        return {
            "n": self.dims.n,
            "d": self.dims.d,
            "entries": [{"f": list(f), "re": v.real, "im": v.imag} for f, v in entries],
        }

    @classmethod
    def from_json(cls, obj) -> "SparseSpectrum":
        if isinstance(obj, str):
            obj = json.loads(obj)
        dims = Dims(int(obj["n"]), int(obj["d"]))
        out = cls(dims)
        for e in obj["entries"]:
            out[tuple(e["f"])] = complex(float(e["re"]), float(e["im"]))
        return out


class SignalOracle:
    """Counted time-domain access to a signal.

    Backed either by a dense flat array of length ``N`` or by a callable
    mapping flat indices to values. Every read increments ``samples_read``;
    ``distinct_points_read`` counts first visits only. Reads never mutate the
    signal.
    """

    def __init__(self, dims: Dims, backing):
        self.dims = dims
        if callable(backing):
            self._dense = None
            self._fn = backing
        else:
            arr = np.asarray(backing, dtype=np.complex128).reshape(-1)
            if arr.size != dims.N:
                raise ValueError(f"dense backing must have length {dims.N}, got {arr.size}")
            self._dense = arr
            self._fn = None
        self.samples_read = 0
        self.distinct_points_read = 0
        self._visited = np.zeros(dims.N, dtype=bool)

    def read(self, t) -> complex:
        """Read x at a single point t in [n]^d."""
        idx = flatten(t, self.dims)
        return complex(self.read_flat(np.array([idx], dtype=np.int64))[0])

    def read_flat(self, idx: np.ndarray) -> np.ndarray:
        """Read x at flat indices (counted, with multiplicity)."""
        idx = np.asarray(idx, dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= self.dims.N):
            raise IndexError("oracle read out of range")
        flat = idx.reshape(-1)
        self.samples_read += flat.size
        if flat.size:
            uniq = np.unique(flat)
            fresh = ~self._visited[uniq]
            self.distinct_points_read += int(fresh.sum())
            self._visited[uniq] = True
        if self._dense is not None:
            return self._dense[idx]
        return np.asarray(self._fn(idx), dtype=np.complex128)

    def counters(self) -> tuple[int, int]:
        return self.samples_read, self.distinct_points_read


def _to_grid(x: np.ndarray, dims: Dims) -> np.ndarray:
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if x.size != dims.N:
        raise ValueError(f"expected a dense signal of length {dims.N}, got {x.size}")
    # reversed coordinate order: axis 0 is coordinate d, axis d-1 is coordinate 1
    return x.reshape(dims.shape)


def dft(x: np.ndarray, dims: Dims) -> np.ndarray:
    """Unnormalized forward transform, as a row-column FFT over all d axes."""
    return np.fft.fftn(_to_grid(x, dims)).reshape(-1)


def idft(X: np.ndarray, dims: Dims) -> np.ndarray:
    """Inverse transform carrying the 1/N factor; idft(dft(x)) == x."""
    return np.fft.ifftn(_to_grid(X, dims)).reshape(-1)


def convolve(a: np.ndarray, b: np.ndarray, dims: Dims) -> np.ndarray:
    """Cyclic d-dimensional convolution, computed in the frequency domain."""
    A = dft(a, dims)
    B = dft(b, dims)
    return idft(A * B, dims)


def tensor(factors) -> np.ndarray:
    """Tensor product of d one-dimensional signals, flattened.

    ``out[flat(j)] = factors[0][j_1] * ... * factors[d-1][j_d]``.
    """
    factors = [np.asarray(g, dtype=np.complex128).reshape(-1) for g in factors]
    n = factors[0].size
    if any(g.size != n for g in factors):
        raise ValueError("all tensor factors must share one length")
    out = factors[-1]
    for g in reversed(factors[:-1]):
        out = np.multiply.outer(out, g)
    return out.reshape(-1)


_HEADER = struct.Struct("<II")


def write_signal(path, x: np.ndarray, dims: Dims) -> None:
    """Binary signal format: u32 n, u32 d header, then interleaved float64 re,im."""
    x = np.asarray(x, dtype=np.complex128).reshape(-1)
    if x.size != dims.N:
        raise ValueError(f"expected length {dims.N}, got {x.size}")
    buf = np.empty(2 * x.size, dtype="<f8")
    buf[0::2] = x.real
    buf[1::2] = x.imag
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(dims.n, dims.d))
        fh.write(buf.tobytes())


def read_signal(path) -> tuple[np.ndarray, Dims]:
    with open(path, "rb") as fh:
        n, d = _HEADER.unpack(fh.read(_HEADER.size))
        dims = Dims(n, d)
        raw = np.frombuffer(fh.read(), dtype="<f8")
    if raw.size != 2 * dims.N:
        raise ValueError(f"signal payload has {raw.size} floats, expected {2 * dims.N}")
    return raw[0::2] + 1j * raw[1::2], dims
