"""Adaptive aliasing filters built from splitting trees.

A one-dimensional filter is described by a vector ``g`` with one entry per
tree level: a unit-modulus value ``exp(-2j*pi*f/2^j)`` where the root-to-leaf
path branches at level ``j``, zero elsewhere. Its time-domain form is a sparse
signal of support ``2^w`` (w = number of branching ancestors) and its Fourier
transform factors as a product of ``(1 + g_j * exp(2j*pi*xi/2^j)) / 2`` terms,
which is exactly 1 on the leaf's frequency cone and exactly 0 on every other
leaf's cone.

The d-dimensional filter tensors per-coordinate filters obtained by projecting
the flattened tree onto blocks of log2(n) levels.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .core import Dims, flatten_many
from .tree import Node, SplittingTree

__all__ = [
    "FilterDescriptor",
    "TimeFilter",
    "IsolatingFilter",
    "filter_preprocess",
    "filter_time",
    "filter_frequency",
    "project_coordinate_tree",
    "build_isolating_filter",
]


def _unit_root(num: int, den: int) -> complex:
    """exp(2j*pi*num/den) with exact values at the half-turn points."""
    num %= den
    if num == 0:
        return 1.0 + 0j
    if 2 * num == den:
        return -1.0 + 0j
    if 4 * num == den:
        return 1j
    if 4 * num == 3 * den:
        return -1j
    return cmath.exp(2j * cmath.pi * num / den)


@dataclass(frozen=True)
class FilterDescriptor:
    """Static description of a one-dimensional isolating filter.

    ``residues[j-1]`` is ``f mod 2^j`` when level j is active, else None.
    """

    n: int
    residues: tuple

    def __post_init__(self):
        if len(self.residues) != self.log2_n:
            raise ValueError("residue vector must have log2(n) entries")

    @property
    def log2_n(self) -> int:
        return self.n.bit_length() - 1

    @property
    def g(self) -> np.ndarray:
        """The filter vector: g_j = exp(-2j*pi*f/2^j) on active levels, 0 elsewhere."""
        out = np.zeros(self.log2_n, dtype=np.complex128)
        for j, r in enumerate(self.residues, start=1):
            if r is not None:
                out[j - 1] = _unit_root(-r, 1 << j)
        return out

    @property
    def weight(self) -> int:
        return sum(r is not None for r in self.residues)

    def active_levels(self):
        return [(j, r) for j, r in enumerate(self.residues, start=1) if r is not None]

    def frequency(self, xi: int) -> complex:
        return complex(self.frequency_many(np.array([xi]))[0])

    def frequency_many(self, xi: np.ndarray) -> np.ndarray:
        """Evaluate the Fourier transform at the given frequencies.

        Exact 0/1 values are produced where the running phase lands on 0 or a
        half turn, which covers every point of every leaf cone.
        """
        xi = np.asarray(xi, dtype=np.int64)
        out = np.ones(xi.shape, dtype=np.complex128)
        for j, r in self.active_levels():
            mod = 1 << j
            num = (xi - r) % mod
            factor = (1.0 + np.exp(2j * np.pi * num / mod)) / 2.0
            factor = np.where(num == 0, 1.0 + 0j, factor)
            factor = np.where(num == mod >> 1, 0j, factor)
            out = out * factor
        return out


@dataclass(frozen=True)
class TimeFilter:
    """Sparse time-domain filter: unit-stride indices in [n] and coefficients."""

    n: int
    support: np.ndarray
    coeffs: np.ndarray

    def as_dict(self) -> dict[int, complex]:
        return {int(i): complex(c) for i, c in zip(self.support, self.coeffs)}


def filter_preprocess(tree: SplittingTree, v: Node) -> FilterDescriptor:
    """Walk the root-to-leaf path and record branching levels (Fourier-domain
    description of the (v, T)-isolating filter)."""
    if not v.is_leaf():
        raise ValueError("filter_preprocess requires a leaf")
    if tree.dims.d != 1:
        raise ValueError("one-dimensional tree required")
    n = tree.dims.n
    path = tree.path_to(v)
    residues = [None] * tree.dims.log2_n
    f = v.label
    for j in range(1, v.level + 1):
        if path[j - 1].n_children() == 2:
            residues[j - 1] = f % (1 << j)
    return FilterDescriptor(n, tuple(residues))


def filter_time(desc: FilterDescriptor) -> TimeFilter:
    """Time-domain filter: start from the unit impulse and apply one two-point
    convolution per active level. Support size is exactly 2^weight."""
    n = desc.n
    support = np.zeros(1, dtype=np.int64)
    coeffs = np.ones(1, dtype=np.complex128)
    for j, r in desc.active_levels():
        g = _unit_root(-r, 1 << j)
        shift = (support - n // (1 << j)) % n
        support = np.concatenate([support, shift])
        coeffs = np.concatenate([coeffs / 2.0, coeffs * (g / 2.0)])
    order = np.argsort(support)
    return TimeFilter(n, support[order], coeffs[order])


def filter_frequency(desc: FilterDescriptor, xi: int) -> complex:
    """O(log n) evaluation of the filter's Fourier transform at one frequency."""
    return desc.frequency(int(xi))


def project_coordinate_tree(tree: SplittingTree, v: Node, q: int) -> SplittingTree:
    """Coordinate-q projection: the depth-log2(n) truncated subtree rooted at
    the path node at level (q-1)*log2(n), relabeled by coordinate q."""
    proj, _ = _project_with_map(tree, v, q)
    return proj


def _project_with_map(tree: SplittingTree, v: Node, q: int):
    dims = tree.dims
    ln = dims.log2_n
    if not 1 <= q <= dims.d:
        raise ValueError(f"coordinate {q} out of range 1..{dims.d}")
    base = (q - 1) * ln
    if v.level < base:
        raise ValueError("leaf is above the requested coordinate block")
    path = tree.path_to(v)
    src_root = path[base]
    out = SplittingTree(Dims(dims.n, 1))
    shift = base  # projected label = flat label >> base
    node_map: dict[int, Node] = {}
    out.root = Node(src_root.label >> shift, 0)
    node_map[id(src_root)] = out.root
    stack = [(src_root, out.root)]
    while stack:
        src, dst = stack.pop()
        if src.level - base >= ln:
            out._leaves.add(dst)
            continue
        added = False
        for side in ("right", "left"):
            c = getattr(src, side)
            if c is not None:
                nc = Node(c.label >> shift, dst.level + 1, dst)
                setattr(dst, side, nc)
                node_map[id(c)] = nc
                stack.append((c, nc))
                added = True
        if not added:
            out._leaves.add(dst)
    return out, node_map


class IsolatingFilter:
    """(v, T)-isolating filter over [n]^d: sparse time support of size
    2^{w_T(v)} and an O(d log n) frequency evaluator."""

    def __init__(self, dims: Dims, coord_filters):
        self.dims = dims
        self.coord_filters: list[FilterDescriptor | None] = list(coord_filters)
        parts = []
        for desc in self.coord_filters:
            if desc is None:
                parts.append((np.zeros(1, dtype=np.int64), np.ones(1, dtype=np.complex128)))
            else:
                tf = filter_time(desc)
                parts.append((tf.support, tf.coeffs))
        support = parts[0][0][:, None]
        coeffs = parts[0][1]
        for sup_q, co_q in parts[1:]:
            m, k = len(coeffs), len(co_q)
            support = np.concatenate(
                [np.repeat(support, k, axis=0), np.tile(sup_q, m)[:, None]], axis=1
            )
            coeffs = (coeffs[:, None] * co_q[None, :]).reshape(-1)
        self.time_support = support  # (m, d) points in [n]^d
        self.time_coeffs = coeffs

    @property
    def support_size(self) -> int:
        return len(self.time_coeffs)

    def frequency_many(self, F: np.ndarray) -> np.ndarray:
        """Evaluate Ghat at an (m, d) array of frequency vectors."""
        F = np.asarray(F, dtype=np.int64)
        if F.ndim == 1:
            F = F[None, :]
        out = np.ones(F.shape[0], dtype=np.complex128)
        for q, desc in enumerate(self.coord_filters):
            if desc is not None:
                out = out * desc.frequency_many(F[:, q])
        return out

    def frequency(self, f) -> complex:
        return complex(self.frequency_many(np.asarray(f, dtype=np.int64)[None, :])[0])

    def convolve_at(self, oracle, shifts: np.ndarray) -> np.ndarray:
        """(x * G) at the given time points: sum_s G(s) x(t - s), reading x
        through the oracle."""
        shifts = np.asarray(shifts, dtype=np.int64)
        if shifts.ndim == 1:
            shifts = shifts[None, :]
        pts = (shifts[:, None, :] - self.time_support[None, :, :]) % self.dims.n
        flat = flatten_many(pts.reshape(-1, self.dims.d), self.dims)
        vals = oracle.read_flat(flat).reshape(pts.shape[:2])
        return vals @ self.time_coeffs

    def dense_time(self) -> np.ndarray:
        """Materialize G as a dense flat array (tests only at desk scale)."""
        out = np.zeros(self.dims.N, dtype=np.complex128)
        flat = flatten_many(self.time_support, self.dims)
        np.add.at(out, flat, self.time_coeffs)
        return out


def build_isolating_filter(tree: SplittingTree, v: Node) -> IsolatingFilter:
    """Construct the (v, T)-isolating filter by tensoring per-coordinate
    filters from the projected trees; identity factors beyond the last
    coordinate the leaf level reaches into."""
    if not v.is_leaf():
        raise ValueError("isolating filters are built at leaves")
    dims = tree.dims
    ln = dims.log2_n
    q_star = math.ceil(v.level / ln) if v.level else 0
    path = tree.path_to(v)
    coord_filters: list[FilterDescriptor | None] = [None] * dims.d
    for q in range(1, q_star + 1):
        proj, node_map = _project_with_map(tree, v, q)
        target = v if q == q_star else path[q * ln]
        coord_filters[q - 1] = filter_preprocess(proj, node_map[id(target)])
    return IsolatingFilter(dims, coord_filters)
