"""Threshold pruning of splitting trees and the Hamming-ball lower bound.

One pruning round selects every leaf whose weight (number of branching
ancestors) is at most the threshold, then removes each together with its
chain of single-child ancestors. The simulator runs on the collapsed tree
(branching nodes and leaves only), where a leaf's weight is simply its depth;
this is exact and lets domains as large as 2^64 be handled, since the
collapsed tree size is governed by the leaf count alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

from .core import Dims
from .tree import Node, SplittingTree, build_tree

__all__ = [
    "PruneTrace",
    "PruneStallError",
    "hamming_ball",
    "build_hamming_tree",
    "prune",
    "verify_lower_bound",
    "lower_bound",
    "LowerBoundResult",
]


class PruneStallError(RuntimeError):
    """No leaf is below the threshold; the process would never terminate."""


@dataclass(frozen=True)
class PruneTrace:
    rounds: int
    per_round_removals: tuple

    @property
    def total_removed(self) -> int:
        return sum(self.per_round_removals)


def hamming_ball(log_n: int, c: int) -> list[int]:
    """All integers below 2^log_n with at most c ones in binary."""
    if not 0 <= c <= log_n <= 30:
        raise ValueError("hamming_ball requires 0 <= c <= log_n <= 30")
    out = []
    for j in range(c + 1):
        for bits in combinations(range(log_n), j):
            out.append(sum(1 << b for b in bits))
    return sorted(out)


def build_hamming_tree(log_n: int, c: int) -> SplittingTree:
    """The splitting tree of the Hamming ball, built by its recursive
    structure (a spine with lower-radius copies hung on it), so leaf
    enumeration is never required."""
    if not 0 <= c <= log_n:
        raise ValueError("need 0 <= c <= log_n")
    if log_n < 1:
        raise ValueError("log_n must be at least 1")
    tree = SplittingTree(Dims(1 << log_n, 1))
    root = tree.make_root()
    _grow_hamming(tree, root, c, log_n)
    return tree


def _grow_hamming(tree: SplittingTree, node: Node, c: int, height: int) -> None:
    """Hang the radius-c structure of the given height below ``node``."""
    spine = node
    for j in range(height):
        nxt = tree.add_child(spine, "right")
        if c > 0:
            left = tree.add_child(spine, "left")
            _grow_hamming(tree, left, c - 1, height - j - 1)
        spine = nxt


class _CNode:
    __slots__ = ("children", "is_leaf", "mark")

    def __init__(self, is_leaf: bool):
        self.children: list[_CNode] = []
        self.is_leaf = is_leaf
        self.mark = False


def _collapse(tree: SplittingTree) -> "_CNode | None":
    """Contract single-child chains; keep leaves and branching nodes only."""
    if tree.root is None:
        return None

    def rec(v: Node) -> _CNode:
        while v.n_children() == 1:
            v = v.children()[0]
        if v.is_leaf():
            return _CNode(True)
        out = _CNode(False)
        out.children = [rec(c) for c in v.children()]
        return out

    return rec(tree.root)


def prune(tree: SplittingTree, tau: int) -> PruneTrace:
    """Run the pruning process to completion and return the round counts.

    Weights are evaluated against the tree as it stood at the start of each
    round, so the removal order within a round does not affect the result.
    Raises PruneStallError if a round removes nothing while leaves remain.
    """
    if tau < 0:
        raise ValueError("threshold must be nonnegative")
    root = _collapse(tree)
    removals = []
    while root is not None:
        removed = _mark_round(root, tau)
        if removed == 0:
            raise PruneStallError(
                f"no leaf of weight <= {tau} exists; the process stalls"
            )
        removals.append(removed)
        root = _rebuild(root)
    return PruneTrace(rounds=len(removals), per_round_removals=tuple(removals))


def _mark_round(root: _CNode, tau: int) -> int:
    """Mark all leaves of weight (= collapsed depth) at most tau."""
    count = 0
    stack = [(root, 0)]
    while stack:
        node, depth = stack.pop()
        if node.is_leaf:
            if depth <= tau:
                node.mark = True
                count += 1
        else:
            stack.extend((c, depth + 1) for c in node.children)
    return count


def _rebuild(root: _CNode) -> "_CNode | None":
    """Drop marked leaves; internal nodes left childless vanish with their
    chains, and unary nodes are spliced out."""

    def rec(node: _CNode) -> "_CNode | None":
        if node.is_leaf:
            return None if node.mark else node
        kids = [k for k in (rec(c) for c in node.children) if k is not None]
        if not kids:
            return None
        if len(kids) == 1:
            return kids[0]
        node.children = kids
        return node

    return rec(root)


def lower_bound(log_n: int, c: int, tau: int) -> float:
    """(log2 n)^c / (c! tau^c); the proven floor on the number of rounds."""
    if c == 0:
        return 1.0
    if tau < 1:
        raise ValueError("threshold must be positive when c > 0")
    return log_n**c / (math.factorial(c) * tau**c)


@dataclass(frozen=True)
class LowerBoundResult:
    log_n: int
    c: int
    tau: int
    leaves: int
    rounds: int
    bound: float
    holds: bool
    monotonicity_ok: bool | None = None

    def to_row(self):
        return (self.log_n, self.c, self.tau, self.leaves, self.rounds, self.bound, self.holds)


def verify_lower_bound(
    log_n: int, c: int, tau: int, monotonicity_trials: int = 0, seed: int = 0
) -> LowerBoundResult:
    """Simulate the pruning process on the Hamming tree and compare the exact
    round count against the analytic bound; optionally spot-check the
    monotonicity of round counts under random subtrees."""
    tree = build_hamming_tree(log_n, c)
    leaves = tree.num_leaves()
    rounds = prune(tree, tau).rounds
    bound = lower_bound(log_n, c, tau)
    mono: bool | None = None
    if monotonicity_trials > 0:
        import random

        rnd = random.Random(seed)
        labels = tree.leaf_labels()
        mono = True
        for _ in range(monotonicity_trials):
            m = rnd.randint(1, len(labels))
            sub = rnd.sample(labels, m)
            sub_rounds = prune(build_tree(sub, tree.dims), tau).rounds
            if sub_rounds > rounds:
                mono = False
                break
    return LowerBoundResult(log_n, c, tau, leaves, rounds, bound, rounds >= bound, mono)
