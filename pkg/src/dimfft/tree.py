"""Labeled binary subtrees of the full FFT computation tree.

A node at level ``j`` carries a label in ``[2^j]``, the residue class modulo
``2^j`` it represents. The right child of a level-``j`` node keeps the parent
label; the left child adds ``2^j``. Trees live over the flattened domain
``[N]``; d-dimensional semantics come from unflattening labels.
"""

from __future__ import annotations

import numpy as np

from .core import Dims, unflatten, unflatten_many

__all__ = [
    "Node",
    "SplittingTree",
    "build_tree",
    "remove_leaf",
    "leaf_weight",
    "min_weight_leaf",
    "frequency_cone",
    "FrequencyCone",
]


class Node:
    __slots__ = ("label", "level", "parent", "left", "right")

    def __init__(self, label: int, level: int, parent: "Node | None" = None):
        self.label = label
        self.level = level
        self.parent = parent
        self.left: Node | None = None
        self.right: Node | None = None

    def children(self):
        return [c for c in (self.right, self.left) if c is not None]

    def n_children(self) -> int:
        return (self.right is not None) + (self.left is not None)

    def is_leaf(self) -> bool:
        return self.left is None and self.right is None

    def __repr__(self):
        return f"Node(label={self.label}, level={self.level})"


class SplittingTree:
    """Subtree of the full binary tree of height log2(N), with a leaf registry."""

    def __init__(self, dims: Dims):
        self.dims = dims
        self.height = dims.log2_N
        self.root: Node | None = None
        self._leaves: set[Node] = set()

    def __bool__(self) -> bool:
        return self.root is not None

    def leaves(self) -> list[Node]:
        return sorted(self._leaves, key=lambda v: (v.level, v.label))

    def num_leaves(self) -> int:
        return len(self._leaves)

    def leaf_labels(self) -> list[int]:
        return sorted(v.label for v in self._leaves)

    def make_root(self) -> Node:
        if self.root is not None:
            raise ValueError("tree already has a root")
        self.root = Node(0, 0)
        self._leaves.add(self.root)
        return self.root

    def add_child(self, v: Node, side: str) -> Node:
        """Attach a child to v: 'right' keeps the label, 'left' adds 2^level."""
        if v.level >= self.height:
            raise ValueError("cannot expand a node at full depth")
        if side == "right":
            if v.right is not None:
                raise ValueError("right child already present")
            child = Node(v.label, v.level + 1, v)
            v.right = child
        elif side == "left":
            if v.left is not None:
                raise ValueError("left child already present")
            child = Node(v.label + (1 << v.level), v.level + 1, v)
            v.left = child
        else:
            raise ValueError(f"side must be 'left' or 'right', not {side!r}")
        self._leaves.discard(v)
        self._leaves.add(child)
        return child

    def detach_child(self, v: Node, child: Node) -> None:
        """Remove a leaf child of v without touching the chain above v."""
        if not child.is_leaf():
            raise ValueError("can only detach a leaf child")
        if v.right is child:
            v.right = None
        elif v.left is child:
            v.left = None
        else:
            raise ValueError("node is not a child of v")
        child.parent = None
        self._leaves.discard(child)
        if v.is_leaf():
            self._leaves.add(v)

    def path_to(self, v: Node) -> list[Node]:
        """Nodes from the root down to v inclusive."""
        path = []
        while v is not None:
            path.append(v)
            v = v.parent
        path.reverse()
        if path[0] is not self.root:
            raise ValueError("node does not belong to this tree")
        return path

    def iter_nodes(self):
        if self.root is None:
            return
        stack = [self.root]
        while stack:
            v = stack.pop()
            yield v
            stack.extend(v.children())

    def find_leaf(self, label: int) -> Node:
        for v in self._leaves:
            if v.label == label:
                return v
        raise KeyError(f"no leaf labeled {label}")

    def copy(self) -> "SplittingTree":
        out = SplittingTree(self.dims)
        if self.root is None:
            return out
        out.root = Node(self.root.label, self.root.level)
        stack = [(self.root, out.root)]
        while stack:
            src, dst = stack.pop()
            if src.is_leaf():
                out._leaves.add(dst)
            for side in ("right", "left"):
                c = getattr(src, side)
                if c is not None:
                    nc = Node(c.label, c.level, dst)
                    setattr(dst, side, nc)
                    stack.append((c, nc))
        return out

    def structurally_equal(self, other: "SplittingTree") -> bool:
        def eq(a, b):
            if a is None or b is None:
                return a is b
            return (
                a.label == b.label
                and a.level == b.level
                and eq(a.right, b.right)
                and eq(a.left, b.left)
            )

        return self.height == other.height and eq(self.root, other.root)

    def to_dot(self) -> str:
        """DOT export with node labels written in binary (level many bits)."""
        lines = ["digraph splitting_tree {", "  node [shape=circle];"]
        ids = {}
        for i, v in enumerate(self.iter_nodes()):
            ids[id(v)] = i
            text = format(v.label, f"0{v.level}b") if v.level else "r"
            shape = ', shape=doublecircle' if v.is_leaf() else ""
            lines.append(f'  n{i} [label="{text}"{shape}];')
        for v in self.iter_nodes():
            for c in v.children():
                lines.append(f"  n{ids[id(v)]} -> n{ids[id(c)]};")
        lines.append("}")
        return "\n".join(lines)


def build_tree(support, dims: Dims) -> SplittingTree:
    """Splitting tree of a support set: the level-j node with label b exists
    iff some element of the support is congruent to b mod 2^j."""
    S = sorted({int(s) for s in support})
    if not S:
        raise ValueError("support must be nonempty")
    if S[0] < 0 or S[-1] >= dims.N:
        raise ValueError("support element out of range [0, N)")
    tree = SplittingTree(dims)
    root = tree.make_root()
    stack = [(root, S)]
    while stack:
        v, S_v = stack.pop()
        if v.level == tree.height:
            continue
        bit = 1 << v.level
        right_set = [s for s in S_v if not (s & bit)]
        left_set = [s for s in S_v if s & bit]
        if right_set:
            stack.append((tree.add_child(v, "right"), right_set))
        if left_set:
            stack.append((tree.add_child(v, "left"), left_set))
    return tree


def remove_leaf(tree: SplittingTree, v: Node) -> SplittingTree:
    """Remove leaf v together with its chain of single-child ancestors,
    up to (and excluding) the nearest ancestor with two children."""
    if not v.is_leaf():
        raise ValueError("remove_leaf requires a leaf")
    path = tree.path_to(v)
    keep = None
    for u in path[:-1]:
        if u.n_children() == 2:
            keep = u
    tree._leaves.discard(v)
    if keep is None:
        tree.root = None
        tree._leaves.clear()
        return tree
    # the chain hangs off whichever side of `keep` leads to v
    idx = path.index(keep)
    top = path[idx + 1]
    if keep.right is top:
        keep.right = None
    else:
        keep.left = None
    top.parent = None
    if keep.is_leaf():
        tree._leaves.add(keep)
    return tree


def leaf_weight(tree: SplittingTree, v: Node) -> int:
    """Number of strictly proper ancestors of v having two children."""
    w = 0
    u = v.parent
    while u is not None:
        if u.n_children() == 2:
            w += 1
        u = u.parent
    return w


def min_weight_leaf(tree: SplittingTree) -> Node:
    """A leaf of minimal weight; ties broken by smallest label."""
    if tree.root is None:
        raise ValueError("tree is empty")
    return min(tree._leaves, key=lambda v: (leaf_weight(tree, v), v.label))


class FrequencyCone:
    """Frequencies congruent to a node's label modulo 2^level."""

    def __init__(self, dims: Dims, label: int, level: int):
        self.dims = dims
        self.label = label
        self.level = level
        self.modulus = 1 << level

    def contains(self, f) -> bool:
        from .core import flatten

        return flatten(f, self.dims) % self.modulus == self.label

    def contains_flat(self, v: int) -> bool:
        return int(v) % self.modulus == self.label

    def enumerate_flat(self) -> np.ndarray:
        if self.dims.N > 4096:
            raise ValueError("cone enumeration is limited to N <= 4096")
        return np.arange(self.label, self.dims.N, self.modulus, dtype=np.int64)

    def enumerate(self) -> np.ndarray:
        return unflatten_many(self.enumerate_flat(), self.dims)

    def __iter__(self):
        for v in self.enumerate_flat():
            yield unflatten(int(v), self.dims)


def frequency_cone(tree: SplittingTree, v: Node) -> FrequencyCone:
    return FrequencyCone(tree.dims, v.label, v.level)
