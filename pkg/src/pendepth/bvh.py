"""Swept-sphere bounding-volume hierarchies over triangle soups.

Volumes are spheres and capsules (point- and segment-swept spheres); both
are handled by one capsule representation with possibly coincident segment
endpoints. Trees are stored as flat arrays so the compiled kernels can
traverse them without boxing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .mesh import MeshError, TriangleMesh

DEFAULT_LEAF_CAPACITY = 2


class Bvh:
    """Static hierarchy over the non-degenerate triangles of one mesh.

    Immutable after construction; traversal scratch is allocated per query,
    so concurrent queries on a shared tree are safe.
    """

    def __init__(self, mesh: TriangleMesh, leaf_capacity: int = DEFAULT_LEAF_CAPACITY):
        if leaf_capacity < 1:
            raise ValueError("leaf_capacity must be >= 1")
        valid = np.flatnonzero(mesh.valid_triangles)
        if len(valid) == 0:
            raise MeshError("mesh has no non-degenerate triangles")
        self.mesh = mesh
        self.leaf_capacity = leaf_capacity

        tv_all = mesh.vertices[mesh.triangles[valid]]  # (m, 3, 3)
        cent = tv_all.mean(axis=1)
        m = len(valid)
        max_nodes = 2 * m
        self.seg0 = np.zeros((max_nodes, 3))
        self.seg1 = np.zeros((max_nodes, 3))
        self.radius = np.zeros(max_nodes)
        self.left = np.full(max_nodes, -1, dtype=np.int64)
        self.right = np.full(max_nodes, -1, dtype=np.int64)
        self.tri_start = np.zeros(max_nodes, dtype=np.int64)
        self.tri_count = np.zeros(max_nodes, dtype=np.int64)

        order = np.arange(m)
        n_nodes = 1
        stack = [(0, 0, m)]
        while stack:
            node, lo, hi = stack.pop()
            pts = tv_all[order[lo:hi]].reshape(-1, 3)
            self._fit_volume(node, pts)
            if hi - lo <= leaf_capacity:
                self.tri_start[node] = lo
                self.tri_count[node] = hi - lo
                continue
            sub = order[lo:hi]
            c = cent[sub]
            axis = int(np.argmax(c.max(axis=0) - c.min(axis=0)))
            mid = (hi - lo) // 2
            part = np.argpartition(c[:, axis], mid)
            order[lo:hi] = sub[part]
            l, r = n_nodes, n_nodes + 1
            n_nodes += 2
            self.left[node] = l
            self.right[node] = r
            stack.append((l, lo, lo + mid))
            stack.append((r, lo + mid, hi))

        self.n_nodes = n_nodes
        for name in ("seg0", "seg1", "radius", "left", "right", "tri_start", "tri_count"):
            arr = getattr(self, name)[:n_nodes].copy()
            arr.setflags(write=False)
            setattr(self, name, arr)
        self.tri_order = valid[order]
        self.tv = np.ascontiguousarray(tv_all[order])
        self.tri_centers = np.ascontiguousarray(cent[order])
        self.tri_radii = np.linalg.norm(
            self.tv - self.tri_centers[:, None, :], axis=2).max(axis=1)
        for a in (self.tri_order, self.tv, self.tri_centers, self.tri_radii):
            a.setflags(write=False)

    def _fit_volume(self, node: int, pts: np.ndarray):
        lo = pts.min(axis=0)
        hi = pts.max(axis=0)
        center = 0.5 * (lo + hi)
        ext = hi - lo
        axis = int(np.argmax(ext))
        a = center.copy()
        b = center.copy()
        a[axis] = lo[axis]
        b[axis] = hi[axis]
        # every vertex projects inside [lo, hi] on the chosen axis, so its
        # distance to the segment equals its distance to the axis line
        rest = [i for i in range(3) if i != axis]
        r2 = ((pts[:, rest] - center[rest]) ** 2).sum(axis=1).max()
        self.seg0[node] = a
        self.seg1[node] = b
        self.radius[node] = float(np.sqrt(r2))

    def arrays(self):
        return (self.seg0, self.seg1, self.radius, self.left, self.right,
                self.tri_start, self.tri_count, self.tv)

    def node(self, index: int = 0) -> "BvhNode":
        return BvhNode(self, index)

    @property
    def root(self) -> "BvhNode":
        return self.node(0)

    def height(self) -> int:
        h = np.zeros(self.n_nodes, dtype=np.int64)
        for i in range(self.n_nodes - 1, -1, -1):
            if self.left[i] >= 0:
                h[i] = 1 + max(h[self.left[i]], h[self.right[i]])
        return int(h[0])


@dataclass(frozen=True)
class BvhNode:
    """Lightweight view of one node of a Bvh."""

    tree: Bvh
    index: int

    @property
    def segment(self):
        return self.tree.seg0[self.index], self.tree.seg1[self.index]

    @property
    def radius(self) -> float:
        return float(self.tree.radius[self.index])

    @property
    def is_leaf(self) -> bool:
        return self.tree.tri_count[self.index] > 0

    @property
    def children(self):
        if self.is_leaf:
            return ()
        return (BvhNode(self.tree, int(self.tree.left[self.index])),
                BvhNode(self.tree, int(self.tree.right[self.index])))

    @property
    def triangle_range(self):
        """Original triangle indices held by this subtree's leaves."""
        lo, cnt = self._span()
        return self.tree.tri_order[lo:lo + cnt]

    def _span(self):
        if self.is_leaf:
            return int(self.tree.tri_start[self.index]), int(self.tree.tri_count[self.index])
        l_lo, l_cnt = self.children[0]._span()
        r_lo, r_cnt = self.children[1]._span()
        lo = min(l_lo, r_lo)
        return lo, (max(l_lo + l_cnt, r_lo + r_cnt) - lo)

    def contains_point(self, p, tol: float = 1e-9) -> bool:
        a, b = self.segment
        s, t = K.seg_seg_closest(p[0], p[1], p[2], p[0], p[1], p[2],
                                 a[0], a[1], a[2], b[0], b[1], b[2])
        c = a + t * (b - a)
        return float(np.linalg.norm(c - p)) <= self.radius + tol


def build(mesh: TriangleMesh, leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> Bvh:
    """Build a tree for the mesh (top-down median split on the longest extent)."""
    return Bvh(mesh, leaf_capacity)


def node_distance(a: BvhNode, b: BvhNode) -> float:
    """Exact distance between two swept-sphere volumes.

    This is a lower bound on the distance between any triangles the nodes
    enclose; zero when the volumes overlap.
    """
    a0, a1 = a.segment
    b0, b1 = b.segment
    return K.capsule_pair_distance(
        a0[0], a0[1], a0[2], a1[0], a1[1], a1[2], a.radius,
        b0[0], b0[1], b0[2], b1[0], b1[1], b1[2], b.radius)


def node_directional_distance(a: BvhNode, b: BvhNode, v, delta: float | None = None) -> float:
    """Lower bound on the directional distance of a's content toward b along v.

    +inf when the volumes provably never meet along v.
    """
    v = np.asarray(v, dtype=np.float64)
    vn = float(np.linalg.norm(v))
    if vn == 0.0:
        raise ValueError("direction must be non-zero")
    if delta is None:
        delta = 1e-9 * (a.radius + b.radius +
                        float(np.linalg.norm(a.segment[1] - a.segment[0])) +
                        float(np.linalg.norm(b.segment[1] - b.segment[0])) + 1.0)
    a0, a1 = a.segment
    b0, b1 = b.segment
    return K.capsule_pair_mdd(
        a0[0], a0[1], a0[2], a1[0], a1[1], a1[2], a.radius,
        b0[0], b0[1], b0[2], b1[0], b1[1], b1[2], b.radius,
        v[0] / vn, v[1] / vn, v[2] / vn, delta)


@dataclass(frozen=True)
class Body:
    """A mesh with its tree: the unit every proximity query operates on.

    The movable body is stored in its baked (orientation applied) frame and
    positioned by a pure translation at query time.
    """

    mesh: TriangleMesh
    bvh: Bvh

    @classmethod
    def build(cls, mesh: TriangleMesh, leaf_capacity: int = DEFAULT_LEAF_CAPACITY) -> "Body":
        return cls(mesh, Bvh(mesh, leaf_capacity))
