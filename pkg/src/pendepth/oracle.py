"""Independent ground-truth penetration depth for validation.

Exact for convex inputs via the convex hull of pairwise vertex differences;
near-exact for arbitrary soups via dense directional sampling with naive
all-pairs advancement (no shared code with the tree-based query path).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import ConvexHull

from . import _naive
from .mesh import TriangleMesh

CONVEXITY_TOL_FACTOR = 1e-9
DEFAULT_DIRECTIONS = 1024
SAMPLING_DELTA_FACTOR = 1e-7
SAMPLING_CA_ITERS = 128


class NonConvexError(ValueError):
    """Input mesh is not convex within tolerance."""


@dataclass(frozen=True)
class OracleResult:
    pd_vector: np.ndarray
    magnitude: float
    method: str  # "convex_hull" or "directional_sampling"
    direction_count: int | None = None


def _mesh_of(obj) -> TriangleMesh:
    return obj.mesh if hasattr(obj, "mesh") else obj


def is_convex(mesh: TriangleMesh, tol: float | None = None) -> bool:
    """Every vertex lies on the boundary of its own hull, within tolerance."""
    if tol is None:
        tol = CONVEXITY_TOL_FACTOR * mesh.bounding_radius
    hull = ConvexHull(mesh.vertices)
    # hull planes: eq . x + off <= 0 inside; boundary distance of an interior
    # point is min over planes of -(eq . x + off)
    plane_vals = mesh.vertices @ hull.equations[:, :3].T + hull.equations[:, 3]
    inner_depth = -plane_vals.max(axis=1)
    return bool(inner_depth.max() <= tol)


def convex_pd(a, qa, b) -> OracleResult:
    """Exact depth for convex inputs: distance from the queried translation
    to the boundary of the hull of pairwise vertex differences."""
    ma, mb = _mesh_of(a), _mesh_of(b)
    qa = np.asarray(qa, dtype=np.float64)
    for name, m in (("a", ma), ("b", mb)):
        if not is_convex(m):
            raise NonConvexError(f"mesh {name} is not convex")
    diffs = (mb.vertices[None, :, :] - ma.vertices[:, None, :]).reshape(-1, 3)
    hull = ConvexHull(diffs)
    normals = hull.equations[:, :3]
    offsets = hull.equations[:, 3]
    vals = normals @ qa + offsets  # <= 0 inside for all facets
    if vals.max() >= 0.0:
        return OracleResult(pd_vector=np.zeros(3), magnitude=0.0,
                            method="convex_hull")
    depths = -vals
    k = int(np.argmin(depths))
    return OracleResult(pd_vector=depths[k] * normals[k],
                        magnitude=float(depths[k]), method="convex_hull")


def spiral_directions(n: int) -> np.ndarray:
    """First n unit directions of a low-discrepancy spherical sequence.

    Prefix-nested: the first m < n directions of a larger set are exactly
    spiral_directions(m), so refining the count can only tighten a minimum
    taken over the set.
    """
    if n < 1:
        raise ValueError("need at least one direction")
    k = np.arange(n)
    g = 1.324717957244746  # real root of x^3 = x + 1
    z = 2.0 * ((0.5 + k / g) % 1.0) - 1.0
    az = 2.0 * math.pi * ((0.5 + k / g ** 2) % 1.0)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    return np.ascontiguousarray(
        np.stack([r * np.cos(az), r * np.sin(az), z], axis=1))


def _world_triangles(mesh: TriangleMesh) -> np.ndarray:
    valid = np.flatnonzero(mesh.valid_triangles)
    return np.ascontiguousarray(mesh.vertices[mesh.triangles[valid]])


def sampled_pd(a, qa, b, directions: int = DEFAULT_DIRECTIONS) -> OracleResult:
    """Upper bound on the depth from dense directional sampling.

    For each direction the movable body starts at a provably free placement
    and advances back toward the query; the last contact along the direction
    is a certified separating translation. Minimum over directions.
    """
    if directions < 64:
        raise ValueError("use at least 64 directions")
    ma, mb = _mesh_of(a), _mesh_of(b)
    qa = np.asarray(qa, dtype=np.float64)
    tva = _world_triangles(ma)
    tvb = _world_triangles(mb)
    scale = ma.bounding_radius + mb.bounding_radius
    s_free = 2.0 * scale + float(np.linalg.norm(ma.centroid + qa - mb.centroid))
    dirs = spiral_directions(directions)
    best, best_k = _naive.sampled_pd_scan(
        tva, tvb, qa[0], qa[1], qa[2], dirs, s_free,
        SAMPLING_DELTA_FACTOR * scale, SAMPLING_CA_ITERS)
    return OracleResult(pd_vector=float(best) * dirs[best_k],
                        magnitude=float(best), method="directional_sampling",
                        direction_count=directions)


def relative_error(pd_approx: float, pd_exact: float, a, b) -> float:
    """Size-normalized depth error: |approx - exact| over twice the sum of
    the mean vertex magnitudes of the two bodies (a fraction, not percent)."""
    ma, mb = _mesh_of(a), _mesh_of(b)
    denom = 2.0 * ma.mean_vertex_magnitude + 2.0 * mb.mean_vertex_magnitude
    if denom <= 0.0:
        raise ZeroDivisionError("degenerate meshes: zero mean vertex magnitude")
    return abs(float(pd_approx) - float(pd_exact)) / denom
