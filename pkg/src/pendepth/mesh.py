"""Triangle-soup geometry: loading, validation, posing, and cached bulk properties."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class MeshError(ValueError):
    """Malformed or unusable mesh input."""


# Triangles with area below this fraction of bounding_radius**2 are treated
# as zero-area and excluded from proximity queries.
DEGENERATE_AREA_FACTOR = 1e-12


@dataclass(frozen=True)
class Pose:
    """Rigid placement: x -> rotation @ x + translation.

    The rotation must be right-handed orthonormal; it bakes the orientation
    of the movable body before a translational query.
    """

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.rotation, dtype=np.float64).reshape(3, 3)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        if not np.allclose(r.T @ r, np.eye(3), atol=1e-9):
            raise ValueError("rotation is not orthonormal")
        if np.linalg.det(r) < 0.0:
            raise ValueError("rotation is left-handed (determinant < 0)")
        object.__setattr__(self, "rotation", r)
        object.__setattr__(self, "translation", t)

    @classmethod
    def identity(cls) -> "Pose":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def from_quaternion(cls, w: float, x: float, y: float, z: float,
                        translation=(0.0, 0.0, 0.0)) -> "Pose":
        n = math.sqrt(w * w + x * x + y * y + z * z)
        if n == 0.0:
            raise ValueError("zero quaternion")
        w, x, y, z = w / n, x / n, y / n, z / n
        r = np.array([
            [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
            [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
            [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
        ])
        return cls(r, np.asarray(translation, dtype=np.float64))


class TriangleMesh:
    """Indexed triangle soup for one rigid body.

    No manifoldness is required: soups with holes, duplicated faces and
    self-intersections are legal. Zero-area triangles are kept in the index
    buffer but flagged, and every proximity structure skips them.
    """

    def __init__(self, vertices, triangles):
        v = np.ascontiguousarray(np.asarray(vertices, dtype=np.float64).reshape(-1, 3))
        t = np.ascontiguousarray(np.asarray(triangles, dtype=np.int64).reshape(-1, 3))
        if len(v) == 0 or len(t) == 0:
            raise MeshError("empty mesh")
        if t.min() < 0 or t.max() >= len(v):
            raise MeshError(
                f"triangle index out of range (vertices={len(v)}, "
                f"max index={t.max()}, min index={t.min()})"
            )
        self.vertices = v
        self.triangles = t
        self._compute_cached()
        self.vertices.setflags(write=False)
        self.triangles.setflags(write=False)
        self._edge_faces: dict[tuple[int, int], list[int]] | None = None

    def _compute_cached(self):
        v, t = self.vertices, self.triangles
        p0, p1, p2 = v[t[:, 0]], v[t[:, 1]], v[t[:, 2]]
        cross = np.cross(p1 - p0, p2 - p0)
        self.triangle_areas = 0.5 * np.linalg.norm(cross, axis=1)
        tri_centroids = (p0 + p1 + p2) / 3.0
        total_area = self.triangle_areas.sum()
        if total_area > 0.0:
            # Area-weighted triangle-centroid mean: robust to uneven tessellation,
            # and zero-area triangles contribute nothing by construction.
            self.centroid = (self.triangle_areas[:, None] * tri_centroids).sum(axis=0) / total_area
        else:
            self.centroid = v.mean(axis=0)
        self.bounding_radius = float(np.linalg.norm(v - self.centroid, axis=1).max())
        self.mean_vertex_magnitude = float(np.linalg.norm(v, axis=1).mean())
        area_floor = DEGENERATE_AREA_FACTOR * self.bounding_radius ** 2
        self.valid_triangles = self.triangle_areas >= area_floor
        self.aabb_min = v.min(axis=0)
        self.aabb_max = v.max(axis=0)
        for a in (self.triangle_areas, self.centroid, self.valid_triangles,
                  self.aabb_min, self.aabb_max):
            a.setflags(write=False)

    @property
    def num_degenerate(self) -> int:
        return int((~self.valid_triangles).sum())

    def edge_faces(self) -> dict[tuple[int, int], list[int]]:
        """Undirected edge (lo, hi) -> indices of non-degenerate triangles sharing it."""
        if self._edge_faces is None:
            adj: dict[tuple[int, int], list[int]] = {}
            for ti in np.flatnonzero(self.valid_triangles):
                a, b, c = self.triangles[ti]
                for e in ((a, b), (b, c), (c, a)):
                    key = (int(min(e)), int(max(e)))
                    adj.setdefault(key, []).append(int(ti))
            self._edge_faces = adj
        return self._edge_faces

    def content_hash(self) -> str:
        """Stable hash of the geometry, used to key preprocess sidecar files."""
        import hashlib

        h = hashlib.sha256()
        h.update(self.vertices.tobytes())
        h.update(self.triangles.tobytes())
        return h.hexdigest()

    def __repr__(self):
        return (f"TriangleMesh({len(self.vertices)} vertices, "
                f"{len(self.triangles)} triangles)")


def apply_pose(mesh: TriangleMesh, pose: Pose) -> TriangleMesh:
    """Return a copy of the mesh with vertices mapped through the pose."""
    v = mesh.vertices @ pose.rotation.T + pose.translation
    return TriangleMesh(v, mesh.triangles)


def load_obj(path) -> TriangleMesh:
    """Load a Wavefront OBJ file (geometry only).

    Polygons with more than three vertices are fan-triangulated. Normals,
    texture coordinates, materials and groups are ignored. Indices may be
    1-based or negative per the OBJ convention.
    """
    vertices: list[list[float]] = []
    faces: list[list[int]] = []
    with open(path, "r", encoding="utf-8", errors="replace") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: vertex record needs 3 coordinates")
                try:
                    vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
                except ValueError as exc:
                    raise MeshError(f"{path}:{lineno}: bad vertex coordinate") from exc
            elif tag == "f":
                if len(parts) < 4:
                    raise MeshError(f"{path}:{lineno}: face record needs >= 3 vertices")
                idx = []
                for token in parts[1:]:
                    head = token.split("/")[0]
                    try:
                        i = int(head)
                    except ValueError as exc:
                        raise MeshError(f"{path}:{lineno}: bad face index {token!r}") from exc
                    if i > 0:
                        i -= 1
                    elif i < 0:
                        i += len(vertices)
                    else:
                        raise MeshError(f"{path}:{lineno}: face index 0 is invalid")
                    idx.append(i)
                for k in range(1, len(idx) - 1):
                    faces.append([idx[0], idx[k], idx[k + 1]])
            # everything else (vn, vt, o, g, s, usemtl, mtllib, ...) is skipped
    if not vertices or not faces:
        raise MeshError(f"{path}: no geometry found")
    f = np.asarray(faces, dtype=np.int64)
    if f.min() < 0 or f.max() >= len(vertices):
        raise MeshError(
            f"{path}: face index out of range (have {len(vertices)} vertices, "
            f"indices span [{f.min() + 1}, {f.max() + 1}])"
        )
    return TriangleMesh(np.asarray(vertices), f)


def save_obj(mesh: TriangleMesh, path) -> None:
    """Write the mesh as ASCII OBJ (used by the benchmark tooling)."""
    with open(path, "w", encoding="utf-8") as fh:
        for v in mesh.vertices:
            fh.write(f"v {v[0]!r} {v[1]!r} {v[2]!r}\n")
        for t in mesh.triangles:
            fh.write(f"f {t[0] + 1} {t[1] + 1} {t[2] + 1}\n")
