"""Static proximity queries between two bodies: collision classification,
minimum distance, and contact-feature enumeration at an in-contact placement.

Every contact feature carries the contact-plane constraint row (j, c) used
by the local contact space: the plane passes through the queried placement,
and the free side satisfies j . q >= c.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels as K
from .bvh import Body

# Default contact tolerance as a fraction of the larger bounding radius.
EPSILON_FACTOR = 1e-5
DEFAULT_FEATURE_CAP = 16
# Plane dedup: angular tolerance (radians) and bias tolerance factor
# (times the larger bounding radius).
DEDUP_ANGLE = 1e-6
DEDUP_BIAS_FACTOR = 1e-7
# Barycentric tolerance for deciding vertex/edge/face witness regions.
BARY_TOL = 1e-6


class NotInContactError(RuntimeError):
    """Raised when an operation requires an in-contact placement."""


class CollisionStatus(enum.Enum):
    Free = "free"
    InContact = "in_contact"
    Penetrating = "penetrating"


@dataclass
class Counters:
    """Work counters accumulated across a query: volume pair tests,
    primitive pair tests and solver sweeps."""

    n_bv: int = 0
    n_p: int = 0
    n_g: int = 0

    def add(self, n_bv=0, n_p=0, n_g=0):
        self.n_bv += int(n_bv)
        self.n_p += int(n_p)
        self.n_g += int(n_g)


@dataclass
class ContactFeature:
    """One primitive contact (vertex-face, face-vertex or edge-edge).

    witness points are in world coordinates at the queried placement;
    `normal` is the unit contact normal oriented from the static body toward
    the movable one; (plane_row, plane_bias) is the contact-plane constraint
    in configuration (translation) space.
    """

    kind: str  # "VF", "FV" or "EE"
    index_a: object
    index_b: object
    witness_a: np.ndarray
    witness_b: np.ndarray
    normal: np.ndarray
    plane_row: np.ndarray
    plane_bias: float
    distance: float = 0.0


def default_epsilon(a, b) -> float:
    """Contact tolerance: a small fraction of the larger bounding radius.
    Accepts bodies or bare meshes."""
    ma = a.mesh if hasattr(a, "mesh") else a
    mb = b.mesh if hasattr(b, "mesh") else b
    return EPSILON_FACTOR * max(ma.bounding_radius, mb.bounding_radius)


def min_distance(a: Body, qa, b: Body, counters: Counters | None = None) -> float:
    """Exact minimum triangle-pair distance; zero when touching or crossing."""
    d, _pen = _distance_status(a, qa, b, counters)
    return d


def _distance_status(a: Body, qa, b: Body, counters: Counters | None = None):
    qa = np.asarray(qa, dtype=np.float64)
    d, pen, n_bv, n_p = K.bvh_min_distance(*a.bvh.arrays(), qa[0], qa[1], qa[2],
                                           *b.bvh.arrays())
    if counters is not None:
        counters.add(n_bv=n_bv, n_p=n_p)
    return float(d), bool(pen)


def penetrates(a: Body, qa, b: Body, counters: Counters | None = None) -> bool:
    """True when any triangle pair crosses transversally (touching is not
    penetration)."""
    qa = np.asarray(qa, dtype=np.float64)
    hit, n_bv, n_p = K.bvh_penetrates(*a.bvh.arrays(), qa[0], qa[1], qa[2],
                                      *b.bvh.arrays())
    if counters is not None:
        counters.add(n_bv=n_bv, n_p=n_p)
    return bool(hit)


def classify(a: Body, qa, b: Body, eps: float | None = None,
             counters: Counters | None = None) -> CollisionStatus:
    """Penetrating / InContact / Free at translation qa of body a."""
    if eps is None:
        eps = default_epsilon(a, b)
    d, pen = _distance_status(a, qa, b, counters)
    if pen:
        return CollisionStatus.Penetrating
    if d <= eps:
        return CollisionStatus.InContact
    return CollisionStatus.Free


def _tri_region(p, tri):
    """Locate p on the triangle: ('V', i), ('E', i) for edge (i, i+1), or ('F', 0)."""
    v0 = tri[1] - tri[0]
    v1 = tri[2] - tri[0]
    v2 = p - tri[0]
    d00 = float(v0 @ v0)
    d01 = float(v0 @ v1)
    d11 = float(v1 @ v1)
    d20 = float(v2 @ v0)
    d21 = float(v2 @ v1)
    denom = d00 * d11 - d01 * d01
    if denom <= 0.0:
        return ("V", 0)
    b1 = (d11 * d20 - d01 * d21) / denom
    b2 = (d00 * d21 - d01 * d20) / denom
    bary = np.array([1.0 - b1 - b2, b1, b2])
    small = bary <= BARY_TOL
    n_small = int(small.sum())
    if n_small >= 2:
        return ("V", int(np.argmax(bary)))
    if n_small == 1:
        zero_at = int(np.argmax(small))
        return ("E", (zero_at + 1) % 3)
    return ("F", 0)


def _tri_normal(tri):
    n = np.cross(tri[1] - tri[0], tri[2] - tri[0])
    ln = np.linalg.norm(n)
    return n / ln if ln > 0.0 else np.array([0.0, 0.0, 1.0])


def _edge_key(tri_indices, local_edge):
    i = int(tri_indices[local_edge])
    j = int(tri_indices[(local_edge + 1) % 3])
    return (min(i, j), max(i, j))


def contact_features(a: Body, qa, b: Body, eps: float | None = None,
                     origin=None, approach=None,
                     feature_cap: int = DEFAULT_FEATURE_CAP,
                     counters: Counters | None = None) -> list[ContactFeature]:
    """All primitive contact features within eps at an in-contact placement.

    Vertex-vertex and collinear edge-edge pairs are dropped; vertex-edge
    pairs expand into one vertex-face contact per face sharing the edge.
    Duplicate planes merge, the result is sorted by plane distance from
    `origin` (the penetration-query origin; defaults to qa) and truncated
    to feature_cap entries.
    """
    qa = np.asarray(qa, dtype=np.float64)
    if eps is None:
        eps = default_epsilon(a, b)
    if origin is None:
        origin = qa
    origin = np.asarray(origin, dtype=np.float64)
    status = classify(a, qa, b, eps, counters)
    if status is not CollisionStatus.InContact:
        raise NotInContactError(f"placement classifies {status.value}, not in contact")

    cap = 4096
    while True:
        out_i = np.empty(cap, dtype=np.int64)
        out_j = np.empty(cap, dtype=np.int64)
        out_d = np.empty(cap, dtype=np.float64)
        count, n_bv, n_p = K.bvh_close_pairs(
            *a.bvh.arrays(), qa[0], qa[1], qa[2], *b.bvh.arrays(),
            eps, out_i, out_j, out_d)
        if counters is not None:
            counters.add(n_bv=n_bv, n_p=n_p)
        if count <= cap:
            break
        cap = 2 * count
    pairs = [(int(out_i[k]), int(out_j[k])) for k in range(count)]

    scale = max(a.mesh.bounding_radius, b.mesh.bounding_radius)
    centroid_a_world = a.mesh.centroid + qa
    if approach is not None:
        approach = np.asarray(approach, dtype=np.float64)

    raw: list[ContactFeature] = []
    for slot_a, slot_b in pairs:
        tri_a = a.bvh.tv[slot_a] + qa
        tri_b = b.bvh.tv[slot_b]
        d, wax, way, waz, wbx, wby, wbz = K.tri_tri_distance(tri_a, tri_b)
        wa = np.array([wax, way, waz])
        wb = np.array([wbx, wby, wbz])
        ra = _tri_region(wa, tri_a)
        rb = _tri_region(wb, tri_b)
        ta_idx = int(a.bvh.tri_order[slot_a])
        tb_idx = int(b.bvh.tri_order[slot_b])
        tris_a = a.mesh.triangles[ta_idx]
        tris_b = b.mesh.triangles[tb_idx]

        def emit(kind, idx_a, idx_b, normal):
            n = _orient(normal, wa, wb, approach, centroid_a_world, scale)
            if n is None:
                return
            raw.append(ContactFeature(
                kind=kind, index_a=idx_a, index_b=idx_b,
                witness_a=wa, witness_b=wb, normal=n,
                plane_row=n, plane_bias=float(n @ qa), distance=d))

        if ra[0] == "V" and rb[0] == "V":
            continue  # pointlike contact: projection cannot improve on it
        if rb[0] == "F":
            # vertex-, edge- or face-on-face: the face plane constrains
            emit("VF", int(tris_a[ra[1]]) if ra[0] == "V" else ta_idx,
                 tb_idx, _tri_normal(tri_b))
        elif ra[0] == "F":
            emit("FV", ta_idx,
                 int(tris_b[rb[1]]) if rb[0] == "V" else tb_idx,
                 _tri_normal(tri_a))
        elif ra[0] == "E" and rb[0] == "E":
            ea = tri_a[(ra[1] + 1) % 3] - tri_a[ra[1]]
            eb = tri_b[(rb[1] + 1) % 3] - tri_b[rb[1]]
            n = np.cross(ea, eb)
            ln = np.linalg.norm(n)
            if ln <= 1e-9 * np.linalg.norm(ea) * np.linalg.norm(eb):
                continue  # collinear edges: degenerate plane
            emit("EE", _edge_key(tris_a, ra[1]), _edge_key(tris_b, rb[1]), n / ln)
        elif ra[0] == "V" and rb[0] == "E":
            # expand into one VF per static face sharing the edge
            key = _edge_key(tris_b, rb[1])
            for fb in b.mesh.edge_faces().get(key, ()):
                emit("VF", int(tris_a[ra[1]]), int(fb),
                     _tri_normal(b.mesh.vertices[b.mesh.triangles[fb]]))
        elif ra[0] == "E" and rb[0] == "V":
            key = _edge_key(tris_a, ra[1])
            for fa in a.mesh.edge_faces().get(key, ()):
                emit("FV", int(fa), int(tris_b[rb[1]]),
                     _tri_normal(a.mesh.vertices[a.mesh.triangles[fa]] + qa))

    raw.sort(key=lambda f: abs(float(f.plane_row @ origin) - f.plane_bias))
    dedup: list[ContactFeature] = []
    bias_tol = DEDUP_BIAS_FACTOR * scale
    cos_tol = 1.0 - 0.5 * DEDUP_ANGLE * DEDUP_ANGLE
    for f in raw:
        merged = False
        for kept in dedup:
            if float(f.plane_row @ kept.plane_row) >= cos_tol and \
                    abs(f.plane_bias - kept.plane_bias) <= bias_tol:
                merged = True
                break
        if not merged:
            dedup.append(f)
            if len(dedup) >= feature_cap:
                break
    return dedup


def _orient(normal, wa, wb, approach, centroid_a_world, scale):
    """Orient the candidate normal from the static body toward the movable one."""
    n = np.asarray(normal, dtype=np.float64)
    sep = wa - wb
    s = float(n @ sep)
    if abs(s) > 1e-12 * scale:
        return n if s > 0.0 else -n
    if approach is not None:
        s = float(n @ approach)
        if abs(s) > 0.0:
            return -n if s > 0.0 else n
    s = float(n @ (centroid_a_world - wb))
    if s != 0.0:
        return n if s > 0.0 else -n
    return n
