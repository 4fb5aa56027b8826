"""Collision-free seed placements for the penetration-depth walk.

Five strategies: centroid difference, maximally-clear grid configurations
(preprocess over the static body), motion coherence from recent contacts,
random sampling, and a line-search refinement that pulls any seed as close
to the query placement as the free space allows. `auto_seed` cascades them
and keeps the candidate nearest the query.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from .bvh import Body
from .proximity import classify, CollisionStatus, Counters, default_epsilon

DEFAULT_GRID_RESOLUTION = 32
# Grid distances below this multiple of the cell diagonal count as collisions.
SMALL_DIST_FACTOR = 1.5
# Coherence nudge, as a fraction of the combined bounding radii.
NUDGE_FACTOR = 0.05
DEFAULT_LINE_SAMPLES = 16
DEFAULT_RANDOM_TRIES = 64

CLEARANCE_FILE_VERSION = 1


class SeedingError(RuntimeError):
    """No strategy produced a collision-free placement."""


@dataclass(frozen=True)
class ClearanceField:
    """Voxel clearance preprocess of a static body.

    `clear_points` are the surviving locally-maximal-clearance grid points;
    `distances` keeps the full sampled distance field for inspection.
    """

    origin: np.ndarray
    cell: np.ndarray
    resolution: tuple[int, int, int]
    distances: np.ndarray
    clear_points: np.ndarray
    mesh_hash: str


def build_clearance_field(b: Body, resolution=DEFAULT_GRID_RESOLUTION) -> ClearanceField:
    """Voxelize the static body's bounding box and keep the locally maximal
    clearance points.

    Pipeline: sample exact surface distance on the grid; drop small
    distances; drop points beaten by an x- or y-neighbor; drop the box
    boundary layer; finally drop points beaten by any axis neighbor.
    """
    if np.isscalar(resolution):
        resolution = (int(resolution),) * 3
    nx, ny, nz = (int(r) for r in resolution)
    if min(nx, ny, nz) < 4:
        raise ValueError("resolution must be >= 4 per axis")
    mesh = b.mesh
    lo, hi = mesh.aabb_min, mesh.aabb_max
    cell = (hi - lo) / np.array([nx - 1, ny - 1, nz - 1], dtype=np.float64)
    xs = np.linspace(lo[0], hi[0], nx)
    ys = np.linspace(lo[1], hi[1], ny)
    zs = np.linspace(lo[2], hi[2], nz)
    gx, gy, gz = np.meshgrid(xs, ys, zs, indexing="ij")
    points = np.ascontiguousarray(
        np.stack([gx, gy, gz], axis=-1).reshape(-1, 3))
    dist_flat = np.empty(len(points))
    K.mesh_points_distances(*b.bvh.arrays(), points, dist_flat)
    dist = dist_flat.reshape(nx, ny, nz)

    alive = dist >= SMALL_DIST_FACTOR * float(np.linalg.norm(cell))

    def beaten(d, axis):
        """True where a neighbor along the axis has strictly larger distance."""
        worse = np.zeros_like(d, dtype=bool)
        sl_lo = [slice(None)] * 3
        sl_hi = [slice(None)] * 3
        sl_lo[axis] = slice(None, -1)
        sl_hi[axis] = slice(1, None)
        worse[tuple(sl_lo)] |= d[tuple(sl_hi)] > d[tuple(sl_lo)]
        worse[tuple(sl_hi)] |= d[tuple(sl_lo)] > d[tuple(sl_hi)]
        return worse

    alive &= ~(beaten(dist, 0) | beaten(dist, 1))
    boundary = np.zeros_like(alive)
    boundary[0, :, :] = boundary[-1, :, :] = True
    boundary[:, 0, :] = boundary[:, -1, :] = True
    boundary[:, :, 0] = boundary[:, :, -1] = True
    alive &= ~boundary
    alive &= ~(beaten(dist, 0) | beaten(dist, 1) | beaten(dist, 2))

    idx = np.argwhere(alive)
    clear = lo + idx * cell if len(idx) else np.zeros((0, 3))
    return ClearanceField(origin=lo.copy(), cell=cell,
                          resolution=(nx, ny, nz), distances=dist,
                          clear_points=np.ascontiguousarray(clear),
                          mesh_hash=mesh.content_hash())


def save_clearance_field(field: ClearanceField, path) -> None:
    np.savez(path, version=CLEARANCE_FILE_VERSION, origin=field.origin,
             cell=field.cell, resolution=np.array(field.resolution),
             distances=field.distances, clear_points=field.clear_points,
             mesh_hash=np.array(field.mesh_hash))


def load_clearance_field(path, mesh) -> ClearanceField | None:
    """Load a preprocess sidecar; None when missing, stale or mismatched."""
    try:
        data = np.load(path, allow_pickle=False)
    except (OSError, ValueError):
        return None
    try:
        if int(data["version"]) != CLEARANCE_FILE_VERSION:
            return None
        if str(data["mesh_hash"]) != mesh.content_hash():
            return None
        return ClearanceField(
            origin=data["origin"], cell=data["cell"],
            resolution=tuple(int(x) for x in data["resolution"]),
            distances=data["distances"], clear_points=data["clear_points"],
            mesh_hash=str(data["mesh_hash"]))
    except KeyError:
        return None


class CoherenceCache:
    """Ring of the most recent in-contact placements, newest first.

    Single writer: one cache belongs to one simulation stream."""

    def __init__(self, size: int = 3):
        self._ring = collections.deque(maxlen=size)

    def push(self, q, orientation=None) -> None:
        self._ring.appendleft((np.asarray(q, dtype=np.float64).copy(), orientation))

    @property
    def entries(self):
        return list(self._ring)

    def __len__(self):
        return len(self._ring)


def centroid_difference(a: Body, q_in, b: Body) -> np.ndarray:
    """Back the movable body off along the centroid separation far enough
    that the bounding spheres cannot overlap."""
    q_in = np.asarray(q_in, dtype=np.float64)
    o_a = a.mesh.centroid + q_in
    o_b = b.mesh.centroid
    diff = o_a - o_b
    dn = float(np.linalg.norm(diff))
    scale = a.mesh.bounding_radius + b.mesh.bounding_radius
    if dn <= 1e-12 * max(scale, 1.0):
        raise SeedingError("coincident centroids: no separation direction")
    return q_in + scale * diff / dn


def seed_from_clearance(field: ClearanceField, a: Body, q_in, b: Body,
                        eps=None, counters: Counters | None = None):
    """Try clear points nearest the query first; placement puts the movable
    body's centroid at the clear point. None when all candidates collide."""
    if len(field.clear_points) == 0:
        return None
    q_in = np.asarray(q_in, dtype=np.float64)
    candidates = field.clear_points - a.mesh.centroid
    order = np.argsort(np.linalg.norm(candidates - q_in, axis=1), kind="stable")
    for k in order:
        q = candidates[k]
        if classify(a, q, b, eps, counters) is CollisionStatus.Free:
            return q
    return None


def seed_from_coherence(cache: CoherenceCache, a: Body, q_in, b: Body,
                        eps=None, counters: Counters | None = None):
    """Reuse the cached contact placement closest to the query, nudging away
    from the query once if it collides under the current orientation."""
    if cache is None or len(cache) == 0:
        return None
    q_in = np.asarray(q_in, dtype=np.float64)
    qs = [entry[0] for entry in cache.entries]
    q_c = min(qs, key=lambda q: float(np.linalg.norm(q - q_in)))
    if classify(a, q_c, b, eps, counters) is CollisionStatus.Free:
        return q_c
    away = q_c - q_in
    an = float(np.linalg.norm(away))
    if an <= 0.0:
        return None
    q_n = q_c + NUDGE_FACTOR * (a.mesh.bounding_radius + b.mesh.bounding_radius) * away / an
    if classify(a, q_n, b, eps, counters) is CollisionStatus.Free:
        return q_n
    return None


def seed_random(a: Body, b: Body, rng: np.random.Generator,
                max_tries: int = DEFAULT_RANDOM_TRIES,
                eps=None, counters: Counters | None = None):
    """Uniform centroid placements inside the static body's bounding box
    inflated by the combined radii; first free sample wins."""
    if max_tries < 1:
        raise ValueError("max_tries must be >= 1")
    pad = a.mesh.bounding_radius + b.mesh.bounding_radius
    lo = b.mesh.aabb_min - pad
    hi = b.mesh.aabb_max + pad
    for _ in range(max_tries):
        p = rng.uniform(lo, hi)
        q = p - a.mesh.centroid
        if classify(a, q, b, eps, counters) is CollisionStatus.Free:
            return q
    return None


def refine_by_line_search(q_in, q_f0, a: Body, b: Body,
                          samples: int = DEFAULT_LINE_SAMPLES,
                          eps=None, counters: Counters | None = None) -> np.ndarray:
    """First free placement walking from the query toward the seed; never
    farther from the query than the seed itself."""
    q_in = np.asarray(q_in, dtype=np.float64)
    q_f0 = np.asarray(q_f0, dtype=np.float64)
    for k in range(1, samples):
        q = q_in + (k / samples) * (q_f0 - q_in)
        if classify(a, q, b, eps, counters) is CollisionStatus.Free:
            return q
    return q_f0


@dataclass(frozen=True)
class SeedResult:
    q: np.ndarray
    strategy: str


STRATEGIES = ("auto", "coherence", "clearance", "centroid", "random")


def auto_seed(a: Body, q_in, b: Body, cache: CoherenceCache | None = None,
              field: ClearanceField | None = None,
              rng: np.random.Generator | None = None,
              strategy: str = "auto",
              eps=None, line_samples: int = DEFAULT_LINE_SAMPLES,
              random_tries: int = DEFAULT_RANDOM_TRIES,
              counters: Counters | None = None) -> SeedResult:
    """Produce a collision-free seed, line-search refined toward the query.

    With strategy "auto", every available strategy runs in the order
    coherence, clearance, centroid, random and the refined candidate closest
    to the query wins. A named strategy runs alone. Raises SeedingError when
    nothing yields a free placement.
    """
    if strategy not in STRATEGIES:
        raise ValueError(f"unknown strategy {strategy!r} (choose from {STRATEGIES})")
    q_in = np.asarray(q_in, dtype=np.float64)

    def attempt(name):
        try:
            if name == "coherence":
                return seed_from_coherence(cache, a, q_in, b, eps, counters)
            if name == "clearance":
                if field is None:
                    return None
                return seed_from_clearance(field, a, q_in, b, eps, counters)
            if name == "centroid":
                return centroid_difference(a, q_in, b)
            if name == "random":
                if rng is None:
                    return None
                return seed_random(a, b, rng, random_tries, eps, counters)
        except SeedingError:
            return None
        return None

    names = ("coherence", "clearance", "centroid", "random") \
        if strategy == "auto" else (strategy,)
    best = None
    best_name = None
    best_d = np.inf
    for name in names:
        q = attempt(name)
        if q is None:
            continue
        if classify(a, q, b, eps, counters) is not CollisionStatus.Free:
            continue
        q = refine_by_line_search(q_in, q, a, b, line_samples, eps, counters)
        d = float(np.linalg.norm(q - q_in))
        if d < best_d:
            best, best_name, best_d = q, name, d
    if best is None:
        raise SeedingError(
            f"no collision-free seed found (strategy={strategy})")
    return SeedResult(q=best, strategy=best_name)
