"""The penetration-depth walk: alternate out-projection (continuous collision
detection toward the query origin) and in-projection (least-norm solve on the
local contact cone) until an in-contact in-projection stops the descent, then
derive per-region local depths from the global answer."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from . import ccd, lcs, pgs, proximity, seeding
from .bvh import Body
from .proximity import CollisionStatus, Counters, NotInContactError
from .seeding import ClearanceField, CoherenceCache

DEFAULT_MAX_OUTER_ITERS = 64
# Contact-region clustering radius for local depths, in contact tolerances.
CLUSTER_RADIUS_FACTOR = 4.0


class PdFailure(RuntimeError):
    """The walk could not produce any in-contact sample."""


@dataclass
class PdQuery:
    """One penetration-depth query.

    body_a is the movable body with its orientation baked in; `origin` is its
    queried translation. The static body stays at identity. Seeding inputs
    and tunables ride along so batch drivers can reuse caches.
    """

    body_a: Body
    origin: np.ndarray
    body_b: Body
    cache: CoherenceCache | None = None
    clearance: ClearanceField | None = None
    strategy: str = "auto"
    rng: np.random.Generator | None = None
    epsilon: float | None = None
    feature_cap: int = proximity.DEFAULT_FEATURE_CAP
    max_outer_iters: int = DEFAULT_MAX_OUTER_ITERS
    line_samples: int = seeding.DEFAULT_LINE_SAMPLES
    random_tries: int = seeding.DEFAULT_RANDOM_TRIES

    def __post_init__(self):
        self.origin = np.asarray(self.origin, dtype=np.float64)


@dataclass
class TraceEntry:
    q: np.ndarray
    status: CollisionStatus
    pd_candidate: float | None
    out_us: float = 0.0
    in_us: float = 0.0


@dataclass
class PdResult:
    """Penetration-depth answer with its audit trail.

    d translates the movable body out of collision (upper bound on the true
    depth); iterations counts out/in projection rounds; counters expose the
    traversal and solver work."""

    d: np.ndarray
    magnitude: float
    iterations: int
    contact_count: int
    local_pds: list[tuple[np.ndarray, np.ndarray]]
    trace: list[TraceEntry]
    n_bv: int
    n_p: int
    n_g: int
    seed_strategy: str | None
    seed_time_us: float
    time_us: float
    advancement_steps: int = 0
    mdd_evaluations: int = 0
    flagged: bool = False
    converged: bool = True


def local_pds(a: Body, origin, b: Body, d, eps: float | None = None,
              cluster_radius: float | None = None,
              counters: Counters | None = None):
    """Per-region local depths at the separated placement origin + d.

    Contact features are clustered by witness connectivity; each region
    reports (unit normal n_i, d_i) with d_i the projection of d onto n_i.
    Sliding regions (n_i perpendicular to d) get a zero local depth.
    """
    origin = np.asarray(origin, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    if eps is None:
        eps = proximity.default_epsilon(a, b)
    q = origin + d
    feats = proximity.contact_features(a, q, b, eps, origin=origin,
                                       approach=-d if np.linalg.norm(d) > 0 else None,
                                       feature_cap=64, counters=counters)
    if not feats:
        return []
    if cluster_radius is None:
        cluster_radius = CLUSTER_RADIUS_FACTOR * eps
    mids = np.array([0.5 * (f.witness_a + f.witness_b) for f in feats])
    n = len(feats)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(n):
        for j in range(i + 1, n):
            if np.linalg.norm(mids[i] - mids[j]) <= cluster_radius:
                parent[find(i)] = find(j)

    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        normal = np.sum([feats[i].normal for i in members], axis=0)
        ln = float(np.linalg.norm(normal))
        if ln == 0.0:
            normal = feats[members[0]].normal
        else:
            normal = normal / ln
        out.append((normal, float(normal @ d) * normal))
    return out


def compute_pd(query: PdQuery) -> PdResult:
    """Locally optimal upper bound on the translational penetration depth.

    Implements the walk: seed a free placement, out-project it onto the
    contact space toward the origin, project the origin onto the local cone,
    classify, and iterate: free results re-project toward the origin,
    penetrating results re-project from the last contact. The minimum-norm
    in-contact sample seen is the answer.
    """
    t_start = time.perf_counter_ns()
    a, b, o = query.body_a, query.body_b, query.origin
    counters = Counters()
    eps = query.epsilon if query.epsilon is not None else proximity.default_epsilon(a, b)
    rng = query.rng if query.rng is not None else np.random.default_rng(0)

    trace: list[TraceEntry] = []
    zero = PdResult(d=np.zeros(3), magnitude=0.0, iterations=0, contact_count=0,
                    local_pds=[], trace=trace, n_bv=0, n_p=0, n_g=0,
                    seed_strategy=None, seed_time_us=0.0, time_us=0.0)
    status = proximity.classify(a, o, b, eps, counters)
    if status is not CollisionStatus.Penetrating:
        # non-penetrating input: depth is zero by convention
        zero.n_bv, zero.n_p = counters.n_bv, counters.n_p
        zero.time_us = (time.perf_counter_ns() - t_start) / 1e3
        return zero

    t_seed = time.perf_counter_ns()
    seed = seeding.auto_seed(a, o, b, cache=query.cache, field=query.clearance,
                             rng=rng, strategy=query.strategy, eps=eps,
                             line_samples=query.line_samples,
                             random_tries=query.random_tries, counters=counters)
    seed_time_us = (time.perf_counter_ns() - t_seed) / 1e3

    best_q = None
    best_norm = math.inf
    contact_count = 0
    advancement = 0
    mdd_evals = 0
    flagged = False
    converged_all = True
    iterations = 0

    src = seed.q
    tgt = o
    q_contact = None
    for iterations in range(1, query.max_outer_iters + 1):
        t0 = time.perf_counter_ns()
        res = ccd.out_project(a, src, tgt, b, eps, counters)
        advancement += res.advancement_steps
        mdd_evals += res.primitive_tests
        flagged |= res.flagged
        if res.no_contact:
            # numerically unreachable penetrating target; keep the best bound
            flagged = True
            break
        q_contact = res.contact_translation
        norm_c = float(np.linalg.norm(q_contact - o))
        if norm_c < best_norm:
            best_norm, best_q = norm_c, q_contact
        t1 = time.perf_counter_ns()

        approach = tgt - src
        try:
            feats = proximity.contact_features(
                a, q_contact, b, eps, origin=o, approach=approach,
                feature_cap=query.feature_cap, counters=counters)
        except NotInContactError:
            feats = []
        if not feats:
            flagged = True
            break
        contact_count = len(feats)
        space = lcs.build_lcs(feats, feature_cap=query.feature_cap)
        # solve relative to the query origin: min |q - o| s.t. J q >= c
        shifted = lcs.LocalContactSpace(J=space.J, c=space.c - space.J @ o,
                                        features=space.features, kept=space.kept)
        sol = pgs.solve(shifted)
        counters.add(n_g=sol.iterations)
        converged_all &= sol.converged
        q_new = o + sol.q
        status = proximity.classify(a, q_new, b, eps, counters)
        t2 = time.perf_counter_ns()
        norm_new = float(np.linalg.norm(q_new - o))
        trace.append(TraceEntry(q=q_new, status=status,
                                pd_candidate=norm_new if status is CollisionStatus.InContact else None,
                                out_us=(t1 - t0) / 1e3, in_us=(t2 - t1) / 1e3))
        if status is CollisionStatus.InContact:
            if norm_new < best_norm:
                best_norm, best_q = norm_new, q_new
            break
        if status is CollisionStatus.Free:
            src, tgt = q_new, o
        else:
            src, tgt = q_contact, q_new
    else:
        flagged = True  # safety cap: best sample is still a valid upper bound

    if best_q is None:
        raise PdFailure("no in-contact sample produced; cannot bound the depth")

    d = best_q - o
    lp = local_pds(a, o, b, d, eps, counters=counters)
    if query.cache is not None:
        query.cache.push(best_q)
    return PdResult(d=d, magnitude=best_norm, iterations=iterations,
                    contact_count=contact_count, local_pds=lp, trace=trace,
                    n_bv=counters.n_bv, n_p=counters.n_p, n_g=counters.n_g,
                    seed_strategy=seed.strategy, seed_time_us=seed_time_us,
                    time_us=(time.perf_counter_ns() - t_start) / 1e3,
                    advancement_steps=advancement, mdd_evaluations=mdd_evals,
                    flagged=flagged, converged=converged_all)
