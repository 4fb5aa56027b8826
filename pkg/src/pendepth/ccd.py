"""Translational continuous collision detection by conservative advancement.

The out-projection primitive: advance the movable body along a straight
velocity until first contact, never crossing into penetration. Directional
distances are spatial (measured along the direction), the time of contact
is that distance divided by the velocity magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels as K
from . import proximity
from .bvh import Body
from .proximity import Counters

MAX_PAIR_CA_ITERS = 64


class SourcePenetratingError(RuntimeError):
    """The source placement already penetrates; the time of contact would be
    trivially zero."""


@dataclass
class CcdResult:
    """Outcome of one out-projection.

    toc is None when no contact occurs along the motion (the directional
    distance exceeds the travel). advancement_steps counts all pair-level
    advancement iterations; primitive_tests is the number of pair
    evaluations, so advancement_steps / primitive_tests is the average
    iteration count per pair query.
    """

    toc: float | None
    contact_translation: np.ndarray | None
    mdd: float
    advancement_steps: int
    bv_tests: int
    primitive_tests: int
    flagged: bool = False

    @property
    def no_contact(self) -> bool:
        return self.toc is None

    @property
    def mean_advancement(self) -> float:
        return self.advancement_steps / max(1, self.primitive_tests)


def triangle_mdd(ta, tb, v, delta: float | None = None,
                 max_iters: int = MAX_PAIR_CA_ITERS) -> float:
    """Directional distance between two triangles along v (math.inf if the
    pair never meets along v)."""
    ta = np.ascontiguousarray(ta, dtype=np.float64).reshape(3, 3)
    tb = np.ascontiguousarray(tb, dtype=np.float64).reshape(3, 3)
    v = np.asarray(v, dtype=np.float64)
    vn = float(np.linalg.norm(v))
    if vn == 0.0:
        raise ValueError("velocity must be non-zero")
    if delta is None:
        span = max(np.ptp(ta, axis=0).max(), np.ptp(tb, axis=0).max(), 1e-300)
        delta = 1e-7 * span
    d, _, _ = K.triangle_pair_mdd(ta, tb, v[0] / vn, v[1] / vn, v[2] / vn,
                                  delta, max_iters)
    return float(d)


def contact_delta(a: Body, b: Body, eps: float | None = None) -> float:
    """Advancement stop gap: half the contact tolerance, so advanced
    placements classify in-contact."""
    if eps is None:
        eps = proximity.default_epsilon(a, b)
    return 0.5 * eps


def mdd(a: Body, qa, b: Body, v, eps: float | None = None,
        counters: Counters | None = None) -> float:
    """Minimal directional distance between the bodies along v.

    math.inf when no contact occurs along v. Raises SourcePenetratingError
    when the bodies already interpenetrate at qa.
    """
    return _mdd(a, qa, b, v, eps, counters).mdd


def _mdd(a: Body, qa, b: Body, v, eps: float | None = None,
         counters: Counters | None = None) -> CcdResult:
    qa = np.asarray(qa, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if float(np.linalg.norm(v)) == 0.0:
        raise ValueError("velocity must be non-zero")
    if proximity.penetrates(a, qa, b, counters):
        raise SourcePenetratingError("source placement penetrates")
    delta = contact_delta(a, b, eps)
    value, n_bv, n_p, ca_iters, capped = K.bvh_mdd(
        *a.bvh.arrays(), qa[0], qa[1], qa[2], *b.bvh.arrays(),
        v[0], v[1], v[2], delta, MAX_PAIR_CA_ITERS)
    if counters is not None:
        counters.add(n_bv=n_bv, n_p=n_p)
    return CcdResult(toc=None, contact_translation=None, mdd=float(value),
                     advancement_steps=int(ca_iters), bv_tests=int(n_bv),
                     primitive_tests=int(n_p), flagged=capped > 0)


def out_project(a: Body, q_s, q_t, b: Body, eps: float | None = None,
                counters: Counters | None = None) -> CcdResult:
    """First time of contact moving body a from translation q_s to q_t.

    Returns a no-contact result when the bodies never meet along the motion
    (directional distance exceeds the travel). The contact placement always
    keeps a small positive gap, so it classifies in-contact, and every
    earlier time along the motion is penetration-free.
    """
    q_s = np.asarray(q_s, dtype=np.float64)
    q_t = np.asarray(q_t, dtype=np.float64)
    v = q_t - q_s
    vn = float(np.linalg.norm(v))
    if vn == 0.0:
        raise ValueError("source and target placements coincide")
    res = _mdd(a, q_s, b, v, eps, counters)
    if not math.isfinite(res.mdd) or res.mdd > vn:
        return res
    tau = min(1.0, res.mdd / vn)
    res.toc = tau
    res.contact_translation = q_s + tau * v
    return res
