"""Compiled geometry kernels: triangle primitives, swept-sphere volumes,
conservative advancement, and flat-array tree traversals.

Everything here operates on plain ndarrays so numba can compile it; the
public modules wrap these in friendlier types. Movable-body data is stored
in its baked local frame and shifted by the query translation `qa` on the
fly.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

INF = math.inf

# Capsule conservative advancement: stop once the surface gap falls below
# `delta`; step to (gap - delta/2) so the advanced placement keeps a
# strictly positive gap.
CA_MAX_ITERS = 64
CA_MU_EPS = 1e-12


# ---------------------------------------------------------------------------
# scalar vector helpers
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _dot(ax, ay, az, bx, by, bz):
    return ax * bx + ay * by + az * bz


@njit(cache=True, inline="always")
def _cross(ax, ay, az, bx, by, bz):
    return ay * bz - az * by, az * bx - ax * bz, ax * by - ay * bx


# ---------------------------------------------------------------------------
# closest-point primitives (Ericson-style)
# ---------------------------------------------------------------------------

@njit(cache=True)
def closest_pt_triangle(px, py, pz, ax, ay, az, bx, by, bz, cx, cy, cz):
    """Closest point on triangle abc to point p."""
    abx, aby, abz = bx - ax, by - ay, bz - az
    acx, acy, acz = cx - ax, cy - ay, cz - az
    apx, apy, apz = px - ax, py - ay, pz - az
    d1 = _dot(abx, aby, abz, apx, apy, apz)
    d2 = _dot(acx, acy, acz, apx, apy, apz)
    if d1 <= 0.0 and d2 <= 0.0:
        return ax, ay, az
    bpx, bpy, bpz = px - bx, py - by, pz - bz
    d3 = _dot(abx, aby, abz, bpx, bpy, bpz)
    d4 = _dot(acx, acy, acz, bpx, bpy, bpz)
    if d3 >= 0.0 and d4 <= d3:
        return bx, by, bz
    vc = d1 * d4 - d3 * d2
    if vc <= 0.0 and d1 >= 0.0 and d3 <= 0.0:
        denom = d1 - d3
        v = d1 / denom if denom != 0.0 else 0.0
        return ax + v * abx, ay + v * aby, az + v * abz
    cpx, cpy, cpz = px - cx, py - cy, pz - cz
    d5 = _dot(abx, aby, abz, cpx, cpy, cpz)
    d6 = _dot(acx, acy, acz, cpx, cpy, cpz)
    if d6 >= 0.0 and d5 <= d6:
        return cx, cy, cz
    vb = d5 * d2 - d1 * d6
    if vb <= 0.0 and d2 >= 0.0 and d6 <= 0.0:
        denom = d2 - d6
        w = d2 / denom if denom != 0.0 else 0.0
        return ax + w * acx, ay + w * acy, az + w * acz
    va = d3 * d6 - d5 * d4
    if va <= 0.0 and (d4 - d3) >= 0.0 and (d5 - d6) >= 0.0:
        denom = (d4 - d3) + (d5 - d6)
        w = (d4 - d3) / denom if denom != 0.0 else 0.0
        return bx + w * (cx - bx), by + w * (cy - by), bz + w * (cz - bz)
    denom = va + vb + vc
    if denom != 0.0:
        v = vb / denom
        w = vc / denom
    else:
        v = 0.0
        w = 0.0
    return ax + abx * v + acx * w, ay + aby * v + acy * w, az + abz * v + acz * w


@njit(cache=True)
def seg_seg_closest(p1x, p1y, p1z, q1x, q1y, q1z,
                    p2x, p2y, p2z, q2x, q2y, q2z):
    """Clamped parameters (s, t) of the closest points of two segments."""
    d1x, d1y, d1z = q1x - p1x, q1y - p1y, q1z - p1z
    d2x, d2y, d2z = q2x - p2x, q2y - p2y, q2z - p2z
    rx, ry, rz = p1x - p2x, p1y - p2y, p1z - p2z
    a = _dot(d1x, d1y, d1z, d1x, d1y, d1z)
    e = _dot(d2x, d2y, d2z, d2x, d2y, d2z)
    f = _dot(d2x, d2y, d2z, rx, ry, rz)
    tiny = 1e-30
    if a <= tiny and e <= tiny:
        return 0.0, 0.0
    if a <= tiny:
        s = 0.0
        t = min(1.0, max(0.0, f / e))
        return s, t
    c = _dot(d1x, d1y, d1z, rx, ry, rz)
    if e <= tiny:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
        return s, t
    b = _dot(d1x, d1y, d1z, d2x, d2y, d2z)
    denom = a * e - b * b
    if denom > tiny:
        s = min(1.0, max(0.0, (b * f - c * e) / denom))
    else:
        s = 0.0
    t = (b * s + f) / e
    if t < 0.0:
        t = 0.0
        s = min(1.0, max(0.0, -c / a))
    elif t > 1.0:
        t = 1.0
        s = min(1.0, max(0.0, (b - c) / a))
    return s, t


@njit(cache=True)
def tri_tri_distance(ta, tb):
    """Distance and witness points between two triangles.

    Exact for disjoint triangles (closest features are always realized by one
    of the 9 edge pairs or 6 vertex-face pairs). For overlapping triangles
    this returns a meaningless positive value; pair it with tri_tri_overlap.
    Returns (dist, wax, way, waz, wbx, wby, wbz).
    """
    best = INF
    wax = way = waz = wbx = wby = wbz = 0.0
    for i in range(3):
        i2 = (i + 1) % 3
        p1x, p1y, p1z = ta[i, 0], ta[i, 1], ta[i, 2]
        q1x, q1y, q1z = ta[i2, 0], ta[i2, 1], ta[i2, 2]
        for j in range(3):
            j2 = (j + 1) % 3
            p2x, p2y, p2z = tb[j, 0], tb[j, 1], tb[j, 2]
            q2x, q2y, q2z = tb[j2, 0], tb[j2, 1], tb[j2, 2]
            s, t = seg_seg_closest(p1x, p1y, p1z, q1x, q1y, q1z,
                                   p2x, p2y, p2z, q2x, q2y, q2z)
            cax = p1x + s * (q1x - p1x)
            cay = p1y + s * (q1y - p1y)
            caz = p1z + s * (q1z - p1z)
            cbx = p2x + t * (q2x - p2x)
            cby = p2y + t * (q2y - p2y)
            cbz = p2z + t * (q2z - p2z)
            dx, dy, dz = cbx - cax, cby - cay, cbz - caz
            d2 = dx * dx + dy * dy + dz * dz
            if d2 < best:
                best = d2
                wax, way, waz = cax, cay, caz
                wbx, wby, wbz = cbx, cby, cbz
    for i in range(3):
        px, py, pz = ta[i, 0], ta[i, 1], ta[i, 2]
        cx, cy, cz = closest_pt_triangle(px, py, pz,
                                         tb[0, 0], tb[0, 1], tb[0, 2],
                                         tb[1, 0], tb[1, 1], tb[1, 2],
                                         tb[2, 0], tb[2, 1], tb[2, 2])
        dx, dy, dz = cx - px, cy - py, cz - pz
        d2 = dx * dx + dy * dy + dz * dz
        if d2 < best:
            best = d2
            wax, way, waz = px, py, pz
            wbx, wby, wbz = cx, cy, cz
    for j in range(3):
        px, py, pz = tb[j, 0], tb[j, 1], tb[j, 2]
        cx, cy, cz = closest_pt_triangle(px, py, pz,
                                         ta[0, 0], ta[0, 1], ta[0, 2],
                                         ta[1, 0], ta[1, 1], ta[1, 2],
                                         ta[2, 0], ta[2, 1], ta[2, 2])
        dx, dy, dz = px - cx, py - cy, pz - cz
        d2 = dx * dx + dy * dy + dz * dz
        if d2 < best:
            best = d2
            wax, way, waz = cx, cy, cz
            wbx, wby, wbz = px, py, pz
    return math.sqrt(best), wax, way, waz, wbx, wby, wbz


# ---------------------------------------------------------------------------
# triangle-triangle overlap (Moller, no-division variant)
# ---------------------------------------------------------------------------

@njit(cache=True)
def _edge_edge_2d(v0x, v0y, u0x, u0y, u1x, u1y, ax, ay):
    bx = u0x - u1x
    by = u0y - u1y
    cx = v0x - u0x
    cy = v0y - u0y
    f = ay * bx - ax * by
    d = by * cx - bx * cy
    if (f > 0.0 and d >= 0.0 and d <= f) or (f < 0.0 and d <= 0.0 and d >= f):
        e = ax * cy - ay * cx
        if f > 0.0:
            if e >= 0.0 and e <= f:
                return True
        else:
            if e <= 0.0 and e >= f:
                return True
    return False


@njit(cache=True)
def _point_in_tri_2d(px, py, ax, ay, bx, by, cx, cy):
    s0 = (bx - ax) * (py - ay) - (by - ay) * (px - ax)
    s1 = (cx - bx) * (py - by) - (cy - by) * (px - bx)
    s2 = (ax - cx) * (py - cy) - (ay - cy) * (px - cx)
    return (s0 >= 0.0 and s1 >= 0.0 and s2 >= 0.0) or \
           (s0 <= 0.0 and s1 <= 0.0 and s2 <= 0.0)


@njit(cache=True)
def _coplanar_tri_tri(nx, ny, nz, ta, tb):
    anx, any_, anz = abs(nx), abs(ny), abs(nz)
    if anx > any_ and anx > anz:
        i0, i1 = 1, 2
    elif any_ > anz:
        i0, i1 = 0, 2
    else:
        i0, i1 = 0, 1
    for i in range(3):
        i2 = (i + 1) % 3
        ax = ta[i2, i0] - ta[i, i0]
        ay = ta[i2, i1] - ta[i, i1]
        for j in range(3):
            j2 = (j + 1) % 3
            if _edge_edge_2d(ta[i, i0], ta[i, i1],
                             tb[j, i0], tb[j, i1],
                             tb[j2, i0], tb[j2, i1], ax, ay):
                return True
    if _point_in_tri_2d(ta[0, i0], ta[0, i1],
                        tb[0, i0], tb[0, i1],
                        tb[1, i0], tb[1, i1],
                        tb[2, i0], tb[2, i1]):
        return True
    if _point_in_tri_2d(tb[0, i0], tb[0, i1],
                        ta[0, i0], ta[0, i1],
                        ta[1, i0], ta[1, i1],
                        ta[2, i0], ta[2, i1]):
        return True
    return False


@njit(cache=True)
def _intervals(vv0, vv1, vv2, d0, d1, d2, d0d1, d0d2):
    """Interval helper for the no-division overlap test.

    Returns (coplanar, a, b, c, x0, x1).
    """
    if d0d1 > 0.0:
        return False, vv2, (vv0 - vv2) * d2, (vv1 - vv2) * d2, d2 - d0, d2 - d1
    elif d0d2 > 0.0:
        return False, vv1, (vv0 - vv1) * d1, (vv2 - vv1) * d1, d1 - d0, d1 - d2
    elif d1 * d2 > 0.0 or d0 != 0.0:
        return False, vv0, (vv1 - vv0) * d0, (vv2 - vv0) * d0, d0 - d1, d0 - d2
    elif d1 != 0.0:
        return False, vv1, (vv0 - vv1) * d1, (vv2 - vv1) * d1, d1 - d0, d1 - d2
    elif d2 != 0.0:
        return False, vv2, (vv0 - vv2) * d2, (vv1 - vv2) * d2, d2 - d0, d2 - d1
    return True, 0.0, 0.0, 0.0, 0.0, 0.0


@njit(cache=True)
def tri_tri_overlap(ta, tb):
    """True when the two triangles intersect (shared points count)."""
    e1x, e1y, e1z = ta[1, 0] - ta[0, 0], ta[1, 1] - ta[0, 1], ta[1, 2] - ta[0, 2]
    e2x, e2y, e2z = ta[2, 0] - ta[0, 0], ta[2, 1] - ta[0, 1], ta[2, 2] - ta[0, 2]
    n1x, n1y, n1z = _cross(e1x, e1y, e1z, e2x, e2y, e2z)
    d1 = -_dot(n1x, n1y, n1z, ta[0, 0], ta[0, 1], ta[0, 2])
    du0 = _dot(n1x, n1y, n1z, tb[0, 0], tb[0, 1], tb[0, 2]) + d1
    du1 = _dot(n1x, n1y, n1z, tb[1, 0], tb[1, 1], tb[1, 2]) + d1
    du2 = _dot(n1x, n1y, n1z, tb[2, 0], tb[2, 1], tb[2, 2]) + d1
    du0du1 = du0 * du1
    du0du2 = du0 * du2
    if du0du1 > 0.0 and du0du2 > 0.0:
        return False
    f1x, f1y, f1z = tb[1, 0] - tb[0, 0], tb[1, 1] - tb[0, 1], tb[1, 2] - tb[0, 2]
    f2x, f2y, f2z = tb[2, 0] - tb[0, 0], tb[2, 1] - tb[0, 1], tb[2, 2] - tb[0, 2]
    n2x, n2y, n2z = _cross(f1x, f1y, f1z, f2x, f2y, f2z)
    d2 = -_dot(n2x, n2y, n2z, tb[0, 0], tb[0, 1], tb[0, 2])
    dv0 = _dot(n2x, n2y, n2z, ta[0, 0], ta[0, 1], ta[0, 2]) + d2
    dv1 = _dot(n2x, n2y, n2z, ta[1, 0], ta[1, 1], ta[1, 2]) + d2
    dv2 = _dot(n2x, n2y, n2z, ta[2, 0], ta[2, 1], ta[2, 2]) + d2
    dv0dv1 = dv0 * dv1
    dv0dv2 = dv0 * dv2
    if dv0dv1 > 0.0 and dv0dv2 > 0.0:
        return False
    dx, dy, dz = _cross(n1x, n1y, n1z, n2x, n2y, n2z)
    adx, ady, adz = abs(dx), abs(dy), abs(dz)
    if adx > ady and adx > adz:
        axis = 0
    elif ady > adz:
        axis = 1
    else:
        axis = 2
    vp0, vp1, vp2 = ta[0, axis], ta[1, axis], ta[2, axis]
    up0, up1, up2 = tb[0, axis], tb[1, axis], tb[2, axis]
    cop1, a1, b1, c1, x0, x1 = _intervals(vp0, vp1, vp2, dv0, dv1, dv2, dv0dv1, dv0dv2)
    if cop1:
        return _coplanar_tri_tri(n1x, n1y, n1z, ta, tb)
    cop2, a2, b2, c2, y0, y1 = _intervals(up0, up1, up2, du0, du1, du2, du0du1, du0du2)
    if cop2:
        return _coplanar_tri_tri(n1x, n1y, n1z, ta, tb)
    xx = x0 * x1
    yy = y0 * y1
    xxyy = xx * yy
    tmp = a1 * xxyy
    i1lo = tmp + b1 * x1 * yy
    i1hi = tmp + c1 * x0 * yy
    tmp = a2 * xxyy
    i2lo = tmp + b2 * xx * y1
    i2hi = tmp + c2 * xx * y0
    if i1lo > i1hi:
        i1lo, i1hi = i1hi, i1lo
    if i2lo > i2hi:
        i2lo, i2hi = i2hi, i2lo
    if i1hi < i2lo or i2hi < i1lo:
        return False
    return True


@njit(cache=True)
def tri_tri_penetrating(ta, tb):
    """True only for a transversal crossing: each triangle has vertices
    strictly on both sides of the other's plane, and the triangles overlap.
    Pairs that merely touch (shared points, coplanar contact) stay False."""
    e1x, e1y, e1z = ta[1, 0] - ta[0, 0], ta[1, 1] - ta[0, 1], ta[1, 2] - ta[0, 2]
    e2x, e2y, e2z = ta[2, 0] - ta[0, 0], ta[2, 1] - ta[0, 1], ta[2, 2] - ta[0, 2]
    n1x, n1y, n1z = _cross(e1x, e1y, e1z, e2x, e2y, e2z)
    d1 = -_dot(n1x, n1y, n1z, ta[0, 0], ta[0, 1], ta[0, 2])
    pos = False
    neg = False
    for k in range(3):
        du = _dot(n1x, n1y, n1z, tb[k, 0], tb[k, 1], tb[k, 2]) + d1
        if du > 0.0:
            pos = True
        elif du < 0.0:
            neg = True
    if not (pos and neg):
        return False
    f1x, f1y, f1z = tb[1, 0] - tb[0, 0], tb[1, 1] - tb[0, 1], tb[1, 2] - tb[0, 2]
    f2x, f2y, f2z = tb[2, 0] - tb[0, 0], tb[2, 1] - tb[0, 1], tb[2, 2] - tb[0, 2]
    n2x, n2y, n2z = _cross(f1x, f1y, f1z, f2x, f2y, f2z)
    d2 = -_dot(n2x, n2y, n2z, tb[0, 0], tb[0, 1], tb[0, 2])
    pos = False
    neg = False
    for k in range(3):
        dv = _dot(n2x, n2y, n2z, ta[k, 0], ta[k, 1], ta[k, 2]) + d2
        if dv > 0.0:
            pos = True
        elif dv < 0.0:
            neg = True
    if not (pos and neg):
        return False
    return tri_tri_overlap(ta, tb)


# ---------------------------------------------------------------------------
# capsule (segment-swept sphere) volume primitives
# ---------------------------------------------------------------------------

@njit(cache=True)
def capsule_pair_distance(a0x, a0y, a0z, a1x, a1y, a1z, ra,
                          b0x, b0y, b0z, b1x, b1y, b1z, rb):
    """Surface distance between two capsules, clamped at zero."""
    s, t = seg_seg_closest(a0x, a0y, a0z, a1x, a1y, a1z,
                           b0x, b0y, b0z, b1x, b1y, b1z)
    cax = a0x + s * (a1x - a0x)
    cay = a0y + s * (a1y - a0y)
    caz = a0z + s * (a1z - a0z)
    cbx = b0x + t * (b1x - b0x)
    cby = b0y + t * (b1y - b0y)
    cbz = b0z + t * (b1z - b0z)
    dx, dy, dz = cbx - cax, cby - cay, cbz - caz
    d = math.sqrt(dx * dx + dy * dy + dz * dz) - ra - rb
    return d if d > 0.0 else 0.0


@njit(cache=True)
def capsule_pair_mdd(a0x, a0y, a0z, a1x, a1y, a1z, ra,
                     b0x, b0y, b0z, b1x, b1y, b1z, rb,
                     ux, uy, uz, delta):
    """Directional distance of capsule a toward capsule b along unit u.

    Conservative advancement at the volume level; the returned value never
    exceeds the true first-contact distance, so it is a valid lower bound on
    the directional distance of any geometry the capsules enclose. Returns
    INF when the volumes provably never meet along u.
    """
    s_adv = 0.0
    for _ in range(CA_MAX_ITERS):
        ox = s_adv * ux
        oy = s_adv * uy
        oz = s_adv * uz
        s, t = seg_seg_closest(a0x + ox, a0y + oy, a0z + oz,
                               a1x + ox, a1y + oy, a1z + oz,
                               b0x, b0y, b0z, b1x, b1y, b1z)
        cax = a0x + ox + s * (a1x - a0x)
        cay = a0y + oy + s * (a1y - a0y)
        caz = a0z + oz + s * (a1z - a0z)
        cbx = b0x + t * (b1x - b0x)
        cby = b0y + t * (b1y - b0y)
        cbz = b0z + t * (b1z - b0z)
        dx, dy, dz = cbx - cax, cby - cay, cbz - caz
        axis_d = math.sqrt(dx * dx + dy * dy + dz * dz)
        gap = axis_d - ra - rb
        if gap < delta:
            return s_adv
        if axis_d <= 0.0:
            return s_adv
        mu = (ux * dx + uy * dy + uz * dz) / axis_d
        if mu <= CA_MU_EPS:
            return INF
        s_adv += (gap - 0.5 * delta) / mu
    return s_adv


@njit(cache=True)
def triangle_pair_mdd(ta, tb, ux, uy, uz, delta, max_iters):
    """Directional distance of triangle ta toward tb along unit u.

    Returns (distance, iterations, capped). INF distance means the pair
    never meets along u; `capped` marks an iteration-limited (still
    conservative) result.
    """
    moved = np.empty((3, 3), dtype=np.float64)
    s_adv = 0.0
    it = 0
    while it < max_iters:
        it += 1
        for k in range(3):
            moved[k, 0] = ta[k, 0] + s_adv * ux
            moved[k, 1] = ta[k, 1] + s_adv * uy
            moved[k, 2] = ta[k, 2] + s_adv * uz
        d, wax, way, waz, wbx, wby, wbz = tri_tri_distance(moved, tb)
        if d < delta:
            return s_adv, it, False
        nx, ny, nz = wbx - wax, wby - way, wbz - waz
        mu = (ux * nx + uy * ny + uz * nz) / d
        if mu <= CA_MU_EPS:
            return INF, it, False
        s_adv += (d - 0.5 * delta) / mu
    return s_adv, it, True


# ---------------------------------------------------------------------------
# tree traversals (flat-array trees, explicit stacks)
# ---------------------------------------------------------------------------
#
# Per-tree arrays: seg0 (n,3), seg1 (n,3), rad (n,), left (n,), right (n,),
# tstart (n,), tcount (n,) and tv (m,3,3) triangle vertices in leaf order.
# The movable tree (the `a` side) is offset by qa.


@njit(cache=True, inline="always")
def _node_pair_distance(a_seg0, a_seg1, a_rad, ia, qax, qay, qaz,
                        b_seg0, b_seg1, b_rad, ib):
    return capsule_pair_distance(
        a_seg0[ia, 0] + qax, a_seg0[ia, 1] + qay, a_seg0[ia, 2] + qaz,
        a_seg1[ia, 0] + qax, a_seg1[ia, 1] + qay, a_seg1[ia, 2] + qaz,
        a_rad[ia],
        b_seg0[ib, 0], b_seg0[ib, 1], b_seg0[ib, 2],
        b_seg1[ib, 0], b_seg1[ib, 1], b_seg1[ib, 2],
        b_rad[ib])


@njit(cache=True, inline="always")
def _descend_a(a_rad, a_seg0, a_seg1, ia, a_tcount,
               b_rad, b_seg0, b_seg1, ib, b_tcount):
    """Choose which side of a node pair to split (True: split a)."""
    if a_tcount[ia] > 0:
        return False
    if b_tcount[ib] > 0:
        return True
    dax = a_seg1[ia, 0] - a_seg0[ia, 0]
    day = a_seg1[ia, 1] - a_seg0[ia, 1]
    daz = a_seg1[ia, 2] - a_seg0[ia, 2]
    dbx = b_seg1[ib, 0] - b_seg0[ib, 0]
    dby = b_seg1[ib, 1] - b_seg0[ib, 1]
    dbz = b_seg1[ib, 2] - b_seg0[ib, 2]
    ea = a_rad[ia] + 0.5 * math.sqrt(dax * dax + day * day + daz * daz)
    eb = b_rad[ib] + 0.5 * math.sqrt(dbx * dbx + dby * dby + dbz * dbz)
    return ea >= eb


@njit(cache=True)
def bvh_penetrates(a_seg0, a_seg1, a_rad, a_left, a_right, a_tstart, a_tcount, a_tv,
                   qax, qay, qaz,
                   b_seg0, b_seg1, b_rad, b_left, b_right, b_tstart, b_tcount, b_tv):
    """True when any triangle pair crosses transversally (touching is not
    penetration)."""
    cap = 1 << 12
    st_a = np.empty(cap, dtype=np.int64)
    st_b = np.empty(cap, dtype=np.int64)
    st_a[0] = 0
    st_b[0] = 0
    top = 1
    n_bv = 0
    n_p = 0
    tri = np.empty((3, 3), dtype=np.float64)
    while top > 0:
        top -= 1
        ia = st_a[top]
        ib = st_b[top]
        n_bv += 1
        d = _node_pair_distance(a_seg0, a_seg1, a_rad, ia, qax, qay, qaz,
                                b_seg0, b_seg1, b_rad, ib)
        if d > 0.0:
            continue
        a_leaf = a_tcount[ia] > 0
        b_leaf = b_tcount[ib] > 0
        if a_leaf and b_leaf:
            for i in range(a_tstart[ia], a_tstart[ia] + a_tcount[ia]):
                for k in range(3):
                    tri[k, 0] = a_tv[i, k, 0] + qax
                    tri[k, 1] = a_tv[i, k, 1] + qay
                    tri[k, 2] = a_tv[i, k, 2] + qaz
                for j in range(b_tstart[ib], b_tstart[ib] + b_tcount[ib]):
                    n_p += 1
                    if tri_tri_penetrating(tri, b_tv[j]):
                        return True, n_bv, n_p
            continue
        if top + 2 > cap:
            new_a = np.empty(cap * 2, dtype=np.int64)
            new_b = np.empty(cap * 2, dtype=np.int64)
            new_a[:cap] = st_a
            new_b[:cap] = st_b
            st_a = new_a
            st_b = new_b
            cap *= 2
        if _descend_a(a_rad, a_seg0, a_seg1, ia, a_tcount,
                      b_rad, b_seg0, b_seg1, ib, b_tcount):
            st_a[top] = a_left[ia]
            st_b[top] = ib
            st_a[top + 1] = a_right[ia]
            st_b[top + 1] = ib
        else:
            st_a[top] = ia
            st_b[top] = b_left[ib]
            st_a[top + 1] = ia
            st_b[top + 1] = b_right[ib]
        top += 2
    return False, n_bv, n_p


@njit(cache=True)
def bvh_min_distance(a_seg0, a_seg1, a_rad, a_left, a_right, a_tstart, a_tcount, a_tv,
                     qax, qay, qaz,
                     b_seg0, b_seg1, b_rad, b_left, b_right, b_tstart, b_tcount, b_tv):
    """Exact minimum triangle-pair distance plus a penetration verdict.

    Returns (dist, penetrating, n_bv, n_p); dist is 0 for touching or
    crossing pairs. After a touching pair is found the traversal keeps
    descending zero-distance volume pairs so a transversal crossing anywhere
    else is still detected.
    """
    cap = 1 << 12
    st_a = np.empty(cap, dtype=np.int64)
    st_b = np.empty(cap, dtype=np.int64)
    st_d = np.empty(cap, dtype=np.float64)
    n_bv = 1
    d0 = _node_pair_distance(a_seg0, a_seg1, a_rad, 0, qax, qay, qaz,
                             b_seg0, b_seg1, b_rad, 0)
    st_a[0] = 0
    st_b[0] = 0
    st_d[0] = d0
    top = 1
    best = INF
    n_p = 0
    tri = np.empty((3, 3), dtype=np.float64)
    while top > 0:
        top -= 1
        ia = st_a[top]
        ib = st_b[top]
        if st_d[top] > 0.0 and st_d[top] >= best:
            continue
        a_leaf = a_tcount[ia] > 0
        b_leaf = b_tcount[ib] > 0
        if a_leaf and b_leaf:
            for i in range(a_tstart[ia], a_tstart[ia] + a_tcount[ia]):
                for k in range(3):
                    tri[k, 0] = a_tv[i, k, 0] + qax
                    tri[k, 1] = a_tv[i, k, 1] + qay
                    tri[k, 2] = a_tv[i, k, 2] + qaz
                for j in range(b_tstart[ib], b_tstart[ib] + b_tcount[ib]):
                    n_p += 1
                    if tri_tri_overlap(tri, b_tv[j]):
                        if tri_tri_penetrating(tri, b_tv[j]):
                            return 0.0, True, n_bv, n_p
                        best = 0.0  # touching; keep hunting for a crossing
                        continue
                    d, _, _, _, _, _, _ = tri_tri_distance(tri, b_tv[j])
                    if d < best:
                        best = d
            continue
        if top + 2 > cap:
            new_a = np.empty(cap * 2, dtype=np.int64)
            new_b = np.empty(cap * 2, dtype=np.int64)
            new_d = np.empty(cap * 2, dtype=np.float64)
            new_a[:cap] = st_a
            new_b[:cap] = st_b
            new_d[:cap] = st_d
            st_a = new_a
            st_b = new_b
            st_d = new_d
            cap *= 2
        if _descend_a(a_rad, a_seg0, a_seg1, ia, a_tcount,
                      b_rad, b_seg0, b_seg1, ib, b_tcount):
            ia1, ib1 = a_left[ia], ib
            ia2, ib2 = a_right[ia], ib
        else:
            ia1, ib1 = ia, b_left[ib]
            ia2, ib2 = ia, b_right[ib]
        n_bv += 2
        d1 = _node_pair_distance(a_seg0, a_seg1, a_rad, ia1, qax, qay, qaz,
                                 b_seg0, b_seg1, b_rad, ib1)
        d2 = _node_pair_distance(a_seg0, a_seg1, a_rad, ia2, qax, qay, qaz,
                                 b_seg0, b_seg1, b_rad, ib2)
        # push the farther child first so the nearer one is explored next
        if d1 <= d2:
            if d2 < best or d2 == 0.0:
                st_a[top] = ia2
                st_b[top] = ib2
                st_d[top] = d2
                top += 1
            if d1 < best or d1 == 0.0:
                st_a[top] = ia1
                st_b[top] = ib1
                st_d[top] = d1
                top += 1
        else:
            if d1 < best or d1 == 0.0:
                st_a[top] = ia1
                st_b[top] = ib1
                st_d[top] = d1
                top += 1
            if d2 < best or d2 == 0.0:
                st_a[top] = ia2
                st_b[top] = ib2
                st_d[top] = d2
                top += 1
    return best, False, n_bv, n_p


@njit(cache=True)
def bvh_close_pairs(a_seg0, a_seg1, a_rad, a_left, a_right, a_tstart, a_tcount, a_tv,
                    qax, qay, qaz,
                    b_seg0, b_seg1, b_rad, b_left, b_right, b_tstart, b_tcount, b_tv,
                    eps, out_i, out_j, out_d):
    """Collect triangle pairs within distance eps.

    Fills out_i/out_j with leaf-slot indices and out_d with the pair
    distance; returns (count, n_bv, n_p). count may exceed the output
    capacity, in which case the caller must retry with bigger buffers.
    """
    cap = 1 << 12
    st_a = np.empty(cap, dtype=np.int64)
    st_b = np.empty(cap, dtype=np.int64)
    st_a[0] = 0
    st_b[0] = 0
    top = 1
    n_bv = 0
    n_p = 0
    count = 0
    out_cap = out_i.shape[0]
    tri = np.empty((3, 3), dtype=np.float64)
    while top > 0:
        top -= 1
        ia = st_a[top]
        ib = st_b[top]
        n_bv += 1
        d = _node_pair_distance(a_seg0, a_seg1, a_rad, ia, qax, qay, qaz,
                                b_seg0, b_seg1, b_rad, ib)
        if d > eps:
            continue
        a_leaf = a_tcount[ia] > 0
        b_leaf = b_tcount[ib] > 0
        if a_leaf and b_leaf:
            for i in range(a_tstart[ia], a_tstart[ia] + a_tcount[ia]):
                for k in range(3):
                    tri[k, 0] = a_tv[i, k, 0] + qax
                    tri[k, 1] = a_tv[i, k, 1] + qay
                    tri[k, 2] = a_tv[i, k, 2] + qaz
                for j in range(b_tstart[ib], b_tstart[ib] + b_tcount[ib]):
                    n_p += 1
                    td, _, _, _, _, _, _ = tri_tri_distance(tri, b_tv[j])
                    if td <= eps:
                        if count < out_cap:
                            out_i[count] = i
                            out_j[count] = j
                            out_d[count] = td
                        count += 1
            continue
        if top + 2 > cap:
            new_a = np.empty(cap * 2, dtype=np.int64)
            new_b = np.empty(cap * 2, dtype=np.int64)
            new_a[:cap] = st_a
            new_b[:cap] = st_b
            st_a = new_a
            st_b = new_b
            cap *= 2
        if _descend_a(a_rad, a_seg0, a_seg1, ia, a_tcount,
                      b_rad, b_seg0, b_seg1, ib, b_tcount):
            st_a[top] = a_left[ia]
            st_b[top] = ib
            st_a[top + 1] = a_right[ia]
            st_b[top + 1] = ib
        else:
            st_a[top] = ia
            st_b[top] = b_left[ib]
            st_a[top + 1] = ia
            st_b[top + 1] = b_right[ib]
        top += 2
    return count, n_bv, n_p


@njit(cache=True)
def bvh_mdd(a_seg0, a_seg1, a_rad, a_left, a_right, a_tstart, a_tcount, a_tv,
            qax, qay, qaz,
            b_seg0, b_seg1, b_rad, b_left, b_right, b_tstart, b_tcount, b_tv,
            vx, vy, vz, delta, max_iters):
    """Minimal directional distance between the meshes along v (unnormalized).

    Branch-and-bound over both trees pruning with the volume-level
    directional lower bound. Returns (mdd, n_bv, n_p, ca_iters, capped_pairs)
    where mdd is a spatial distance along v's direction (INF when the meshes
    never meet along v).
    """
    vn = math.sqrt(vx * vx + vy * vy + vz * vz)
    ux, uy, uz = vx / vn, vy / vn, vz / vn
    cap = 1 << 12
    st_a = np.empty(cap, dtype=np.int64)
    st_b = np.empty(cap, dtype=np.int64)
    st_d = np.empty(cap, dtype=np.float64)
    n_bv = 1
    d0 = capsule_pair_mdd(
        a_seg0[0, 0] + qax, a_seg0[0, 1] + qay, a_seg0[0, 2] + qaz,
        a_seg1[0, 0] + qax, a_seg1[0, 1] + qay, a_seg1[0, 2] + qaz,
        a_rad[0],
        b_seg0[0, 0], b_seg0[0, 1], b_seg0[0, 2],
        b_seg1[0, 0], b_seg1[0, 1], b_seg1[0, 2],
        b_rad[0], ux, uy, uz, delta)
    st_a[0] = 0
    st_b[0] = 0
    st_d[0] = d0
    top = 1
    best = INF
    n_p = 0
    ca_iters = 0
    capped_pairs = 0
    tri = np.empty((3, 3), dtype=np.float64)
    while top > 0:
        top -= 1
        ia = st_a[top]
        ib = st_b[top]
        if st_d[top] >= best:
            continue
        a_leaf = a_tcount[ia] > 0
        b_leaf = b_tcount[ib] > 0
        if a_leaf and b_leaf:
            for i in range(a_tstart[ia], a_tstart[ia] + a_tcount[ia]):
                for k in range(3):
                    tri[k, 0] = a_tv[i, k, 0] + qax
                    tri[k, 1] = a_tv[i, k, 1] + qay
                    tri[k, 2] = a_tv[i, k, 2] + qaz
                for j in range(b_tstart[ib], b_tstart[ib] + b_tcount[ib]):
                    n_p += 1
                    d, iters, capped = triangle_pair_mdd(
                        tri, b_tv[j], ux, uy, uz, delta, max_iters)
                    ca_iters += iters
                    if capped:
                        capped_pairs += 1
                    if d < best:
                        best = d
            continue
        if top + 2 > cap:
            new_a = np.empty(cap * 2, dtype=np.int64)
            new_b = np.empty(cap * 2, dtype=np.int64)
            new_d = np.empty(cap * 2, dtype=np.float64)
            new_a[:cap] = st_a
            new_b[:cap] = st_b
            new_d[:cap] = st_d
            st_a = new_a
            st_b = new_b
            st_d = new_d
            cap *= 2
        if _descend_a(a_rad, a_seg0, a_seg1, ia, a_tcount,
                      b_rad, b_seg0, b_seg1, ib, b_tcount):
            ia1, ib1 = a_left[ia], ib
            ia2, ib2 = a_right[ia], ib
        else:
            ia1, ib1 = ia, b_left[ib]
            ia2, ib2 = ia, b_right[ib]
        n_bv += 2
        d1 = capsule_pair_mdd(
            a_seg0[ia1, 0] + qax, a_seg0[ia1, 1] + qay, a_seg0[ia1, 2] + qaz,
            a_seg1[ia1, 0] + qax, a_seg1[ia1, 1] + qay, a_seg1[ia1, 2] + qaz,
            a_rad[ia1],
            b_seg0[ib1, 0], b_seg0[ib1, 1], b_seg0[ib1, 2],
            b_seg1[ib1, 0], b_seg1[ib1, 1], b_seg1[ib1, 2],
            b_rad[ib1], ux, uy, uz, delta)
        d2 = capsule_pair_mdd(
            a_seg0[ia2, 0] + qax, a_seg0[ia2, 1] + qay, a_seg0[ia2, 2] + qaz,
            a_seg1[ia2, 0] + qax, a_seg1[ia2, 1] + qay, a_seg1[ia2, 2] + qaz,
            a_rad[ia2],
            b_seg0[ib2, 0], b_seg0[ib2, 1], b_seg0[ib2, 2],
            b_seg1[ib2, 0], b_seg1[ib2, 1], b_seg1[ib2, 2],
            b_rad[ib2], ux, uy, uz, delta)
        if d1 <= d2:
            if d2 < best:
                st_a[top] = ia2
                st_b[top] = ib2
                st_d[top] = d2
                top += 1
            if d1 < best:
                st_a[top] = ia1
                st_b[top] = ib1
                st_d[top] = d1
                top += 1
        else:
            if d1 < best:
                st_a[top] = ia1
                st_b[top] = ib1
                st_d[top] = d1
                top += 1
            if d2 < best:
                st_a[top] = ia2
                st_b[top] = ib2
                st_d[top] = d2
                top += 1
    return best, n_bv, n_p, ca_iters, capped_pairs


@njit(cache=True)
def mesh_point_distance(seg0, seg1, rad, left, right, tstart, tcount, tv,
                        px, py, pz):
    """Distance from a point to the mesh surface held by one tree."""
    cap = 1 << 10
    st = np.empty(cap, dtype=np.int64)
    st_d = np.empty(cap, dtype=np.float64)
    st[0] = 0
    st_d[0] = 0.0
    top = 1
    best = INF
    while top > 0:
        top -= 1
        i = st[top]
        if st_d[top] >= best:
            continue
        if tcount[i] > 0:
            for j in range(tstart[i], tstart[i] + tcount[i]):
                cx, cy, cz = closest_pt_triangle(
                    px, py, pz,
                    tv[j, 0, 0], tv[j, 0, 1], tv[j, 0, 2],
                    tv[j, 1, 0], tv[j, 1, 1], tv[j, 1, 2],
                    tv[j, 2, 0], tv[j, 2, 1], tv[j, 2, 2])
                dx, dy, dz = cx - px, cy - py, cz - pz
                d = math.sqrt(dx * dx + dy * dy + dz * dz)
                if d < best:
                    best = d
            continue
        if top + 2 > cap:
            new_st = np.empty(cap * 2, dtype=np.int64)
            new_d = np.empty(cap * 2, dtype=np.float64)
            new_st[:cap] = st
            new_d[:cap] = st_d
            st = new_st
            st_d = new_d
            cap *= 2
        for child in (left[i], right[i]):
            s, t = seg_seg_closest(px, py, pz, px, py, pz,
                                   seg0[child, 0], seg0[child, 1], seg0[child, 2],
                                   seg1[child, 0], seg1[child, 1], seg1[child, 2])
            cx = seg0[child, 0] + t * (seg1[child, 0] - seg0[child, 0])
            cy = seg0[child, 1] + t * (seg1[child, 1] - seg0[child, 1])
            cz = seg0[child, 2] + t * (seg1[child, 2] - seg0[child, 2])
            dx, dy, dz = cx - px, cy - py, cz - pz
            d = math.sqrt(dx * dx + dy * dy + dz * dz) - rad[child]
            if d < 0.0:
                d = 0.0
            if d < best:
                st[top] = child
                st_d[top] = d
                top += 1
    return best


@njit(cache=True)
def mesh_points_distances(seg0, seg1, rad, left, right, tstart, tcount, tv,
                          points, out):
    for i in range(points.shape[0]):
        out[i] = mesh_point_distance(seg0, seg1, rad, left, right,
                                     tstart, tcount, tv,
                                     points[i, 0], points[i, 1], points[i, 2])
