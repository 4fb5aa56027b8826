"""Naive all-pairs geometry for the validation oracle and brute-force tests.

Deliberately independent of the tree-based kernels: separate closest-point
and overlap routines (candidate enumeration and separating-axis tests), no
hierarchy, plain O(n*m) pair loops. Keep it that way; the whole point is a
second route to the same answers.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

NEG_INF = -math.inf
INF = math.inf


@njit(cache=True, inline="always")
def _d3(ax, ay, az, bx, by, bz):
    return ax * bx + ay * by + az * bz


@njit(cache=True)
def _pt_seg(px, py, pz, ax, ay, az, bx, by, bz):
    """Closest point parameter on segment ab to point p."""
    dx, dy, dz = bx - ax, by - ay, bz - az
    dd = dx * dx + dy * dy + dz * dz
    if dd <= 0.0:
        return 0.0
    t = ((px - ax) * dx + (py - ay) * dy + (pz - az) * dz) / dd
    if t < 0.0:
        return 0.0
    if t > 1.0:
        return 1.0
    return t


@njit(cache=True)
def _pt_tri(px, py, pz, t):
    """Closest point on triangle t to p, via plane projection with
    per-edge fallback."""
    e0x, e0y, e0z = t[1, 0] - t[0, 0], t[1, 1] - t[0, 1], t[1, 2] - t[0, 2]
    e1x, e1y, e1z = t[2, 0] - t[0, 0], t[2, 1] - t[0, 1], t[2, 2] - t[0, 2]
    wx, wy, wz = px - t[0, 0], py - t[0, 1], pz - t[0, 2]
    a = _d3(e0x, e0y, e0z, e0x, e0y, e0z)
    b = _d3(e0x, e0y, e0z, e1x, e1y, e1z)
    c = _d3(e1x, e1y, e1z, e1x, e1y, e1z)
    d0 = _d3(e0x, e0y, e0z, wx, wy, wz)
    d1 = _d3(e1x, e1y, e1z, wx, wy, wz)
    det = a * c - b * b
    inside = False
    u = 0.0
    v = 0.0
    if det > 0.0:
        u = (c * d0 - b * d1) / det
        v = (a * d1 - b * d0) / det
        inside = u >= 0.0 and v >= 0.0 and (u + v) <= 1.0
    if inside:
        return t[0, 0] + u * e0x + v * e1x, \
               t[0, 1] + u * e0y + v * e1y, \
               t[0, 2] + u * e0z + v * e1z
    best = INF
    bx = by = bz = 0.0
    for k in range(3):
        k2 = (k + 1) % 3
        s = _pt_seg(px, py, pz, t[k, 0], t[k, 1], t[k, 2],
                    t[k2, 0], t[k2, 1], t[k2, 2])
        cx = t[k, 0] + s * (t[k2, 0] - t[k, 0])
        cy = t[k, 1] + s * (t[k2, 1] - t[k, 1])
        cz = t[k, 2] + s * (t[k2, 2] - t[k, 2])
        dx, dy, dz = cx - px, cy - py, cz - pz
        dd = dx * dx + dy * dy + dz * dz
        if dd < best:
            best = dd
            bx, by, bz = cx, cy, cz
    return bx, by, bz


@njit(cache=True)
def _seg_seg(p0x, p0y, p0z, p1x, p1y, p1z,
             q0x, q0y, q0z, q1x, q1y, q1z):
    """Closest parameters (s, t) of two segments by candidate enumeration:
    the unclamped stationary point plus the four boundary projections."""
    ux, uy, uz = p1x - p0x, p1y - p0y, p1z - p0z
    vx, vy, vz = q1x - q0x, q1y - q0y, q1z - q0z
    wx, wy, wz = p0x - q0x, p0y - q0y, p0z - q0z
    a = _d3(ux, uy, uz, ux, uy, uz)
    b = _d3(ux, uy, uz, vx, vy, vz)
    c = _d3(vx, vy, vz, vx, vy, vz)
    d = _d3(ux, uy, uz, wx, wy, wz)
    e = _d3(vx, vy, vz, wx, wy, wz)
    det = a * c - b * b
    cand_s = np.empty(5)
    cand_t = np.empty(5)
    ncand = 0
    if det > 1e-30:
        s = (b * e - c * d) / det
        t = (a * e - b * d) / det
        cand_s[ncand] = min(1.0, max(0.0, s))
        cand_t[ncand] = min(1.0, max(0.0, t))
        ncand += 1
    # boundary candidates: clamp one parameter, project the other
    for sb in (0.0, 1.0):
        t = (b * sb + e) / c if c > 1e-30 else 0.0
        cand_s[ncand] = sb
        cand_t[ncand] = min(1.0, max(0.0, t))
        ncand += 1
    for tb in (0.0, 1.0):
        s = (b * tb - d) / a if a > 1e-30 else 0.0
        cand_s[ncand] = min(1.0, max(0.0, s))
        cand_t[ncand] = tb
        ncand += 1
    best = INF
    bs = 0.0
    bt = 0.0
    for k in range(ncand):
        s = cand_s[k]
        t = cand_t[k]
        dx = wx + s * ux - t * vx
        dy = wy + s * uy - t * vy
        dz = wz + s * uz - t * vz
        dd = dx * dx + dy * dy + dz * dz
        if dd < best:
            best = dd
            bs, bt = s, t
    return bs, bt


@njit(cache=True)
def tri_dist_w(ta, tb):
    """Distance and witnesses between disjoint triangles: minimum over the
    nine edge pairs and six vertex-face candidates."""
    best = INF
    wax = way = waz = wbx = wby = wbz = 0.0
    for i in range(3):
        i2 = (i + 1) % 3
        for j in range(3):
            j2 = (j + 1) % 3
            s, t = _seg_seg(ta[i, 0], ta[i, 1], ta[i, 2],
                            ta[i2, 0], ta[i2, 1], ta[i2, 2],
                            tb[j, 0], tb[j, 1], tb[j, 2],
                            tb[j2, 0], tb[j2, 1], tb[j2, 2])
            ax = ta[i, 0] + s * (ta[i2, 0] - ta[i, 0])
            ay = ta[i, 1] + s * (ta[i2, 1] - ta[i, 1])
            az = ta[i, 2] + s * (ta[i2, 2] - ta[i, 2])
            bx = tb[j, 0] + t * (tb[j2, 0] - tb[j, 0])
            by = tb[j, 1] + t * (tb[j2, 1] - tb[j, 1])
            bz = tb[j, 2] + t * (tb[j2, 2] - tb[j, 2])
            dx, dy, dz = bx - ax, by - ay, bz - az
            dd = dx * dx + dy * dy + dz * dz
            if dd < best:
                best = dd
                wax, way, waz, wbx, wby, wbz = ax, ay, az, bx, by, bz
    for i in range(3):
        cx, cy, cz = _pt_tri(ta[i, 0], ta[i, 1], ta[i, 2], tb)
        dx, dy, dz = cx - ta[i, 0], cy - ta[i, 1], cz - ta[i, 2]
        dd = dx * dx + dy * dy + dz * dz
        if dd < best:
            best = dd
            wax, way, waz = ta[i, 0], ta[i, 1], ta[i, 2]
            wbx, wby, wbz = cx, cy, cz
    for j in range(3):
        cx, cy, cz = _pt_tri(tb[j, 0], tb[j, 1], tb[j, 2], ta)
        dx, dy, dz = tb[j, 0] - cx, tb[j, 1] - cy, tb[j, 2] - cz
        dd = dx * dx + dy * dy + dz * dz
        if dd < best:
            best = dd
            wax, way, waz = cx, cy, cz
            wbx, wby, wbz = tb[j, 0], tb[j, 1], tb[j, 2]
    return math.sqrt(best), wax, way, waz, wbx, wby, wbz


@njit(cache=True)
def _axis_separates(ax, ay, az, ta, tb, tol2):
    nn = ax * ax + ay * ay + az * az
    if nn <= tol2:
        return False
    lo_a = INF
    hi_a = NEG_INF
    lo_b = INF
    hi_b = NEG_INF
    for k in range(3):
        p = ax * ta[k, 0] + ay * ta[k, 1] + az * ta[k, 2]
        if p < lo_a:
            lo_a = p
        if p > hi_a:
            hi_a = p
        q = ax * tb[k, 0] + ay * tb[k, 1] + az * tb[k, 2]
        if q < lo_b:
            lo_b = q
        if q > hi_b:
            hi_b = q
    return hi_a < lo_b or hi_b < lo_a


@njit(cache=True)
def tri_overlap_sat(ta, tb):
    """Separating-axis triangle overlap test: both normals, the nine edge
    cross products, and the six in-plane edge axes for coplanar pairs."""
    scale = 0.0
    for k in range(3):
        for m in range(3):
            v = abs(ta[k, m])
            if v > scale:
                scale = v
            v = abs(tb[k, m])
            if v > scale:
                scale = v
    tol2 = (1e-14 * (scale + 1.0)) ** 2
    ea = np.empty((3, 3))
    eb = np.empty((3, 3))
    for k in range(3):
        k2 = (k + 1) % 3
        for m in range(3):
            ea[k, m] = ta[k2, m] - ta[k, m]
            eb[k, m] = tb[k2, m] - tb[k, m]
    nax = ea[0, 1] * ea[1, 2] - ea[0, 2] * ea[1, 1]
    nay = ea[0, 2] * ea[1, 0] - ea[0, 0] * ea[1, 2]
    naz = ea[0, 0] * ea[1, 1] - ea[0, 1] * ea[1, 0]
    nbx = eb[0, 1] * eb[1, 2] - eb[0, 2] * eb[1, 1]
    nby = eb[0, 2] * eb[1, 0] - eb[0, 0] * eb[1, 2]
    nbz = eb[0, 0] * eb[1, 1] - eb[0, 1] * eb[1, 0]
    if _axis_separates(nax, nay, naz, ta, tb, tol2):
        return False
    if _axis_separates(nbx, nby, nbz, ta, tb, tol2):
        return False
    for i in range(3):
        for j in range(3):
            cx = ea[i, 1] * eb[j, 2] - ea[i, 2] * eb[j, 1]
            cy = ea[i, 2] * eb[j, 0] - ea[i, 0] * eb[j, 2]
            cz = ea[i, 0] * eb[j, 1] - ea[i, 1] * eb[j, 0]
            if _axis_separates(cx, cy, cz, ta, tb, tol2):
                return False
    for i in range(3):
        cx = nay * ea[i, 2] - naz * ea[i, 1]
        cy = naz * ea[i, 0] - nax * ea[i, 2]
        cz = nax * ea[i, 1] - nay * ea[i, 0]
        if _axis_separates(cx, cy, cz, ta, tb, tol2):
            return False
        cx = nby * eb[i, 2] - nbz * eb[i, 1]
        cy = nbz * eb[i, 0] - nbx * eb[i, 2]
        cz = nbx * eb[i, 1] - nby * eb[i, 0]
        if _axis_separates(cx, cy, cz, ta, tb, tol2):
            return False
    return True


@njit(cache=True)
def naive_intersects(tva, tvb, qax, qay, qaz):
    """Any-pair overlap across two triangle sets (tva offset by qa)."""
    moved = np.empty((3, 3))
    for i in range(tva.shape[0]):
        for k in range(3):
            moved[k, 0] = tva[i, k, 0] + qax
            moved[k, 1] = tva[i, k, 1] + qay
            moved[k, 2] = tva[i, k, 2] + qaz
        for j in range(tvb.shape[0]):
            if tri_overlap_sat(moved, tvb[j]):
                return True
    return False


@njit(cache=True)
def naive_min_distance(tva, tvb, qax, qay, qaz):
    """All-pairs minimum distance (zero when any pair overlaps)."""
    best = INF
    moved = np.empty((3, 3))
    for i in range(tva.shape[0]):
        for k in range(3):
            moved[k, 0] = tva[i, k, 0] + qax
            moved[k, 1] = tva[i, k, 1] + qay
            moved[k, 2] = tva[i, k, 2] + qaz
        for j in range(tvb.shape[0]):
            if tri_overlap_sat(moved, tvb[j]):
                return 0.0
            d, _, _, _, _, _, _ = tri_dist_w(moved, tvb[j])
            if d < best:
                best = d
    return best


@njit(cache=True)
def _pair_exit(ta_local, tb, qax, qay, qaz, ux, uy, uz,
               s_start, delta, max_iters):
    """Largest s at which the pair still touches, sweeping down from the
    disjoint placement qa + s_start * u. Conservative advancement; the
    result never understates the true exit. NEG_INF when the pair never
    meets below s_start."""
    moved = np.empty((3, 3))
    s = s_start
    for _ in range(max_iters):
        for k in range(3):
            moved[k, 0] = ta_local[k, 0] + qax + s * ux
            moved[k, 1] = ta_local[k, 1] + qay + s * uy
            moved[k, 2] = ta_local[k, 2] + qaz + s * uz
        d, wax, way, waz, wbx, wby, wbz = tri_dist_w(moved, tb)
        if d < delta:
            return s
        nx, ny, nz = (wbx - wax) / d, (wby - way) / d, (wbz - waz) / d
        mu = -(ux * nx + uy * ny + uz * nz)
        if mu <= 1e-12:
            return NEG_INF
        s -= (d - 0.5 * delta) / mu
    return s  # iteration cap: still an upper bound on the exit


@njit(cache=True)
def directional_exit(tva, tvb, qax, qay, qaz, ux, uy, uz,
                     ca, ra, cb, rb, q_bound, s_free, delta, max_iters):
    """Largest pair exit along u, >= 0 (the separating translation along u).

    q_bound[i, j] = |ca_i - cb_j|^2 - (ra_i + rb_j)^2 prescreens pairs by
    their bounding spheres; only pairs whose sphere exit beats the running
    maximum are advanced exactly.
    """
    s_max = 0.0
    for i in range(tva.shape[0]):
        pa = ca[i, 0] * ux + ca[i, 1] * uy + ca[i, 2] * uz
        for j in range(tvb.shape[0]):
            t = pa - (cb[j, 0] * ux + cb[j, 1] * uy + cb[j, 2] * uz)
            disc = t * t - q_bound[i, j]
            if disc <= 0.0:
                continue
            s_plus = -t + math.sqrt(disc)
            if s_plus <= s_max:
                continue
            start = s_plus if s_plus < s_free else s_free
            s_exit = _pair_exit(tva[i], tvb[j], qax, qay, qaz, ux, uy, uz,
                                start, delta, max_iters)
            if s_exit > s_max:
                s_max = s_exit
    return s_max


@njit(cache=True)
def sampled_pd_scan(tva, tvb, qax, qay, qaz, dirs, s_free, delta, max_iters):
    """Minimum separating translation over the direction set.

    Returns (magnitude, direction index). Each direction's value is a
    certified separating distance along it, so the minimum is an upper
    bound on the true depth.
    """
    na = tva.shape[0]
    nb = tvb.shape[0]
    ca = np.empty((na, 3))
    ra = np.empty(na)
    for i in range(na):
        for m in range(3):
            ca[i, m] = (tva[i, 0, m] + tva[i, 1, m] + tva[i, 2, m]) / 3.0 + \
                (qax if m == 0 else (qay if m == 1 else qaz))
        r2 = 0.0
        for k in range(3):
            dx = tva[i, k, 0] + qax - ca[i, 0]
            dy = tva[i, k, 1] + qay - ca[i, 1]
            dz = tva[i, k, 2] + qaz - ca[i, 2]
            dd = dx * dx + dy * dy + dz * dz
            if dd > r2:
                r2 = dd
        ra[i] = math.sqrt(r2)
    cb = np.empty((nb, 3))
    rb = np.empty(nb)
    for j in range(nb):
        for m in range(3):
            cb[j, m] = (tvb[j, 0, m] + tvb[j, 1, m] + tvb[j, 2, m]) / 3.0
        r2 = 0.0
        for k in range(3):
            dx = tvb[j, k, 0] - cb[j, 0]
            dy = tvb[j, k, 1] - cb[j, 1]
            dz = tvb[j, k, 2] - cb[j, 2]
            dd = dx * dx + dy * dy + dz * dz
            if dd > r2:
                r2 = dd
        rb[j] = math.sqrt(r2)
    q_bound = np.empty((na, nb))
    for i in range(na):
        for j in range(nb):
            mx = ca[i, 0] - cb[j, 0]
            my = ca[i, 1] - cb[j, 1]
            mz = ca[i, 2] - cb[j, 2]
            rr = ra[i] + rb[j]
            q_bound[i, j] = mx * mx + my * my + mz * mz - rr * rr
    best = INF
    best_k = -1
    for k in range(dirs.shape[0]):
        val = directional_exit(tva, tvb, qax, qay, qaz,
                               dirs[k, 0], dirs[k, 1], dirs[k, 2],
                               ca, ra, cb, rb, q_bound, s_free, delta, max_iters)
        if val < best:
            best = val
            best_k = k
    return best, best_k
