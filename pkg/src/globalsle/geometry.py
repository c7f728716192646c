"""Polyline predicates used for disjointness and simplicity checks."""

from __future__ import annotations

import numba as nb
import numpy as np


@nb.njit(cache=True)
def _cross(ax, ay, bx, by):
    return ax * by - ay * bx


@nb.njit(cache=True)
def _point_segment_dist(px, py, ax, ay, bx, by):
    dx, dy = bx - ax, by - ay
    L = dx * dx + dy * dy
    if L == 0.0:
        return np.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / L
    t = min(1.0, max(0.0, t))
    return np.hypot(px - ax - t * dx, py - ay - t * dy)


@nb.njit(cache=True)
def _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
    d1 = _cross(bx - ax, by - ay, cx - ax, cy - ay)
    d2 = _cross(bx - ax, by - ay, dx - ax, dy - ay)
    d3 = _cross(dx - cx, dy - cy, ax - cx, ay - cy)
    d4 = _cross(dx - cx, dy - cy, bx - cx, by - cy)
    return ((d1 > 0) != (d2 > 0)) and ((d3 > 0) != (d4 > 0)) and d1 != 0 and d2 != 0 and d3 != 0 and d4 != 0


@nb.njit(cache=True)
def segment_distance(ax, ay, bx, by, cx, cy, dx, dy):
    if _segments_cross(ax, ay, bx, by, cx, cy, dx, dy):
        return 0.0
    return min(min(_point_segment_dist(ax, ay, cx, cy, dx, dy), _point_segment_dist(bx, by, cx, cy, dx, dy)),
               min(_point_segment_dist(cx, cy, ax, ay, bx, by), _point_segment_dist(dx, dy, ax, ay, bx, by)))


@nb.njit(cache=True)
def _touch(p, q, guard):
    n, m = len(p) - 1, len(q) - 1
    # per-segment bounding boxes of q
    qx0 = np.empty(m)
    qx1 = np.empty(m)
    qy0 = np.empty(m)
    qy1 = np.empty(m)
    ql = np.empty(m)
    for j in range(m):
        qx0[j] = min(q[j].real, q[j + 1].real)
        qx1[j] = max(q[j].real, q[j + 1].real)
        qy0[j] = min(q[j].imag, q[j + 1].imag)
        qy1[j] = max(q[j].imag, q[j + 1].imag)
        ql[j] = abs(q[j + 1] - q[j])
    for i in range(n):
        ax, ay, bx, by = p[i].real, p[i].imag, p[i + 1].real, p[i + 1].imag
        lp = abs(p[i + 1] - p[i])
        px0, px1 = min(ax, bx), max(ax, bx)
        py0, py1 = min(ay, by), max(ay, by)
        for j in range(m):
            r = guard * max(lp, ql[j])
            if qx0[j] > px1 + r or qx1[j] < px0 - r or qy0[j] > py1 + r or qy1[j] < py0 - r:
                continue
            d = segment_distance(ax, ay, bx, by, q[j].real, q[j].imag, q[j + 1].real, q[j + 1].imag)
            if d <= r:
                return True
    return False


def polylines_touch(p, q, guard: float = 0.0) -> bool:
    """Whether two polylines meet, within a tube of ``guard`` times the local segment length."""
    p = np.asarray(p, dtype=np.complex128)
    q = np.asarray(q, dtype=np.complex128)
    if len(p) < 2 or len(q) < 2:
        return False
    # cheap rejection on global boxes
    lp = np.abs(np.diff(p)).max()
    lq = np.abs(np.diff(q)).max()
    r = guard * max(lp, lq)
    if p.real.min() > q.real.max() + r or q.real.min() > p.real.max() + r or \
       p.imag.min() > q.imag.max() + r or q.imag.min() > p.imag.max() + r:
        return False
    return bool(_touch(p, q, guard))


@nb.njit(cache=True)
def _self_intersects(p):
    n = len(p) - 1
    for i in range(n):
        for j in range(i + 2, n):
            if _segments_cross(p[i].real, p[i].imag, p[i + 1].real, p[i + 1].imag,
                               p[j].real, p[j].imag, p[j + 1].real, p[j + 1].imag):
                return True
    return False


def polyline_self_intersects(p) -> bool:
    return bool(_self_intersects(np.asarray(p, dtype=np.complex128)))


def signed_area_to_chord(points) -> float:
    """Signed area enclosed by the polyline and the straight chord closing it.

    Positive when the curve runs counterclockwise around the enclosed region,
    i.e. when a curve from left to right bulges into the upper half-plane it is
    negative; callers orient as needed.
    """
    z = np.asarray(points, dtype=complex)
    x, y = z.real, z.imag
    # shoelace on the closed polygon (chord closes back to the start)
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))
