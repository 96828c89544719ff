"""Independent oracles shared by the unit and acceptance suites."""

import itertools
import math

import numpy as np

from turbotcut.contour import ContourSignal


def brute_force_otsu(hist):
    """Exhaustive between-class variance argmax in exact integer arithmetic.

    sigma_b^2 * total^2 = (n1*S0 - n0*S1)^2 / (n0*n1), compared by cross
    multiplication so no division or rounding is involved. Smallest t wins
    ties because only a strictly larger value replaces the incumbent.
    """
    total = sum(hist)
    s_all = sum(v * c for v, c in enumerate(hist))
    best_num, best_den, best_t = None, None, None
    n0 = s0 = 0
    for t in range(255):
        n0 += hist[t]
        s0 += t * hist[t]
        n1, s1 = total - n0, s_all - s0
        if n0 == 0 or n1 == 0:
            continue
        num, den = (n1 * s0 - n0 * s1) ** 2, n0 * n1
        if best_num is None or num * best_den > best_num * den:
            best_num, best_den, best_t = num, den, t
    return best_t


def random_histograms(count, seed):
    """Mixed families: dense, sparse, few spikes and bimodal images."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        kind = len(out) % 4
        if kind == 0:
            hist = rng.integers(0, 1000, 256)
        elif kind == 1:
            hist = rng.integers(0, 5, 256) * (rng.random(256) < 0.1)
        elif kind == 2:
            levels = rng.integers(0, 256, rng.integers(2, 6))
            hist = np.bincount(levels, minlength=256) * rng.integers(1, 50)
        else:
            vals = np.concatenate([rng.normal(rng.uniform(20, 120), 15, 500),
                                   rng.normal(rng.uniform(130, 240), 25, 800)])
            hist = np.bincount(np.clip(np.rint(vals), 0, 255).astype(int), minlength=256)
        hist = [int(c) for c in hist]
        if sum(1 for c in hist if c) >= 2:
            out.append(hist)
    return out


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _in_closed_triangle(p, a, b, c):
    d1, d2, d3 = _cross(a, b, p), _cross(b, c, p), _cross(c, a, p)
    neg = d1 < 0 or d2 < 0 or d3 < 0
    pos = d1 > 0 or d2 > 0 or d3 > 0
    return not (neg and pos)


def brute_force_hull_vertices(points):
    """Extreme points of a finite set in O(n^4) by definition.

    A point is a hull vertex iff it is not inside (or on) any triangle of
    other points and not strictly between two other points on a segment.
    Returns ``None`` for collinear input.
    """
    pts = sorted(set(map(tuple, points)))
    if len(pts) < 3 or all(_cross(pts[0], pts[1], p) == 0 for p in pts[2:]):
        return None
    verts = set()
    for p in pts:
        others = [q for q in pts if q != p]
        inside = False
        for a, b in itertools.combinations(others, 2):
            if _cross(a, b, p) == 0 and min(a[0], b[0]) <= p[0] <= max(a[0], b[0]) \
                    and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]):
                inside = True
                break
        if not inside:
            for a, b, c in itertools.combinations(others, 3):
                if _cross(a, b, c) != 0 and _in_closed_triangle(p, a, b, c):
                    inside = True
                    break
        if not inside:
            verts.add(p)
    return verts


def wedge_contour(rng, height=600):
    """Rightmost contour of a wedge whose two edges meet at a vertex.

    Returns the contour and, per edge, ``(theta, a point on the edge)``.
    """
    vx, vy = rng.uniform(350, 450), rng.uniform(250, 350)
    m1 = math.tan(math.radians(rng.uniform(20, 70)))
    m2 = math.tan(math.radians(rng.uniform(20, 70)))
    y = np.arange(height, dtype=float)
    x = np.minimum(vx + (y - vy) * m1, vx - (y - vy) * m2)
    keep = x >= 0
    xs = np.where(keep, np.floor(x + 0.5), -1).astype(np.int64)
    contour = ContourSignal(0, xs, keep)
    edges = []
    for m, ya, yb in ((m1, max(0.0, vy - vx / m1), vy), (-m2, vy, min(height - 1.0, vy + vx / m2))):
        ym = (ya + yb) / 2
        edges.append((math.atan2(-m, 1) % math.pi, (vx + (ym - vy) * m, ym)))
    return contour, edges


def wedge_recovered(acc, bins, edges, cos, sin):
    """Each true edge must match a detected cell within one bin in theta and rho."""
    for theta, (xm, ym) in edges:
        kt = math.degrees(theta) * acc.theta_bins / 180
        hit = False
        for k, j, _ in bins:
            jt = xm * cos[k] + (ym - acc.y_origin) * sin[k] + acc.rho_offset
            dk = abs(k - kt)
            if min(dk, acc.theta_bins - dk) <= 1 and abs(j - jt) <= 1:
                hit = True
        if not hit:
            return False
    return True


def brute_force_hull_edges(points):
    """Hull vertices via the O(n^3) edge test, vectorized over the third point.

    Directed pair (p, q) is a hull edge iff every other point lies strictly
    to its left or on the closed segment pq. Endpoints of such edges are
    exactly the extreme points. Returns ``None`` for collinear input.
    """
    pts = np.unique(np.asarray(points, dtype=np.int64).reshape(-1, 2), axis=0)
    n = len(pts)
    if n < 3:
        return None
    x, y = pts[:, 0], pts[:, 1]
    if np.all((x[1] - x[0]) * (y - y[0]) - (y[1] - y[0]) * (x - x[0]) == 0):
        return None
    verts = set()
    for i in range(n):
        # cross[j, r] = cross(p_i, p_j, p_r)
        dxq, dyq = x - x[i], y - y[i]
        cross = dxq[:, None] * dyq[None, :] - dyq[:, None] * dxq[None, :]
        dot = dxq[None, :] * dxq[:, None] + dyq[None, :] * dyq[:, None]
        len2 = (dxq * dxq + dyq * dyq)[:, None]
        on_segment = (cross == 0) & (dot >= 0) & (dot <= len2)
        ok = (cross > 0) | on_segment
        ok[i, :] = False
        edge = ok.all(axis=1)
        for j in np.flatnonzero(edge):
            verts.add((int(x[i]), int(y[i])))
            verts.add((int(x[j]), int(y[j])))
    return verts or None
