"""Critical points from the convex-hull deficiency of the rightmost contour."""

import numpy as np

from .contour import ContourSignal
from .errors import DegenerateGeometryError, DetectionFailure
from .points import CriticalPoints


def _cross(o, a, b):
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def convex_hull(points):
    """Monotone-chain convex hull.

    Returns the hull vertices counter-clockwise (in a y-up frame) starting
    at the lowest-then-leftmost point, with collinear points dropped.
    """
    pts = sorted({(int(p[0]), int(p[1])) for p in points}, key=lambda p: (p[1], p[0]))
    if len(pts) < 3:
        raise DegenerateGeometryError("need at least three distinct points for a hull")

    lower = []
    for p in pts:
        while len(lower) >= 2 and _cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper = []
    for p in reversed(pts):
        while len(upper) >= 2 and _cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    if len(hull) < 3:
        raise DegenerateGeometryError("all points are collinear")
    return hull


def hull_rightmost(hull, y_start, y_end):
    """Rightmost hull boundary abscissa for each row in ``[y_start, y_end]``.

    Edges are interpolated linearly and the result rounded to the nearest
    pixel. Rows outside the hull's vertical extent come back invalid.
    """
    n = y_end - y_start + 1
    rows = np.arange(y_start, y_end + 1)
    best = np.full(n, -np.inf)
    m = len(hull)
    for k in range(m):
        (xa, ya), (xb, yb) = hull[k], hull[(k + 1) % m]
        if ya > yb:
            xa, ya, xb, yb = xb, yb, xa, ya
        lo, hi = max(ya, y_start), min(yb, y_end)
        if lo > hi:
            continue
        ys = rows[lo - y_start:hi - y_start + 1]
        if ya == yb:
            x = np.full(ys.shape, float(max(xa, xb)))
        else:
            # symmetric in the two endpoints so mirrored input gives identical floats
            x = (xa * (yb - ys) + xb * (ys - ya)) / (yb - ya)
        seg = best[lo - y_start:hi - y_start + 1]
        np.maximum(seg, x, out=seg)
    valid = np.isfinite(best)
    xs = np.where(valid, np.floor(np.where(valid, best, 0) + 0.5), -1).astype(np.int64)
    return ContourSignal(y_start=y_start, xs=xs, valid=valid)


def hull_diff_signal(contour, hull_contour):
    """Horizontal gap between hull and contour over the contour's valid rows."""
    if hull_contour.y_start != contour.y_start or len(hull_contour) != len(contour):
        raise ValueError("hull and contour must cover the same rows")
    if not np.all(hull_contour.valid[contour.valid]):
        raise ValueError("hull does not cover every contour row")
    return (hull_contour.xs[contour.valid] - contour.xs[contour.valid]).astype(np.int64)


def contour_hull_signal(contour):
    """Hull, hull contour and deficiency signal of ``contour``.

    A perfectly straight contour has a degenerate hull; its hull is then
    the segment between the extreme points and the signal is all zero.
    """
    pts = contour.points()
    try:
        hull = convex_hull(pts)
    except DegenerateGeometryError:
        uniq = sorted({(int(p[0]), int(p[1])) for p in pts}, key=lambda p: (p[1], p[0]))
        if len(uniq) < 2:
            raise
        hull = [uniq[0], uniq[-1]]
    hc = hull_rightmost(hull, contour.y_start, contour.y_end)
    return hull, hc, hull_diff_signal(contour, hc)


def _region_argmax(signal, idx, nose_idx):
    """Index of the maximum over ``idx``, ties resolved towards the nose."""
    vals = signal[idx]
    best = vals.max()
    cands = idx[vals == best]
    return int(cands[np.argmin(np.abs(cands - nose_idx))])


def critical_points_hull(signal, contour, nose, min_notch_depth=2):
    """Split the deficiency signal at the nose row and take each side's maximum.

    ``head_begin`` comes from the rows above the nose, ``head_end`` from
    the rows below; the nose row itself belongs to neither side. The
    notch lying horizontally closer to the nose is taken as the eye side.
    """
    signal = np.asarray(signal)
    rows = contour.rows
    xs = contour.points_x
    if signal.shape != rows.shape:
        raise ValueError("signal and contour lengths differ")
    nose_idx = int(np.searchsorted(rows, nose[1]))
    before = np.arange(0, min(nose_idx, len(rows)))
    after_start = nose_idx + 1 if nose_idx < len(rows) and rows[nose_idx] == nose[1] else nose_idx
    after = np.arange(after_start, len(rows))
    found = []
    for name, idx in (("head_begin", before), ("head_end", after)):
        if idx.size == 0 or signal[idx].max() < min_notch_depth:
            raise DetectionFailure(f"no concavity deeper than {min_notch_depth} px for {name}",
                                   point=name, stage="critical_points")
        found.append(_region_argmax(signal, idx, nose_idx))
    ib, ie = found
    head_begin = (int(xs[ib]), int(rows[ib]))
    head_end = (int(xs[ie]), int(rows[ie]))
    # the eye notch is the one horizontally nearer the nose; equal columns
    # fall back to the vertically nearer one
    if head_begin[0] != head_end[0]:
        eyes_reversed = head_begin[0] > head_end[0]
    else:
        eyes_reversed = abs(head_begin[1] - nose[1]) < abs(head_end[1] - nose[1])
    return CriticalPoints(head_begin=head_begin, nose=tuple(int(v) for v in nose),
                          head_end=head_end, eyes_reversed=bool(eyes_reversed),
                          method="hull", signal=signal, indices=(ib, ie))
