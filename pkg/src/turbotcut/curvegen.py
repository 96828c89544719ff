"""Head cutting curves through the two notch points."""

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import AlignmentError, InvalidInputError, SingularSystemError
from .imgcore import check_mask

PARABOLA_VERTEX_FACTOR = 3
ELLIPSE_AXIS_RATIO = 2


@dataclass
class CurveParams:
    kind: str
    endings: tuple                # ((x, y), (x, y)) after any alignment
    d: float = None               # parabola only
    third_point: tuple = None     # parabola only
    bulge: str = "body"
    coefficients: tuple = None    # parabola x = a*y^2 + b*y + c
    center: tuple = None          # ellipse only
    semi_axes: tuple = None       # ellipse (horizontal a, vertical b)
    substituted: int = None       # index of the replaced ending, if any


@dataclass
class CuttingCurve:
    """Cut polyline, one point per integer row, from the head-beginning
    ending to the head-ending ending."""

    points: np.ndarray            # (N, 2) float, columns x, y
    kind: str
    params: CurveParams
    clipped: bool = False

    def __len__(self):
        return len(self.points)

    def translated(self, dx, dy):
        p = self.params
        moved = CurveParams(**{**p.__dict__})
        moved.endings = tuple((e[0] + dx, e[1] + dy) for e in p.endings)
        if p.third_point is not None:
            moved.third_point = (p.third_point[0] + dx, p.third_point[1] + dy)
        if p.center is not None:
            moved.center = (p.center[0] + dx, p.center[1] + dy)
        if p.coefficients is not None:
            a, b, c = p.coefficients
            # x - dx = a (y - dy)^2 + b (y - dy) + c
            moved.coefficients = (a, b - 2 * a * dy, a * dy * dy - b * dy + c + dx)
        return CuttingCurve(points=self.points + np.array([dx, dy], dtype=np.float64), kind=self.kind,
                            params=moved, clipped=self.clipped)


def _rows_between(y_from, y_to):
    step = 1 if y_to >= y_from else -1
    return np.arange(int(y_from), int(y_to) + step, step, dtype=np.float64)


def _clip(points, x_bounds):
    if x_bounds is None:
        return points, False
    lo, hi = x_bounds
    out = (points[:, 0] < lo) | (points[:, 0] > hi)
    if not out.any():
        return points, False
    points = points.copy()
    points[:, 0] = np.clip(points[:, 0], lo, hi)
    return points, True


def solve_parabola(p1, p2, p3):
    """Coefficients ``(a, b, c)`` of ``x = a*y**2 + b*y + c`` through three points."""
    ys = [p1[1], p2[1], p3[1]]
    if len({float(y) for y in ys}) < 3:
        raise SingularSystemError("parabola points need three distinct rows")
    A = np.array([[y * y, y, 1.0] for y in ys], dtype=np.float64)
    rhs = np.array([p1[0], p2[0], p3[0]], dtype=np.float64)
    return tuple(float(v) for v in np.linalg.solve(A, rhs))


def parabola_curve(cp, bulge="body", x_bounds=None):
    """Parabola through both notches whose third point lies on the nose row,
    three times ``d`` away from the nose (``d`` = larger horizontal notch
    distance to the nose)."""
    hb, he, nose = cp.head_begin, cp.head_end, cp.nose
    if hb[1] == he[1]:
        raise SingularSystemError("head beginning and head ending share a row")
    if nose[0] <= hb[0] or nose[0] <= he[0]:
        raise InvalidInputError("nose must lie strictly right of both notches")
    d = max(nose[0] - hb[0], nose[0] - he[0])
    sign = -1 if bulge == "body" else 1
    if bulge not in ("body", "nose"):
        raise InvalidInputError(f"unknown bulge {bulge!r}")
    third = (nose[0] + sign * PARABOLA_VERTEX_FACTOR * d, nose[1])
    a, b, c = solve_parabola(hb, he, third)
    ys = _rows_between(hb[1], he[1])
    points = np.column_stack([a * ys * ys + b * ys + c, ys])
    points, clipped = _clip(points, x_bounds)
    if x_bounds is not None and not x_bounds[0] <= third[0] <= x_bounds[1]:
        warnings.warn("parabola vertex falls outside the region of interest", RuntimeWarning, stacklevel=2)
        clipped = True
    params = CurveParams(kind="parabola", endings=(tuple(hb), tuple(he)), d=float(d), third_point=third,
                         bulge=bulge, coefficients=(a, b, c))
    return CuttingCurve(points=points, kind="parabola", params=params, clipped=clipped)


def boundary_crossing(mask, x, y_start, direction):
    """Last active pixel of column ``x`` when walking from row ``y_start`` in
    ``direction`` (-1 up, +1 down) until the specimen ends."""
    mask = check_mask(mask)
    h, w = mask.shape
    if not 0 <= x < w:
        raise AlignmentError(f"column {x} lies outside the mask")
    col = mask[:, x]
    y = int(y_start)
    end = -1 if direction < 0 else h
    # reach the specimen first if the start row is background
    while y != end and not col[y]:
        y += direction
    if y == end:
        raise AlignmentError(f"vertical line x={x} misses the specimen boundary")
    while y + direction != end and col[y + direction]:
        y += direction
    return (int(x), int(y))


def align_endings(cp, mask, bulge="body"):
    """Force both endings onto one vertical line.

    The ending with the larger x is kept; the other is replaced by the
    boundary crossing of that vertical line on its own side of the nose
    row. Endings already within 1 px horizontally are only snapped.
    """
    mask = check_mask(mask)
    ends = [tuple(cp.head_begin), tuple(cp.head_end)]
    true_i = 0 if ends[0][0] >= ends[1][0] else 1
    other_i = 1 - true_i
    xt = int(ends[true_i][0])
    substituted = None
    if abs(ends[0][0] - ends[1][0]) <= 1:
        ends[other_i] = (xt, ends[other_i][1])
    else:
        oy = ends[other_i][1]
        direction = -1 if oy < ends[true_i][1] else 1
        start = cp.nose[1]
        if (start - oy) * direction > 0:
            start = ends[true_i][1]
        crossing = boundary_crossing(mask, xt, start, direction)
        if (crossing[1] - ends[true_i][1]) * direction <= 0:
            raise AlignmentError("vertical line does not reach the opposite boundary")
        ends[other_i] = crossing
        substituted = other_i
    if ends[0][1] == ends[1][1]:
        raise AlignmentError("aligned endings coincide")
    return CurveParams(kind="ellipse", endings=(ends[0], ends[1]), bulge=bulge, substituted=substituted)


def ellipse_curve(cp, mask, bulge="body", x_bounds=None):
    """Half-ellipse whose vertical minor axis joins the aligned endings and
    whose horizontal major axis is twice as long."""
    params = align_endings(cp, mask, bulge)
    (x1, y1), (x2, y2) = params.endings
    cx, cy = x1, (y1 + y2) / 2
    b = abs(y2 - y1) / 2
    a = ELLIPSE_AXIS_RATIO * b
    sign = -1 if bulge == "body" else 1
    if bulge not in ("body", "nose"):
        raise InvalidInputError(f"unknown bulge {bulge!r}")
    ys = _rows_between(y1, y2)
    t = np.clip(1.0 - ((ys - cy) / b) ** 2, 0.0, None)
    xs = cx + sign * a * np.sqrt(t)
    points = np.column_stack([xs, ys])
    points, clipped = _clip(points, x_bounds)
    if x_bounds is not None and not x_bounds[0] <= cx + sign * a <= x_bounds[1]:
        clipped = True
    params.center = (float(cx), float(cy))
    params.semi_axes = (float(a), float(b))
    return CuttingCurve(points=points, kind="ellipse", params=params, clipped=clipped)


def eccentricity(semi_major, semi_minor):
    return math.sqrt(1.0 - (semi_minor / semi_major) ** 2)


def choose_curve(cp, mask, kind="ellipse", bulge="body", x_bounds=None):
    if kind is None or kind == "ellipse":
        return ellipse_curve(cp, mask, bulge, x_bounds)
    if kind == "parabola":
        return parabola_curve(cp, bulge, x_bounds)
    raise InvalidInputError(f"unknown curve kind {kind!r}")
