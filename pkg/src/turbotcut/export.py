"""Millimetre calibration, robot XML and inspection overlays."""

import math
import xml.etree.ElementTree as ET
from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, SerializationError
from .imgcore import check_gray

METHODS = ("hough", "hull")
CURVES = ("parabola", "ellipse")


@dataclass(frozen=True)
class Calibration:
    mm_per_px_x: float = 1.0
    mm_per_px_y: float = 1.0
    origin_px: tuple = (0.0, 0.0)

    def __post_init__(self):
        for v in (self.mm_per_px_x, self.mm_per_px_y):
            if not (math.isfinite(v) and v > 0):
                raise InvalidInputError("mm per pixel factors must be positive and finite")

    def inverse(self):
        """Calibration mapping millimetres back to pixels."""
        ox, oy = self.origin_px
        return Calibration(1.0 / self.mm_per_px_x, 1.0 / self.mm_per_px_y,
                           (-ox * self.mm_per_px_x, -oy * self.mm_per_px_y))


def to_millimeters(points, cal):
    """Map pixel points (a curve or an (N, 2) array) to millimetres."""
    pts = np.asarray(getattr(points, "points", points), dtype=np.float64).reshape(-1, 2)
    ox, oy = cal.origin_px
    out = np.empty_like(pts)
    out[:, 0] = (pts[:, 0] - ox) * cal.mm_per_px_x
    out[:, 1] = (pts[:, 1] - oy) * cal.mm_per_px_y
    return out


def _fmt(v, digits=2):
    s = f"{v:.{digits}f}"
    if s.lstrip("-").strip("0.") == "":
        s = s.lstrip("-")
    return s


def write_cut_xml(points_mm, method="hull", curve="ellipse", cal=None):
    """Serialize millimetre points.

    The layout is fixed (two-space indent, fixed attribute order, two
    decimals, LF endings) so that identical input gives identical bytes.
    """
    pts = np.asarray(points_mm, dtype=np.float64).reshape(-1, 2)
    if len(pts) < 2:
        raise SerializationError("a cutting curve needs at least two points")
    if not np.all(np.isfinite(pts)):
        raise SerializationError("non-finite coordinate in cutting curve")
    if method not in METHODS or curve not in CURVES:
        raise SerializationError(f"unknown method/curve {method!r}/{curve!r}")
    cal = cal or Calibration()
    ox, oy = cal.origin_px
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        "<!-- frame: x rightward, y downward; units: mm -->",
        f'<!-- origin_px="{_fmt(ox)},{_fmt(oy)}" mm_per_px="{_fmt(cal.mm_per_px_x, 6)},'
        f'{_fmt(cal.mm_per_px_y, 6)}" -->',
        f'<cuttingCurve units="mm" method="{method}" curve="{curve}" pointCount="{len(pts)}">',
    ]
    for i, (x, y) in enumerate(pts):
        out.append(f'  <point index="{i}" x="{_fmt(x)}" y="{_fmt(y)}"/>')
    out.append("</cuttingCurve>")
    return "\n".join(out) + "\n"


def parse_cut_xml(text):
    """Read a document produced by :func:`write_cut_xml`."""
    root = ET.fromstring(text.encode("utf-8"))
    if root.tag != "cuttingCurve":
        raise SerializationError(f"unexpected root element {root.tag!r}")
    pts = sorted(((int(p.get("index")), float(p.get("x")), float(p.get("y"))) for p in root.iter("point")))
    if len(pts) != int(root.get("pointCount")):
        raise SerializationError("pointCount does not match the number of points")
    meta = {k: root.get(k) for k in ("units", "method", "curve")}
    return np.array([[x, y] for _, x, y in pts], dtype=np.float64).reshape(-1, 2), meta


COLORS = {
    "contour": (0, 200, 255),
    "line": (255, 160, 0),
    "head_begin": (0, 220, 0),
    "nose": (255, 0, 255),
    "head_end": (255, 40, 40),
    "curve": (255, 255, 0),
}


def _put(rgb, x, y, color):
    h, w = rgb.shape[:2]
    if 0 <= x < w and 0 <= y < h:
        rgb[y, x] = color


def _marker(rgb, p, color, size=9):
    x, y = int(round(p[0])), int(round(p[1]))
    for d in range(-size, size + 1):
        _put(rgb, x + d, y, color)
        _put(rgb, x, y + d, color)


def render_overlay(original, cp=None, curve=None, contour=None, lines=None, offset=(0, 0)):
    """RGB overlay of contour, dominant lines, critical points and curve.

    ``offset`` shifts a contour given in window coordinates; lines,
    points and curve are in image coordinates. Each curve point lights
    exactly one pixel.
    """
    gray = check_gray(original)
    rgb = np.repeat(gray[:, :, None], 3, axis=2).copy()
    h, w = gray.shape
    dx, dy = offset
    if contour is not None:
        for x, y in zip(contour.points_x, contour.rows):
            _put(rgb, int(x) + dx, int(y) + dy, COLORS["contour"])
    for ln in lines or ():
        for y in range(h):
            x = ln.x_at(y)
            if x is not None and math.isfinite(x):
                _put(rgb, int(math.floor(x + 0.5)), y, COLORS["line"])
    if cp is not None:
        for name in ("head_begin", "nose", "head_end"):
            _marker(rgb, getattr(cp, name), COLORS[name])
    if curve is not None:
        for x, y in curve.points:
            _put(rgb, int(math.floor(x + 0.5)), int(math.floor(y + 0.5)), COLORS["curve"])
    return rgb
