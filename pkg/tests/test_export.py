import os

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from turbotcut.contour import rightmost_contour
from turbotcut.curvegen import CurveParams, CuttingCurve
from turbotcut.errors import InvalidInputError, SerializationError
from turbotcut.export import COLORS, Calibration, parse_cut_xml, render_overlay, to_millimeters, write_cut_xml
from turbotcut.imgcore import save_overlay
from turbotcut.points import CriticalPoints

from conftest import DATA


def golden(name):
    with open(os.path.join(DATA, name), "rb") as fh:
        return fh.read()


def test_two_point_golden():
    text = write_cut_xml([[100, 50], [-0.001, 75.5]])
    assert text.encode("utf-8") == golden("two_points.xml")
    assert text.count("\n") == 7 and "\r" not in text


def test_calibrated_golden():
    cal = Calibration(0.25, 0.5, (10, 20))
    px = np.array([[100, 50], [90, 51], [0, 52]], dtype=float)
    mm = to_millimeters(px, cal)
    text = write_cut_xml(mm, "hough", "parabola", cal)
    assert text.encode("utf-8") == golden("calibrated.xml")


def test_round_trip_two_decimals():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-500, 500, (40, 2))
    back, meta = parse_cut_xml(write_cut_xml(pts, "hull", "ellipse"))
    assert np.all(np.abs(back - np.round(pts, 2)) < 1e-9)
    assert meta == {"units": "mm", "method": "hull", "curve": "ellipse"}


@settings(max_examples=100, deadline=None)
@given(st.lists(st.tuples(st.floats(-1e4, 1e4), st.floats(-1e4, 1e4)), min_size=2, max_size=30))
def test_round_trip_property(pts):
    text = write_cut_xml(pts)
    assert text == write_cut_xml(pts)
    back, _ = parse_cut_xml(text)
    assert np.all(np.abs(back - np.asarray(pts)) <= 0.005 + 1e-9)
    assert "-0.00" not in text


def test_serialization_errors():
    with pytest.raises(SerializationError):
        write_cut_xml([[0, 0], [np.nan, 1]])
    with pytest.raises(SerializationError):
        write_cut_xml([[0, 0]])
    with pytest.raises(SerializationError):
        write_cut_xml([[0, 0], [1, 1]], method="magic")


def test_calibration():
    assert np.array_equal(to_millimeters([[3.5, 7.25]], Calibration()), [[3.5, 7.25]])
    assert to_millimeters([[100, 200]], Calibration(0.25, 0.25)).tolist() == [[25.0, 50.0]]
    for bad in (0.0, -1.0, float("inf"), float("nan")):
        with pytest.raises(InvalidInputError):
            Calibration(bad, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(0.01, 5), st.floats(0.01, 5), st.floats(-500, 500), st.floats(-500, 500),
       st.floats(-1000, 1000), st.floats(-1000, 1000), st.floats(-10, 10))
def test_inverse_and_affine(sx, sy, ox, oy, px, py, q):
    cal = Calibration(sx, sy, (ox, oy))
    p = np.array([[px, py]])
    mm = to_millimeters(p, cal)
    assert np.allclose(to_millimeters(mm, cal.inverse()), p, rtol=0, atol=1e-9 * (1 + abs(p).max()))
    delta = np.array([3.0, -2.0])
    lhs = to_millimeters(p + q * delta, cal)
    rhs = mm + q * delta * [sx, sy]
    assert np.allclose(lhs, rhs, rtol=1e-12, atol=1e-9)


def make_curve():
    ys = np.arange(20, 60, dtype=float)
    pts = np.column_stack([40 - 0.01 * (ys - 40) ** 2, ys])
    return CuttingCurve(points=pts, kind="parabola", params=CurveParams("parabola", ((36, 20), (36, 59))))


def test_overlay_curve_pixels_and_determinism(tmp_path):
    gray = np.full((80, 80), 100, np.uint8)
    curve = make_curve()
    rgb = render_overlay(gray, curve=curve)
    lit = np.all(rgb == COLORS["curve"], axis=2)
    assert lit.sum() == len(curve)
    save_overlay(tmp_path / "a.png", render_overlay(gray, curve=curve))
    save_overlay(tmp_path / "b.png", render_overlay(gray, curve=curve))
    assert (tmp_path / "a.png").read_bytes() == (tmp_path / "b.png").read_bytes()


def test_overlay_contour_only():
    m = np.zeros((50, 50), bool)
    m[10:40, 5:30] = True
    rgb = render_overlay(np.full((50, 50), 200, np.uint8), contour=rightmost_contour(m))
    lit = np.all(rgb == COLORS["contour"], axis=2)
    assert lit.sum() == 30 and lit[10:40, 29].all()
    cp = CriticalPoints(head_begin=(29, 12), nose=(29, 25), head_end=(29, 38))
    rgb = render_overlay(np.full((50, 50), 200, np.uint8), cp=cp)
    assert np.all(rgb[25, 29] == COLORS["nose"])
