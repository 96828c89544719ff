"""End-to-end run: image file to cutting curve, XML and overlay."""

import logging
import os
import time
from dataclasses import dataclass, field

import numpy as np

from . import contour as ct
from .config import PipelineConfig
from .curvegen import choose_curve
from .errors import DegenerateHistogramError, NoSpecimenError, TurbotError
from .export import render_overlay, to_millimeters, write_cut_xml
from .houghcrit import critical_points_hough
from .hullcrit import contour_hull_signal, critical_points_hull
from .imgcore import (atomic_write_text, check_gray, load_image, save_gray, save_mask, save_overlay,
                      scale_to_height, to_luminance)
from .morph import clean_mask
from .segment import segment_specimen

log = logging.getLogger(__name__)


@dataclass
class RunResult:
    """Everything one run produced. Points are in working-scale pixels;
    ``scale`` maps original pixels to working pixels."""

    image_path: str = None
    scale: float = 1.0
    segmentation: dict = None
    critical_points: object = None
    curve: object = None
    roi: object = None
    contour: object = None        # rightmost contour of the ROI, window coordinates
    xml: str = None
    xml_path: str = None
    overlay_path: str = None
    timings: dict = field(default_factory=dict)
    error: str = None
    error_stage: str = None
    exit_code: int = 0

    @property
    def ok(self):
        return self.error is None

    def report(self):
        out = {
            "image": self.image_path,
            "ok": self.ok,
            "scale": self.scale,
            "segmentation": self.segmentation,
            "timings_s": {k: round(v, 4) for k, v in self.timings.items()},
        }
        if self.critical_points is not None:
            out["critical_points"] = self.critical_points.as_dict()
        if self.curve is not None:
            out["curve"] = {"kind": self.curve.kind, "points": len(self.curve),
                            "clipped": self.curve.clipped,
                            "endings": [list(map(float, e)) for e in self.curve.params.endings]}
        if self.xml_path:
            out["xml_path"] = self.xml_path
        if self.overlay_path:
            out["overlay_path"] = self.overlay_path
        if self.error:
            out["error"] = self.error
            out["error_stage"] = self.error_stage
            out["exit_code"] = self.exit_code
        return out


class _Stages:
    def __init__(self, result):
        self.result = result
        self.name = None

    def __call__(self, name):
        self.name = name
        return self

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, exc_type, exc, tb):
        self.result.timings[self.name] = time.perf_counter() - self.t0
        if isinstance(exc, TurbotError) and exc.stage is None:
            exc.stage = self.name
        return False


def _signal_csv(signal, rows):
    lines = ["row,value"] + [f"{int(r)},{float(v):.6f}" for r, v in zip(rows, signal)]
    return "\n".join(lines) + "\n"


def detect(gray, cfg=None, result=None, debug=None):
    """Run the vision stages on a gray image.

    Fills and returns ``result``. ``debug`` is an optional dict receiving
    intermediate arrays keyed by name.
    """
    cfg = cfg or PipelineConfig()
    result = result or RunResult()
    stage = _Stages(result)
    gray = check_gray(gray)

    with stage("scale"):
        work = scale_to_height(gray, cfg.target_lines)
        result.scale = work.shape[0] / gray.shape[0]

    with stage("segment"):
        try:
            seg = segment_specimen(work, cfg.max_level)
        except DegenerateHistogramError as exc:
            raise NoSpecimenError(f"no specimen: {exc}", stage="segment") from exc
        result.segmentation = seg.summary()

    with stage("clean"):
        if work.shape[0] != cfg.target_lines:
            raise AssertionError("cleaning radii require the working scale")
        stages = {}
        clean = clean_mask(seg.mask, cfg.open_radius, cfg.close_radius, close=cfg.close_enabled,
                           stages=stages)
        removed = int(seg.mask.sum() - stages["opened"].sum())
        log.debug("opening removed %d px of clutter", removed)

    with stage("roi"):
        roi = ct.extract_roi(work, clean, cfg.roi_fraction, cfg.max_level, cfg.open_radius,
                             cfg.close_radius, cfg.close_enabled)
        result.roi = roi
        contour = ct.rightmost_contour(roi.mask)
        result.contour = contour

    with stage("critical_points"):
        if cfg.method == "hull":
            _, _, signal = contour_hull_signal(contour)
            cp = critical_points_hull(signal, contour, roi.nose, cfg.min_notch_depth)
        else:
            cp = critical_points_hough(contour, roi.nose, cfg.peak_window, cfg.peak_prominence,
                                       cfg.nose_exclusion)
        result.critical_points = cp.translated(roi.x0, roi.y0)

    with stage("curve"):
        local = choose_curve(cp, roi.mask, cfg.curve, cfg.bulge, x_bounds=(0, roi.width - 1))
        result.curve = local.translated(roi.x0, roi.y0)

    if debug is not None:
        debug.update(
            working=work, gamma_corrected=seg.corrected, binary=seg.mask,
            opened=stages["opened"], closed=stages["closed"], clean=clean,
            roi_gray=roi.window(work), roi_binary=roi.segmentation.mask, roi_mask=roi.mask,
            contour=contour, signal=cp.signal, signal_rows=contour.rows,
        )
    return result


def run_pipeline(image_path, cfg=None, out_xml=None, out_overlay=None, debug_dir=None):
    """Process one image file.

    Stage errors are caught and recorded in the returned result (with the
    process exit code); they are not raised.
    """
    cfg = cfg or PipelineConfig()
    result = RunResult(image_path=os.fspath(image_path))
    debug = {} if debug_dir else None
    gray = None
    try:
        with _Stages(result)("load"):
            gray = to_luminance(load_image(image_path))
        detect(gray, cfg, result, debug)
        with _Stages(result)("export"):
            px = result.curve.points / result.scale
            mm = to_millimeters(px, cfg.calibration)
            result.xml = write_cut_xml(mm, cfg.method, result.curve.kind, cfg.calibration)
            if out_xml:
                atomic_write_text(out_xml, result.xml)
                result.xml_path = os.fspath(out_xml)
    except TurbotError as exc:
        result.error = str(exc)
        result.error_stage = exc.stage
        result.exit_code = exc.exit_code
        log.error("%s: %s", image_path, exc)

    if out_overlay and result.timings.get("scale") is not None and gray is not None:
        work = scale_to_height(gray, cfg.target_lines)
        lines = result.critical_points.lines if result.critical_points is not None else None
        contour = result.contour
        rgb = render_overlay(work, result.critical_points, result.curve,
                             contour=contour, lines=lines,
                             offset=(result.roi.x0, result.roi.y0) if contour is not None else (0, 0))
        save_overlay(out_overlay, rgb)
        result.overlay_path = os.fspath(out_overlay)
    if debug_dir and debug:
        _dump_debug(debug_dir, debug, result)
    return result


def _dump_debug(debug_dir, debug, result):
    os.makedirs(debug_dir, exist_ok=True)
    p = lambda name: os.path.join(debug_dir, name)  # noqa: E731
    if "working" in debug:
        save_gray(p("01_working.png"), debug["working"])
    if "gamma_corrected" in debug:
        save_gray(p("02_gamma.png"), debug["gamma_corrected"])
    for i, key in enumerate(("binary", "opened", "closed", "clean", "roi_binary", "roi_mask"), 3):
        if key in debug:
            save_mask(p(f"{i:02d}_{key}.png"), debug[key])
    if "roi_gray" in debug:
        save_gray(p("09_roi_gray.png"), debug["roi_gray"])
    if debug.get("signal") is not None:
        atomic_write_text(p("10_signal.csv"), _signal_csv(debug["signal"], debug["signal_rows"]))
    if "contour" in debug and result.roi is not None:
        c = debug["contour"]
        rows = "\n".join(f"{int(y) + result.roi.y0},{int(x) + result.roi.x0}"
                         for x, y in zip(c.points_x, c.rows))
        atomic_write_text(p("11_contour.csv"), "row,x\n" + rows + "\n")
    if "working" in debug and result.critical_points is not None:
        rgb = render_overlay(debug["working"], result.critical_points, result.curve,
                             contour=debug.get("contour"), lines=result.critical_points.lines,
                             offset=(result.roi.x0, result.roi.y0))
        save_overlay(p("12_overlay.png"), rgb)


def points_in_mask(points, mask):
    """Per point: is its nearest pixel set in ``mask``? Points off the frame count as outside."""
    pts = np.floor(np.asarray(points) + 0.5).astype(int)
    h, w = mask.shape
    inside = (pts[:, 0] >= 0) & (pts[:, 0] < w) & (pts[:, 1] >= 0) & (pts[:, 1] < h)
    ok = np.zeros(len(pts), bool)
    ok[inside] = mask[pts[inside, 1], pts[inside, 0]]
    return ok
