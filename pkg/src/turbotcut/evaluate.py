"""Score pipeline runs against synthetic ground truth."""

import csv
import io
import logging
import os
from dataclasses import dataclass

import numpy as np

from .config import PipelineConfig
from .imgcore import load_mask
from .morph import dilate
from .pipeline import points_in_mask, run_pipeline
from .synth import parse_sidecar

log = logging.getLogger(__name__)

TOLERANCE_FRACTION = 0.02
MASK_DILATION = 5


@dataclass
class ImageScore:
    name: str
    passed: bool
    error_upper: float = float("nan")
    error_lower: float = float("nan")
    inside_fraction: float = float("nan")
    method: str = ""
    seconds: float = 0.0
    reason: str = ""


def score_curve(curve_px, truth, mask=None, tolerance=None):
    """Compare curve endpoints (original pixels) with the planted notches.

    Endpoints are matched by row order: the upper endpoint to the upper
    notch, the lower one to the lower notch. Returns
    ``(error_upper, error_lower, inside_fraction, passed)``.
    """
    pts = np.asarray(curve_px, dtype=np.float64).reshape(-1, 2)
    height = int(truth["height"])
    tol = TOLERANCE_FRACTION * height if tolerance is None else tolerance
    ends = sorted((tuple(pts[0]), tuple(pts[-1])), key=lambda p: p[1])
    eu = float(np.hypot(ends[0][0] - truth["notch_upper"][0], ends[0][1] - truth["notch_upper"][1]))
    el = float(np.hypot(ends[1][0] - truth["notch_lower"][0], ends[1][1] - truth["notch_lower"][1]))
    inside = 1.0
    if mask is not None:
        inside = float(points_in_mask(pts, dilate(mask, MASK_DILATION)).mean())
    return eu, el, inside, bool(eu <= tol and el <= tol and inside == 1.0)


def corpus_entries(directory):
    """``(name, image_path, sidecar_path, mask_path)`` for every scene."""
    out = []
    for fname in sorted(os.listdir(directory)):
        if not fname.lower().endswith(".png") or fname.endswith("_mask.png"):
            continue
        stem = fname[:-4]
        out.append((stem, os.path.join(directory, fname), os.path.join(directory, stem + ".txt"),
                    os.path.join(directory, stem + "_mask.png")))
    return out


def evaluate_one(entry, cfg):
    name, image, sidecar, mask_path = entry
    with open(sidecar, encoding="utf-8") as fh:
        truth = parse_sidecar(fh.read())
    mask = load_mask(mask_path) if os.path.exists(mask_path) else None
    result = run_pipeline(image, cfg)
    seconds = sum(result.timings.values())
    if not result.ok:
        return ImageScore(name, False, method=cfg.method, seconds=seconds,
                          reason=f"{result.error_stage}: {result.error}")
    eu, el, inside, passed = score_curve(result.curve.points / result.scale, truth, mask)
    reason = "" if passed else "endpoint or containment tolerance exceeded"
    return ImageScore(name, passed, eu, el, inside, cfg.method, seconds, reason)


def evaluate_corpus(directory, cfg=None, jobs=1):
    """Run the pipeline on every scene of ``directory`` that has a sidecar."""
    cfg = cfg or PipelineConfig()
    entries = []
    for entry in corpus_entries(directory):
        if not os.path.exists(entry[2]):
            log.warning("skipping %s: no ground-truth sidecar", entry[1])
            continue
        entries.append(entry)
    if not entries:
        log.warning("no scenes with ground truth in %s", directory)
        return []
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(evaluate_one, entries, [cfg] * len(entries)))
    return [evaluate_one(e, cfg) for e in entries]


def success_rate(scores):
    return sum(s.passed for s in scores) / len(scores) if scores else 0.0


def scores_csv(scores):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["image", "method", "passed", "error_upper_px", "error_lower_px", "inside_fraction",
                "seconds", "reason"])
    for s in scores:
        w.writerow([s.name, s.method, int(s.passed), f"{s.error_upper:.2f}", f"{s.error_lower:.2f}",
                    f"{s.inside_fraction:.3f}", f"{s.seconds:.3f}", s.reason])
    return buf.getvalue()


def scores_table(scores):
    lines = [f"{'image':<20} {'result':<6} {'upper':>7} {'lower':>7} {'inside':>7} {'time':>6}"]
    for s in scores:
        lines.append(f"{s.name:<20} {'pass' if s.passed else 'FAIL':<6} {s.error_upper:7.1f} "
                     f"{s.error_lower:7.1f} {s.inside_fraction:7.3f} {s.seconds:5.2f}s"
                     + (f"  {s.reason}" if s.reason else ""))
    n = len(scores)
    lines.append(f"{sum(s.passed for s in scores)}/{n} passed ({100 * success_rate(scores):.1f}%)")
    return "\n".join(lines)
