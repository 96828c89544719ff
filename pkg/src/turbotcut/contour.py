"""Rightmost contour, nose and head region of interest."""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidInputError, NoSpecimenError
from .imgcore import check_gray, check_mask
from .morph import clean_mask
from .segment import DEFAULT_MAX_LEVEL, segment_specimen


@dataclass
class ContourSignal:
    """Rightmost active column for every row of ``[y_start, y_start + len(xs))``.

    Rows without an active pixel carry ``valid == False`` (their ``xs``
    entry is -1).
    """

    y_start: int
    xs: np.ndarray
    valid: np.ndarray

    def __len__(self):
        return len(self.xs)

    @property
    def y_end(self):
        return self.y_start + len(self.xs) - 1

    @property
    def rows(self):
        """Row coordinates of the valid samples."""
        return self.y_start + np.flatnonzero(self.valid)

    @property
    def points_x(self):
        return self.xs[self.valid]

    def points(self):
        return np.column_stack([self.points_x, self.rows])

    def x_at(self, y):
        i = int(y) - self.y_start
        if not 0 <= i < len(self.xs) or not self.valid[i]:
            raise IndexError(f"row {y} has no contour point")
        return int(self.xs[i])

    def index_of_row(self, y):
        """Position of row ``y`` among the valid samples."""
        rows = self.rows
        i = int(np.searchsorted(rows, y))
        if i >= len(rows) or rows[i] != y:
            raise IndexError(f"row {y} has no contour point")
        return i


def rightmost_contour(mask):
    mask = check_mask(mask)
    rows_hit = np.flatnonzero(mask.any(axis=1))
    if rows_hit.size == 0:
        raise NoSpecimenError("empty mask has no contour")
    y0, y1 = int(rows_hit[0]), int(rows_hit[-1])
    band = mask[y0:y1 + 1]
    valid = band.any(axis=1)
    w = mask.shape[1]
    last = w - 1 - np.argmax(band[:, ::-1], axis=1)
    xs = np.where(valid, last, -1).astype(np.int64)
    return ContourSignal(y_start=y0, xs=xs, valid=valid)


def nose_point(contour):
    """Rightmost contour point.

    Several rows sharing the maximum resolve to their median row; for an
    even count the middle row closer to the centre of the contour's row
    span wins (the lower-indexed one on an exact tie).
    """
    rows = contour.rows
    if rows.size == 0:
        raise NoSpecimenError("contour has no valid rows")
    xs = contour.points_x
    best = xs.max()
    tying = rows[xs == best]
    k = len(tying)
    if k % 2:
        y = tying[k // 2]
    else:
        a, b = tying[k // 2 - 1], tying[k // 2]
        centre2 = rows[0] + rows[-1]
        y = a if abs(2 * a - centre2) <= abs(2 * b - centre2) else b
    return int(best), int(y)


def bounding_box(mask):
    """``(x0, y0, x1, y1)`` inclusive bounds of the active pixels."""
    mask = check_mask(mask)
    ys = np.flatnonzero(mask.any(axis=1))
    xs = np.flatnonzero(mask.any(axis=0))
    if ys.size == 0:
        raise NoSpecimenError("empty mask has no bounding box")
    return int(xs[0]), int(ys[0]), int(xs[-1]), int(ys[-1])


@dataclass
class Roi:
    x0: int
    y0: int
    width: int
    height: int
    mask: np.ndarray
    nose: tuple
    segmentation: object = None

    def window(self, img):
        return img[self.y0:self.y0 + self.height, self.x0:self.x0 + self.width]

    def to_global(self, point):
        return (point[0] + self.x0, point[1] + self.y0)


def roi_window(clean, roi_fraction=0.5, pad_fraction=0.02):
    """Window bounds ``(x0, y0, x1, y1)`` (inclusive) around the head."""
    clean = check_mask(clean)
    if not 0 < roi_fraction <= 1:
        raise InvalidInputError("roi_fraction must lie in (0, 1]")
    h = clean.shape[0]
    bx0, by0, bx1, by1 = bounding_box(clean)
    nose_x, _ = nose_point(rightmost_contour(clean))
    span = int(np.floor(roi_fraction * (bx1 - bx0 + 1) + 0.5))
    pad = int(np.floor(pad_fraction * h + 0.5))
    return max(0, nose_x - span), max(0, by0 - pad), nose_x, min(h - 1, by1 + pad)


def extract_roi(original, clean, roi_fraction=0.5, max_level=DEFAULT_MAX_LEVEL,
                open_radius=20, close_radius=10, close=True):
    """Cut the head window and re-binarize it from the original pixels.

    The window is taken from the already rescaled image, so the cleaning
    radii carry over unchanged.
    """
    original = check_gray(original)
    clean = check_mask(clean)
    if original.shape != clean.shape:
        raise InvalidInputError("original image and mask must share the working scale")
    x0, y0, x1, y1 = roi_window(clean, roi_fraction)
    nose = nose_point(rightmost_contour(clean))
    window = original[y0:y1 + 1, x0:x1 + 1]
    seg = segment_specimen(window, max_level)
    mask = clean_mask(seg.mask, open_radius, close_radius, close=close)
    return Roi(x0=x0, y0=y0, width=x1 - x0 + 1, height=y1 - y0 + 1, mask=mask,
               nose=(nose[0] - x0, nose[1] - y0), segmentation=seg)
