"""Double-Otsu segmentation of a dark specimen on a light background.

The first Otsu level ``u0`` drives a gamma curve that maps ``u0`` to
``max_level`` (normalized), lifting mid-gray clutter such as stains towards
the background. A second Otsu pass on the corrected image then keeps the
dark class.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHistogramError, DegenerateThresholdError, InvalidInputError
from .imgcore import check_gray

DEFAULT_MAX_LEVEL = 0.80


@dataclass
class SegmentationReport:
    u0: int
    gamma: float
    u1: int
    mask: np.ndarray
    corrected: np.ndarray = None

    def summary(self):
        return {"u0": self.u0, "gamma": self.gamma, "u1": self.u1}


def histogram(img):
    """256-bin gray-level histogram (int64 counts)."""
    img = check_gray(img)
    return np.bincount(img.ravel(), minlength=256).astype(np.int64)


def otsu_threshold(hist):
    """Otsu level for a 256-bin histogram.

    Class 0 holds levels ``<= t`` and class 1 levels ``> t``. The
    between-class variance is compared as exact rational numbers so that
    equal scores tie exactly; ties go to the smallest ``t``.
    """
    counts = [int(c) for c in np.asarray(hist).ravel()]
    if len(counts) != 256 or min(counts) < 0:
        raise InvalidInputError("histogram must hold 256 non-negative counts")
    if sum(1 for c in counts if c > 0) < 2:
        raise DegenerateHistogramError("histogram has fewer than two populated levels")

    total = sum(counts)
    total_mass = sum(v * c for v, c in enumerate(counts))
    best_t, best_num, best_den = None, -1, 1
    n0 = 0
    mass0 = 0
    for t in range(255):
        n0 += counts[t]
        mass0 += t * counts[t]
        n1 = total - n0
        if n0 == 0 or n1 == 0:
            continue
        # sigma_B^2 * total^2 = (total*mass0 - total_mass*n0)^2 / (n0*n1)
        num = (total * mass0 - total_mass * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_t, best_num, best_den = t, num, den
    return best_t


def gamma_for_background(u0, max_target=DEFAULT_MAX_LEVEL):
    """Exponent that maps normalized level ``u0/255`` onto ``max_target``."""
    if not 0 < u0 < 255:
        raise DegenerateThresholdError(f"threshold {u0} leaves no room for a gamma correction")
    if not 0 < max_target < 1:
        raise InvalidInputError("max_target must lie in (0, 1)")
    return math.log(max_target) / math.log(u0 / 255)


def gamma_lut(gamma):
    if not gamma > 0:
        raise InvalidInputError("gamma must be positive")
    levels = np.arange(256, dtype=np.float64) / 255.0
    return np.floor(255.0 * levels**gamma + 0.5).astype(np.uint8)


def apply_gamma(img, gamma):
    return gamma_lut(gamma)[check_gray(img)]


def segment_specimen(img, max_level=DEFAULT_MAX_LEVEL, polarity="dark"):
    """Binarize the specimen.

    With ``polarity="light"`` the image is inverted first, so a light
    object on a dark field goes through exactly the same path as the
    dark-on-light case.
    """
    img = check_gray(img)
    if polarity == "light":
        img = 255 - img
    elif polarity != "dark":
        raise InvalidInputError(f"unknown polarity {polarity!r}")
    u0 = otsu_threshold(histogram(img))
    gamma = gamma_for_background(u0, max_level)
    corrected = apply_gamma(img, gamma)
    u1 = otsu_threshold(histogram(corrected))
    return SegmentationReport(u0=u0, gamma=gamma, u1=u1, mask=corrected <= u1, corrected=corrected)
