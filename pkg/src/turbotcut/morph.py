"""Binary morphology with geodesic reconstruction.

Erosion and dilation by a digital disk are evaluated through the exact
Euclidean distance transform: a pixel survives erosion by the disk of
radius ``r`` iff its nearest background pixel lies at squared distance
greater than ``r**2``. Pixels outside the frame count as background.
"""

from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .errors import InvalidInputError, NoSpecimenError
from .imgcore import check_mask

EIGHT = np.ones((3, 3), dtype=bool)


def disk_offsets(radius):
    """All integer offsets ``(dx, dy)`` with ``dx*dx + dy*dy <= radius**2``."""
    r = int(radius)
    d = np.arange(-r, r + 1)
    dx, dy = np.meshgrid(d, d)
    keep = dx * dx + dy * dy <= r * r
    return list(zip(dx[keep].tolist(), dy[keep].tolist()))


def disk(radius):
    """Footprint of the digital disk as a ``(2r+1, 2r+1)`` bool array."""
    r = int(radius)
    d = np.arange(-r, r + 1)
    return (d[None, :] ** 2 + d[:, None] ** 2) <= r * r


def _check_radius(radius):
    if radius < 1 or int(radius) != radius:
        raise InvalidInputError(f"structuring element radius must be a positive integer, got {radius}")
    return int(radius)


def _sq_distance_to_false(mask):
    """Exact squared distance from each pixel to the nearest False pixel,
    the frame being padded with False."""
    padded = np.pad(mask, 1, constant_values=False)
    dist = ndi.distance_transform_edt(padded)[1:-1, 1:-1]
    return np.rint(dist * dist)


def erode(mask, radius):
    mask = check_mask(mask)
    r = _check_radius(radius)
    if not mask.any():
        return np.zeros_like(mask)
    return _sq_distance_to_false(mask) > r * r


def dilate(mask, radius):
    mask = check_mask(mask)
    r = _check_radius(radius)
    if not mask.any():
        return np.zeros_like(mask)
    if mask.all():
        return mask.copy()
    # distance to the nearest foreground pixel; frame pixels are not foreground
    dist = ndi.distance_transform_edt(~mask)
    return np.rint(dist * dist) <= r * r


def reconstruct_by_dilation(marker, mask):
    """Union of the 8-connected components of ``mask`` touched by ``marker``."""
    mask = check_mask(mask)
    marker = check_mask(marker) & mask
    if not marker.any():
        return np.zeros_like(mask)
    labels, _ = ndi.label(mask, structure=EIGHT)
    hit = np.unique(labels[marker])
    hit = hit[hit > 0]
    return np.isin(labels, hit)


def open_by_reconstruction(mask, radius=20):
    mask = check_mask(mask)
    return reconstruct_by_dilation(erode(mask, radius), mask)


def close_by_reconstruction(mask, radius=10):
    mask = check_mask(mask)
    return ~open_by_reconstruction(~mask, radius)


@dataclass
class LabelMap:
    labels: np.ndarray
    count: int

    def sizes(self):
        return np.bincount(self.labels.ravel(), minlength=self.count + 1)


def label_components(mask):
    """8-connected labeling, labels numbered 1..count in raster scan order."""
    labels, count = ndi.label(check_mask(mask), structure=EIGHT)
    return LabelMap(labels=labels, count=int(count))


def largest_component(labelmap):
    if labelmap.count == 0:
        raise NoSpecimenError("mask is empty, no component to extract")
    sizes = labelmap.sizes()
    sizes[0] = -1
    # argmax returns the first maximum, i.e. the smallest label on ties
    return labelmap.labels == int(np.argmax(sizes))


def clean_mask(mask, open_radius=20, close_radius=10, close=True, stages=None):
    """Remove clutter, fill small pockets, keep the biggest object.

    The default radii assume the image was rescaled to the 2000-line
    working height. ``stages``, when a dict, receives the intermediate
    masks.
    """
    mask = check_mask(mask)
    opened = open_by_reconstruction(mask, open_radius)
    if not opened.any():
        raise NoSpecimenError("nothing survives the opening", stage="clean")
    closed = close_by_reconstruction(opened, close_radius) if close else opened
    result = largest_component(label_components(closed))
    if stages is not None:
        stages.update(opened=opened, closed=closed, largest=result)
    return result
