"""Raster plumbing: luminance conversion, rescaling and file I/O.

Images are plain numpy arrays, row-major with the origin at the top-left
corner: ``img[y, x]``. A gray image is ``uint8`` of shape ``(H, W)``; a
binary mask is ``bool`` of the same shape; an RGB image is ``uint8`` of
shape ``(H, W, 3)``.
"""

import os
import tempfile

import numpy as np
from PIL import Image, UnidentifiedImageError

from .errors import DecodeError, InvalidInputError

WORKING_LINES = 2000


def check_gray(img):
    img = np.asarray(img)
    if img.ndim != 2 or img.size == 0:
        raise InvalidInputError(f"expected a non-empty 2-D gray image, got shape {img.shape}")
    if img.dtype != np.uint8:
        if img.min() < 0 or img.max() > 255:
            raise InvalidInputError("gray levels must lie in [0, 255]")
        img = img.astype(np.uint8)
    return img


def check_mask(mask):
    mask = np.asarray(mask)
    if mask.ndim != 2:
        raise InvalidInputError(f"expected a 2-D mask, got shape {mask.shape}")
    return mask.astype(bool, copy=False)


def to_luminance(rgb):
    """Rec.601 luma, rounded half-up and clamped to [0, 255]."""
    rgb = np.asarray(rgb)
    if rgb.ndim == 2:
        return check_gray(rgb)
    if rgb.ndim != 3 or rgb.shape[2] < 3 or rgb.shape[0] == 0 or rgb.shape[1] == 0:
        raise InvalidInputError(f"expected a non-empty (H, W, 3) image, got shape {rgb.shape}")
    c = rgb[..., :3].astype(np.int64)
    if c.min() < 0 or c.max() > 255:
        raise InvalidInputError("channel values must lie in [0, 255]")
    # integer weights keep the half-up rounding exact
    lum = (299 * c[..., 0] + 587 * c[..., 1] + 114 * c[..., 2] + 500) // 1000
    return np.clip(lum, 0, 255).astype(np.uint8)


def scaled_width(width, height, target_lines):
    return max(1, int(np.floor(width * target_lines / height + 0.5)))


def _axis_weights(n_src, n_dst):
    # pixel-centre alignment; symmetric under flipping the axis
    pos = (np.arange(n_dst) + 0.5) * (n_src / n_dst) - 0.5
    pos = np.clip(pos, 0.0, n_src - 1)
    lo = np.floor(pos).astype(np.intp)
    hi = np.minimum(lo + 1, n_src - 1)
    frac = pos - lo
    return lo, hi, frac


def scale_to_height(img, target_lines=WORKING_LINES):
    """Bilinear resize so the image has exactly ``target_lines`` rows.

    Width follows the aspect ratio, rounded to the nearest pixel. An image
    that already has the target height is returned unchanged (as a copy).
    """
    img = check_gray(img)
    if target_lines < 1:
        raise InvalidInputError("target_lines must be >= 1")
    h, w = img.shape
    if h == target_lines:
        return img.copy()
    new_w = scaled_width(w, h, target_lines)
    y0, y1, fy = _axis_weights(h, target_lines)
    x0, x1, fx = _axis_weights(w, new_w)
    src = img.astype(np.float64)
    top = src[y0][:, x0] * (1 - fx) + src[y0][:, x1] * fx
    bot = src[y1][:, x0] * (1 - fx) + src[y1][:, x1] * fx
    out = top * (1 - fy)[:, None] + bot * fy[:, None]
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def load_image(path):
    """Read an 8-bit PNG (gray or RGB) or a binary PGM.

    Returns a gray ``(H, W)`` array or an ``(H, W, 3)`` RGB array.
    """
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode in ("1", "L", "P", "RGB", "RGBA", "LA"):
                if mode == "1":
                    arr = np.asarray(im.convert("L"))
                elif mode == "P":
                    arr = np.asarray(im.convert("RGB"))
                elif mode == "LA":
                    arr = np.asarray(im)[..., 0]
                elif mode == "RGBA":
                    arr = np.asarray(im)[..., :3]
                else:
                    arr = np.asarray(im)
            else:
                raise DecodeError(f"{path}: unsupported pixel format {mode!r} (8-bit gray or RGB only)")
    except FileNotFoundError as exc:
        raise DecodeError(f"{path}: no such file") from exc
    except (UnidentifiedImageError, OSError, SyntaxError, ValueError) as exc:
        raise DecodeError(f"{path}: cannot decode image ({exc})") from exc
    arr = np.array(arr, dtype=np.uint8)
    if arr.size == 0:
        raise DecodeError(f"{path}: empty image")
    return arr


def load_gray(path):
    return to_luminance(load_image(path))


def _atomic_save(pil_image, path):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            pil_image.save(fh, format="PNG")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text):
    path = os.fspath(path)
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_mask(path, mask):
    """Write a mask as an 8-bit PNG (0 / 255)."""
    mask = check_mask(mask)
    _atomic_save(Image.fromarray(np.where(mask, 255, 0).astype(np.uint8)), path)


def load_mask(path):
    return load_gray(path) >= 128


def save_gray(path, img):
    _atomic_save(Image.fromarray(check_gray(img)), path)


def save_overlay(path, rgb):
    rgb = np.asarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise InvalidInputError("overlay must be an (H, W, 3) array")
    _atomic_save(Image.fromarray(rgb), path)
