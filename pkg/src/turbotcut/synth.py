"""Synthetic flatfish scenes with known critical points.

A specimen is a superellipse body extended by a triangular snout whose
flanks are tangent to the body, so body plus snout is convex. Two
concavities are then carved from the front contour:

* the upper notch, a V cut into the upper flank (where the dorsal fin
  starts), and
* the lower notch, a corner at the eye: the contour runs from the nose
  straight to the eye and from there along a new tangent to the body
  (the start of the ventral fin).

Nose-right orientation; ``mirrored`` flips the specimen vertically, which
models the less common fish with the eye notch on the upper side.
"""

import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import ndimage as ndi

from .errors import InvalidSpecError
from .imgcore import atomic_write_text, save_gray, save_mask

HEIGHT = 2000
WIDTH = 2400


@dataclass
class Notch:
    depth: float      # horizontal depth of the apex behind the flank, px
    width: float      # rows spanned by the V; for the eye corner, rows of its nose-side flank
    offset: float     # rows between the nose and the apex


@dataclass
class SpecimenSpec:
    center: tuple = (720.0, 1000.0)
    semi_axes: tuple = (560.0, 640.0)     # horizontal, vertical
    exponent: float = 2.2
    nose_extent: float = 470.0            # snout length beyond the body, px
    nose_dy: float = 0.0                  # vertical offset of the nose from the body centre
    notch_upper: Notch = field(default_factory=lambda: Notch(28.0, 56.0, 175.0))
    notch_lower: Notch = field(default_factory=lambda: Notch(30.0, 150.0, 150.0))
    flank_reach: float = 0.75             # flank corner position, fraction of nose-to-body tangent
    flank_bulge: float = 15.0             # outward offset of the flank corners, px
    eye_bump: float = 6.0                 # outward bulge of the fin just behind the eye, px
    mirrored: bool = False
    seed: int = 0
    height: int = HEIGHT
    width: int = WIDTH


@dataclass
class GroundTruth:
    mask: np.ndarray
    nose: tuple
    notch_upper: tuple    # upper notch in image space
    notch_lower: tuple
    eye_side: str         # "lower" for the standard pose, "upper" when mirrored
    spec: SpecimenSpec = None
    stains: list = field(default_factory=list)


def _superellipse_boundary(cx, cy, a, b, n, samples=20000):
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    c, s = np.cos(t), np.sin(t)
    x = cx + a * np.sign(c) * np.abs(c) ** (2 / n)
    y = cy + b * np.sign(s) * np.abs(s) ** (2 / n)
    return np.column_stack([x, y])


def _tangent_points(boundary, p, centre):
    """Upper and lower tangent points from external point ``p``."""
    v = boundary - p
    r = np.asarray(centre) - p
    ang = np.arctan2(r[0] * v[:, 1] - r[1] * v[:, 0], r[0] * v[:, 0] + r[1] * v[:, 1])
    a, b = boundary[np.argmin(ang)], boundary[np.argmax(ang)]
    return (a, b) if a[1] < b[1] else (b, a)


def _flank_corners(boundary, nose, centre, reach, bulge):
    """Convex corners ending the two snout flanks.

    Each corner sits at fraction ``reach`` of the way from the nose to the
    body tangent point, pushed ``bulge`` px outward. The flank is then an
    edge of the outline's convex hull: extended, it never meets the body
    again, and the outline turns away from it at the corner.
    """
    t_up, t_low = _tangent_points(boundary, nose, centre)
    out = []
    for t in (t_up, t_low):
        d = t - nose
        normal = np.array([-d[1], d[0]]) / np.hypot(*d)
        if np.dot(normal, np.asarray(centre) - nose - reach * d) > 0:
            normal = -normal
        out.append(nose + reach * d + bulge * normal)
    return out[0], out[1]


def _outline_tangent(boundary, corner, p, centre):
    """Lower tangent point from ``p`` to the body extended by ``corner``."""
    pts = np.vstack([boundary, corner])
    return _tangent_points(pts, p, centre)[1]


def _fill_convex(shape, verts, out, value):
    """Set pixels whose centre lies inside the convex polygon ``verts``."""
    verts = np.asarray(verts, dtype=np.float64)
    h, w = shape
    x0 = max(0, int(math.floor(verts[:, 0].min())))
    x1 = min(w - 1, int(math.ceil(verts[:, 0].max())))
    y0 = max(0, int(math.floor(verts[:, 1].min())))
    y1 = min(h - 1, int(math.ceil(verts[:, 1].max())))
    if x0 > x1 or y0 > y1:
        return
    xx, yy = np.meshgrid(np.arange(x0, x1 + 1, dtype=np.float64), np.arange(y0, y1 + 1, dtype=np.float64))
    inside_pos = np.ones(xx.shape, bool)
    inside_neg = np.ones(xx.shape, bool)
    m = len(verts)
    for k in range(m):
        ax, ay = verts[k]
        bx, by = verts[(k + 1) % m]
        cross = (bx - ax) * (yy - ay) - (by - ay) * (xx - ax)
        inside_pos &= cross >= -1e-9
        inside_neg &= cross <= 1e-9
    out[y0:y1 + 1, x0:x1 + 1][inside_pos | inside_neg] = value


def _edge_x(p, q, y):
    return p[0] + (y - p[1]) * (q[0] - p[0]) / (q[1] - p[1])


def _check(cond, msg):
    if not cond:
        raise InvalidSpecError(msg)


def generate_specimen(spec):
    """Rasterize ``spec`` and return its mask with the planted points."""
    h, w = spec.height, spec.width
    cx, cy = spec.center
    a, b = spec.semi_axes
    n = spec.exponent
    nu, nl = spec.notch_upper, spec.notch_lower
    _check(a > 0 and b > 0 and n > 0, "semi-axes and exponent must be positive")
    _check(nu.depth >= 3 and nl.depth >= 3, "notch depths must be at least 3 px")
    _check(nu.width > 0 and nl.width > 0, "notch widths must be positive")
    _check(spec.nose_extent > 0, "nose extent must be positive")

    nose = np.array([round(cx + a + spec.nose_extent), round(cy + spec.nose_dy)], dtype=np.float64)
    margin = 40
    _check(cx - a >= margin and cy - b >= margin and cy + b <= h - 1 - margin
           and nose[0] <= w - 1 - margin, "body does not fit the canvas with margin")

    boundary = _superellipse_boundary(cx, cy, a, b, n)
    t_up, t_low = _flank_corners(boundary, nose, (cx, cy), spec.flank_reach, spec.flank_bulge)
    j_up = _tangent_points(boundary, t_up, (cx, cy))[0]
    j_low = _tangent_points(boundary, t_low, (cx, cy))[1]

    # upper V on the flank nose -> t_up
    yu = nose[1] - nu.offset
    _check(t_up[1] + 20 < yu - nu.width / 2, "upper notch runs past the upper flank")
    _check(nu.offset - nu.width / 2 > 10, "upper notch reaches the nose")
    apex_u = np.array([_edge_x(nose, t_up, yu) - nu.depth, yu])
    p_top = np.array([_edge_x(nose, t_up, yu - nu.width / 2), yu - nu.width / 2])
    p_bot = np.array([_edge_x(nose, t_up, yu + nu.width / 2), yu + nu.width / 2])

    # eye corner on the flank nose -> t_low
    ye = nose[1] + nl.offset
    _check(t_low[1] - 20 > ye, "eye notch runs past the lower flank")
    eye = np.array([_edge_x(nose, t_low, ye) - nl.depth, ye])
    near = nose if nl.width >= nl.offset else np.array(
        [_edge_x(nose, t_low, ye - nl.width), ye - nl.width])
    t_eye = _outline_tangent(boundary, t_low, eye, (cx, cy))
    _check(np.array_equal(t_eye, t_low), "fin does not rest on the lower flank corner")
    _check(t_eye[1] > ye + 80, "eye corner is too close to the body")
    # the fin leaves the eye with a small outward bulge before it settles
    # on its line, so the eye is an isolated point of that line
    fin = (t_eye - eye) / (t_eye[1] - eye[1])
    bump_top, bump_end = eye + 20 * fin, eye + 45 * fin
    bump_top = bump_top + (spec.eye_bump, 0)

    mask = np.zeros((h, w), dtype=bool)
    xx = np.arange(w, dtype=np.float64)
    yy = np.arange(h, dtype=np.float64)
    by0, by1 = int(math.floor(cy - b)), int(math.ceil(cy + b)) + 1
    bx0, bx1 = int(math.floor(cx - a)), int(math.ceil(cx + a)) + 1
    sub = (np.abs((xx[None, bx0:bx1] - cx) / a) ** n + np.abs((yy[by0:by1, None] - cy) / b) ** n) <= 1
    mask[by0:by1, bx0:bx1] = sub
    _fill_convex(mask.shape, [j_up, t_up, nose, t_low, j_low], mask, True)

    far = 400.0
    _fill_convex(mask.shape, [p_top, apex_u, p_bot, p_bot + (far, 0), p_top + (far, 0)], mask, False)
    _fill_convex(mask.shape, [near, eye, t_eye, t_eye + (far, 0), near + (far, 0)], mask, False)
    if spec.eye_bump > 0:
        _fill_convex(mask.shape, [eye, bump_top, bump_end], mask, True)
    # the snout tip must stay a single rightmost pixel
    mask[int(nose[1]), int(nose[0])] = True

    labels, count = ndi.label(mask, structure=np.ones((3, 3), bool))
    _check(count == 1, "specimen is not a single connected shape")

    def rightmost(row):
        cols = np.flatnonzero(mask[int(round(row))])
        return int(cols[-1]), int(round(row))

    nose_px = (int(nose[0]), int(nose[1]))
    _check(mask[:, nose_px[0]:].sum() == 1, "nose is not the unique rightmost pixel")
    upper_px = rightmost(yu)
    lower_px = rightmost(ye)
    _check(abs(upper_px[0] - apex_u[0]) <= 1.5 and abs(lower_px[0] - eye[0]) <= 1.5,
           "notch apex is not on the contour")

    if spec.mirrored:
        mask = mask[::-1].copy()
        flip = lambda p: (p[0], h - 1 - p[1])  # noqa: E731
        nose_px, upper_px, lower_px = flip(nose_px), flip(lower_px), flip(upper_px)
        eye_side = "upper"
    else:
        eye_side = "lower"
    return GroundTruth(mask=mask, nose=nose_px, notch_upper=upper_px, notch_lower=lower_px,
                       eye_side=eye_side, spec=spec)


def random_spec(seed, mirrored=None, height=HEIGHT, width=WIDTH, max_tries=200):
    """Draw a valid specimen description, deterministic in ``seed``."""
    rng = np.random.default_rng(seed)
    if mirrored is None:
        mirrored = bool(rng.random() < 0.2)
    for _ in range(max_tries):
        eye_offset = rng.uniform(120, 170)
        spec = SpecimenSpec(
            center=(rng.uniform(680, 760), height / 2 + rng.uniform(-30, 30)),
            semi_axes=(rng.uniform(520, 600), rng.uniform(600, 680)),
            exponent=rng.uniform(1.8, 2.6),
            nose_extent=rng.uniform(430, 520),
            nose_dy=rng.uniform(-100, -60),
            notch_upper=Notch(depth=rng.uniform(26, 38), width=rng.uniform(40, 70), offset=0.0),
            notch_lower=Notch(depth=rng.uniform(20, 45), width=eye_offset, offset=eye_offset),
            mirrored=mirrored, seed=int(seed), height=height, width=width,
        )
        offset = _place_upper_notch(spec, gap=rng.uniform(6, 16))
        if offset is None:
            continue
        spec.notch_upper.offset = offset
        try:
            generate_specimen(spec)
        except InvalidSpecError:
            continue
        return spec
    raise InvalidSpecError(f"no valid specimen found for seed {seed}")


def _place_upper_notch(spec, gap):
    """Row offset putting the upper notch apex ``gap`` px left of the eye
    corner, so the eye is the notch nearer the nose."""
    cx, cy = spec.center
    a, b = spec.semi_axes
    nose = np.array([round(cx + a + spec.nose_extent), round(cy + spec.nose_dy)], dtype=np.float64)
    boundary = _superellipse_boundary(cx, cy, a, b, spec.exponent)
    t_up, t_low = _flank_corners(boundary, nose, (cx, cy), spec.flank_reach, spec.flank_bulge)
    nl, nu = spec.notch_lower, spec.notch_upper
    eye_x = _edge_x(nose, t_low, nose[1] + nl.offset) - nl.depth
    apex_flank_x = eye_x - gap + nu.depth
    # flank x decreases linearly with the distance from the nose row
    slope = (nose[0] - t_up[0]) / (nose[1] - t_up[1])
    offset = (nose[0] - apex_flank_x) / slope
    if not nu.width / 2 + 40 <= offset <= (nose[1] - t_up[1]) - nu.width / 2 - 60:
        return None
    return float(offset)


def _smooth_field(rng, shape, cells, lo, hi):
    coarse = rng.uniform(lo, hi, size=(cells, cells))
    zoom = (shape[0] / cells, shape[1] / cells)
    fine = ndi.zoom(coarse, zoom, order=1, mode="nearest")
    return fine[:shape[0], :shape[1]]


def generate_scene(gt, seed, stains=None, adversarial=False):
    """Gray scene for ground truth ``gt``.

    Light background (about 230, smooth gradient of +-15), textured dark
    fish in [30, 90] and 3-8 small mid-gray stains away from the fish.
    ``adversarial`` glues a chain of dark radius-25 blobs to the snout tip.
    """
    rng = np.random.default_rng(seed)
    h, w = gt.mask.shape
    yy, xx = np.mgrid[0:h, 0:w]
    ang = rng.uniform(0, 2 * np.pi)
    ramp = (np.cos(ang) * (xx / (w - 1) - 0.5) + np.sin(ang) * (yy / (h - 1) - 0.5)) * 2
    ramp /= max(np.abs(ramp).max(), 1e-9)
    img = 230 + 15 * ramp + rng.normal(0, 1.5, size=(h, w))
    img = np.clip(img, 215, 245)

    tex = _smooth_field(rng, (h, w), 48, 35, 85) + rng.normal(0, 2.0, size=(h, w))
    img[gt.mask] = np.clip(tex[gt.mask], 30, 90)

    placed = []
    count = int(rng.integers(3, 9)) if stains is None else stains
    far_from_fish = ndi.distance_transform_edt(~gt.mask)
    tries = 0
    while len(placed) < count and tries < 1000:
        tries += 1
        r = float(rng.uniform(5, 14))
        sx, sy = rng.uniform(r + 20, w - r - 20), rng.uniform(r + 20, h - r - 20)
        if far_from_fish[int(sy), int(sx)] < r + 15:
            continue
        if any(math.hypot(sx - px, sy - py) < r + pr + 10 for px, py, pr in placed):
            continue
        placed.append((sx, sy, r))
        level = rng.uniform(140, 180)
        disk = (xx - sx) ** 2 + (yy - sy) ** 2 <= r * r
        img[disk] = level + rng.normal(0, 2.0, size=int(disk.sum()))
    gt.stains = [{"x": round(px, 2), "y": round(py, 2), "r": round(pr, 2)} for px, py, pr in placed]

    if adversarial:
        # a diagonal chain of dark radius-25 blobs grown from the snout tip
        # past the lower notch row: it survives cleaning, fuses with the fish
        # and moves the rightmost point beyond a notch
        nx, ny = gt.nose
        lx, ly = gt.notch_lower
        sy = 1 if ly > ny else -1
        r = 25
        for k in range(1, int(math.ceil(abs(ly - ny) / 18)) + 4):
            sx, sy_ = nx + 18 * k, ny + sy * 18 * k
            disk = (xx - sx) ** 2 + (yy - sy_) ** 2 <= r * r
            img[disk] = 60
            gt.stains.append({"x": sx, "y": sy_, "r": r, "adversarial": True})
    return np.clip(np.floor(img + 0.5), 0, 255).astype(np.uint8)


def sidecar_text(gt, seed, adversarial=False):
    s = gt.spec
    lines = [
        f"seed={seed}",
        f"width={gt.mask.shape[1]}",
        f"height={gt.mask.shape[0]}",
        f"mirrored={int(bool(s.mirrored)) if s else 0}",
        f"adversarial={int(adversarial)}",
        f"eye_side={gt.eye_side}",
        f"nose={gt.nose[0]},{gt.nose[1]}",
        f"notch_upper={gt.notch_upper[0]},{gt.notch_upper[1]}",
        f"notch_lower={gt.notch_lower[0]},{gt.notch_lower[1]}",
        f"stains={len(gt.stains)}",
    ]
    return "\n".join(lines) + "\n"


def parse_sidecar(text):
    out = {}
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in ("nose", "notch_upper", "notch_lower"):
            x, y = value.split(",")
            out[key] = (int(x), int(y))
        elif key in ("seed", "width", "height", "mirrored", "adversarial", "stains"):
            out[key] = int(value)
        else:
            out[key] = value
    return out


def corpus_member(index, base_seed, adversarial=False):
    """Specimen and scene of corpus entry ``index``; every fifth is mirrored."""
    seed = base_seed * 1000 + index
    spec = random_spec(seed, mirrored=(index % 5 == 2))
    gt = generate_specimen(spec)
    scene = generate_scene(gt, seed + 7919, adversarial=adversarial)
    return gt, scene, seed


def write_corpus(out_dir, count=50, seed=0, adversarial=()):
    """Write ``count`` scenes with their mask and sidecar into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    names = []
    for i in range(count):
        adv = i in set(adversarial)
        gt, scene, member_seed = corpus_member(i, seed, adversarial=adv)
        name = f"specimen_{i:03d}"
        save_gray(os.path.join(out_dir, name + ".png"), scene)
        save_mask(os.path.join(out_dir, name + "_mask.png"), gt.mask)
        atomic_write_text(os.path.join(out_dir, name + ".txt"), sidecar_text(gt, member_seed, adv))
        names.append(name)
    return names


def spec_dict(spec):
    return asdict(spec)
