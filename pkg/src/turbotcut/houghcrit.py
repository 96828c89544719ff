"""Critical points from the distance between the contour and its two
dominant Hough lines."""

import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage as ndi

from .errors import DegenerateContourError, DetectionFailure, InvalidInputError
from .points import CriticalPoints

THETA_BINS = 180


@dataclass(frozen=True)
class LineParam:
    """Line ``x*cos(theta) + y*sin(theta) = rho`` with theta in [0, pi)."""

    rho: float
    theta: float

    def distance(self, x, y):
        return np.abs(np.asarray(x) * math.cos(self.theta) + np.asarray(y) * math.sin(self.theta) - self.rho)

    def x_at(self, y):
        c = math.cos(self.theta)
        if abs(c) < 1e-12:
            return None
        return (self.rho - y * math.sin(self.theta)) / c

    def translated(self, dx, dy):
        return LineParam(self.rho + dx * math.cos(self.theta) + dy * math.sin(self.theta), self.theta)


def trig_tables(theta_bins=THETA_BINS):
    """cos/sin per theta bin, built so that bin ``k`` and ``theta_bins - k``
    are exact vertical mirror images (cos negated, sin equal)."""
    k = np.arange(theta_bins)
    cos = np.cos(k * np.pi / theta_bins)
    sin = np.sin(k * np.pi / theta_bins)
    half = theta_bins // 2
    mirror = theta_bins - k[half + 1:]
    cos[half + 1:] = -cos[mirror]
    sin[half + 1:] = sin[mirror]
    if theta_bins % 2 == 0:
        cos[half] = 0.0
    return cos, sin


@dataclass
class HoughAccumulator:
    votes: np.ndarray        # (theta_bins, rho_bins)
    rho_offset: int          # rho value of column 0 is -rho_offset
    y_origin: float          # votes use y - y_origin
    n_points: int

    @property
    def theta_bins(self):
        return self.votes.shape[0]

    @property
    def rho_bins(self):
        return self.votes.shape[1]

    def theta_of(self, k):
        return k * math.pi / self.theta_bins

    def rho_of(self, j):
        return j - self.rho_offset

    def line(self, k, j):
        """Line of cell ``(k, j)`` expressed in absolute image coordinates."""
        _, sin = trig_tables(self.theta_bins)
        return LineParam(rho=self.rho_of(j) + self.y_origin * float(sin[k]), theta=self.theta_of(k))


def hough_accumulate(contour, theta_bins=THETA_BINS, y_origin=0.0):
    """Each valid contour point votes once per theta bin at the nearest rho.

    ``y_origin`` shifts the row coordinate before voting; using the centre
    of the contour's row span makes the votes of a vertically mirrored
    contour the exact mirror image of the original's.
    """
    pts = contour.points() if hasattr(contour, "points") else np.asarray(contour)
    pts = np.asarray(pts, dtype=np.float64)
    x = pts[:, 0]
    y = pts[:, 1] - y_origin
    cos, sin = trig_tables(theta_bins)
    reach = int(math.ceil(math.hypot(np.abs(x).max(initial=0), np.abs(y).max(initial=0)))) + 1
    rho = np.rint(np.outer(cos, x) + np.outer(sin, y)).astype(np.int64) + reach
    n_rho = 2 * reach + 1
    flat = (np.arange(theta_bins)[:, None] * n_rho + rho).ravel()
    votes = np.bincount(flat, minlength=theta_bins * n_rho).reshape(theta_bins, n_rho)
    return HoughAccumulator(votes=votes, rho_offset=reach, y_origin=float(y_origin), n_points=len(pts))


def _pick_max(votes):
    """Cell with most votes. Ties prefer the larger 3x3 neighbourhood sum,
    then the smaller |rho - centre|, then bins closer to 90 degrees; all
    three keys are invariant under vertical mirroring."""
    best = votes.max()
    ks, js = np.nonzero(votes == best)
    if len(ks) == 1:
        return int(ks[0]), int(js[0])
    local = ndi.uniform_filter(votes.astype(np.float64), size=3, mode="constant") * 9
    centre = (votes.shape[1] - 1) / 2
    keys = [(-round(local[k, j]), abs(j - centre), abs(2 * k - votes.shape[0]), k, j) for k, j in zip(ks, js)]
    _, _, _, k, j = min(keys)
    return int(k), int(j)


def line_support(votes, rho_window=2):
    """Votes gathered within +-``rho_window`` rho bins of each cell.

    With 1 degree theta bins a long digital line spreads its votes over a
    few neighbouring rho bins; the windowed sum counts the contour points
    lying within ``rho_window`` pixels of the cell's line.
    """
    size = 2 * rho_window + 1
    return ndi.uniform_filter1d(votes.astype(np.float64), size=size, axis=1, mode="constant") * size


def _snap_rho(votes, k, j, window):
    """Move ``j`` to the vote-weighted centre of row ``k`` within ``window``.

    A line lying between theta bins spreads its votes over a plateau of
    rho bins; the centroid lands in the middle of it. Half-way values
    round towards the rho centre, which keeps the choice mirror-symmetric.
    """
    lo, hi = max(0, j - window), min(votes.shape[1] - 1, j + window)
    seg = votes[k, lo:hi + 1].astype(np.float64)
    if seg.sum() <= 0:
        return k, j
    pos = lo + float(np.dot(np.arange(len(seg)), seg) / seg.sum())
    centre = (votes.shape[1] - 1) / 2
    below, above = math.floor(pos), math.ceil(pos)
    if pos - below < above - pos:
        best = below
    elif pos - below > above - pos:
        best = above
    else:
        best = below if abs(below - centre) <= abs(above - centre) else above
    return k, int(best)


def dominant_lines(acc, theta_window_deg=10, rho_window=20, min_support=0.10, contour=None,
                   support_window=2):
    """Two strongest, well separated lines of the accumulator.

    Cells are ranked by :func:`line_support` (ties by raw votes). The neighbourhood of the
    first maximum (``theta_window_deg`` degrees, ``rho_window`` pixels) is
    suppressed before looking for the second. When ``contour`` is given the
    pair is ordered so the first line is the one supported by the upper
    part of the contour.
    """
    support = np.rint(line_support(acc.votes, support_window)).astype(np.int64)
    if support.max() <= 0:
        raise DegenerateContourError("empty accumulator")
    # rank by windowed support, then by the cell's own votes
    score = support * (int(acc.votes.max()) + 1) + acc.votes
    k1, j1 = _snap_rho(acc.votes, *_pick_max(score), support_window)
    first_votes = int(support[k1, j1])
    dk = int(round(theta_window_deg * acc.theta_bins / 180))
    score[max(0, k1 - dk):k1 + dk + 1, max(0, j1 - rho_window):j1 + rho_window + 1] = -1
    # theta wraps at pi with rho negated: (k, rho) and (k + bins, -rho) are the same line
    jm = 2 * acc.rho_offset - j1
    mlo, mhi = max(0, jm - rho_window), jm + rho_window + 1
    if k1 - dk < 0:
        score[acc.theta_bins + k1 - dk:, mlo:mhi] = -1
    if k1 + dk >= acc.theta_bins:
        score[:k1 + dk - acc.theta_bins + 1, mlo:mhi] = -1
    k2, j2 = _snap_rho(acc.votes, *_pick_max(score), support_window)
    second_votes = int(support[k2, j2])
    if second_votes < min_support * acc.n_points:
        raise DegenerateContourError(
            f"second line has {second_votes} votes, below {min_support:.0%} of {acc.n_points} points")
    lines = (acc.line(k1, j1), acc.line(k2, j2))
    bins = ((k1, j1, first_votes), (k2, j2, second_votes))
    if contour is not None:
        rows = contour.rows.astype(np.float64)
        xs = contour.points_x.astype(np.float64)
        mean_rows = []
        for ln in lines:
            near = ln.distance(xs, rows) <= 1.5
            mean_rows.append(rows[near].mean() if near.any() else np.inf)
        if mean_rows[1] < mean_rows[0]:
            lines = lines[::-1]
            bins = bins[::-1]
    return lines, bins


def refine_line(line, xs, ys, band=2.0, iterations=2):
    """Total least-squares fit of ``line`` to the points within ``band`` px.

    Removes the quantization of the accumulator cell (1 degree, 1 px) so
    that straight contour stretches sit at sub-pixel distance from the line.
    The fit uses only point differences from the inlier mean, so it is
    equivariant under mirroring of the coordinates.
    """
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    for _ in range(iterations):
        near = line.distance(xs, ys) <= band
        if near.sum() < 3:
            break
        px, py = xs[near], ys[near]
        mx, my = px.mean(), py.mean()
        dx, dy = px - mx, py - my
        sxx, syy, sxy = float(dx @ dx), float(dy @ dy), float(dx @ dy)
        # normal direction = eigenvector of the smaller eigenvalue
        theta = 0.5 * math.atan2(2 * sxy, sxx - syy) + math.pi / 2
        theta %= math.pi
        line = LineParam(rho=mx * math.cos(theta) + my * math.sin(theta), theta=theta)
    return line


def distance_signal(contour, lines, decimals=9):
    """Distance from every valid contour point to the nearer of the lines.

    Values are rounded to ``decimals`` places so that float noise of a few
    ulps cannot break exact ties between samples.
    """
    rows = contour.rows.astype(np.float64)
    xs = contour.points_x.astype(np.float64)
    d = np.min([ln.distance(xs, rows) for ln in lines], axis=0)
    return np.round(d, decimals)


def detect_peaks(signal, window_fraction=0.02, prominence=1.0):
    """Indices that dominate their neighbourhood.

    ``i`` qualifies when ``s[i]`` is the maximum of the full window
    ``[i - w, i + w]`` (``w = round(window_fraction * len)``, at least 1) and
    exceeds the window minimum by at least ``prominence``. Samples whose
    window would leave the signal are not considered. Minima are the peaks
    of ``-signal``.
    """
    s = np.asarray(signal, dtype=np.float64)
    n = len(s)
    if n < 3:
        raise InvalidInputError("signal needs at least 3 samples")
    w = max(1, int(math.floor(window_fraction * n + 0.5)))
    if 2 * w + 1 > n:
        return np.array([], dtype=np.int64)
    size = 2 * w + 1
    hi = ndi.maximum_filter1d(s, size=size, mode="nearest")
    lo = ndi.minimum_filter1d(s, size=size, mode="nearest")
    ok = (s >= hi) & (s - lo >= prominence)
    ok[:w] = False
    ok[n - w:] = False
    return np.flatnonzero(ok)


def detect_minima(signal, window_fraction=0.02, prominence=1.0):
    return detect_peaks(-np.asarray(signal, dtype=np.float64), window_fraction, prominence)


def critical_points_hough(contour, nose, peak_window=0.02, peak_prominence=1.0,
                          nose_exclusion=0.05, theta_bins=THETA_BINS):
    """Locate head beginning and head ending on ``contour``.

    The head beginning is the distance peak closest to either end of the
    signal; its side tells the eye orientation. The head ending is the
    first local minimum on the opposite side of the nose, searched outward
    past an exclusion zone around the nose.
    """
    rows = contour.rows
    xs = contour.points_x
    n = len(rows)
    if n < 3:
        raise DegenerateContourError("contour too short")
    y_origin = (rows[0] + rows[-1]) / 2
    acc = hough_accumulate(contour, theta_bins, y_origin=y_origin)
    lines, _ = dominant_lines(acc, contour=contour)
    lines = tuple(refine_line(ln, xs, rows) for ln in lines)
    signal = distance_signal(contour, lines)

    peaks = detect_peaks(signal, peak_window, peak_prominence)
    if peaks.size == 0:
        raise DetectionFailure("no distance peak for the head beginning", point="head_begin",
                               stage="critical_points")
    edge = np.minimum(peaks, n - 1 - peaks)
    closest = peaks[edge == edge.min()]
    # an exact tie between both ends keeps the upper candidate
    ib = int(closest[0])
    eyes_reversed = bool(n - 1 - ib < ib)

    nose_idx = int(np.searchsorted(rows, nose[1]))
    excl = int(math.floor(nose_exclusion * n + 0.5))
    minima = detect_minima(signal, peak_window, peak_prominence)
    if eyes_reversed:
        cands = minima[minima < nose_idx - excl][::-1]
    else:
        cands = minima[minima > nose_idx + excl]
    if cands.size == 0:
        raise DetectionFailure("no distance minimum for the head ending", point="head_end",
                               stage="critical_points")
    ie = int(cands[0])
    return CriticalPoints(head_begin=(int(xs[ib]), int(rows[ib])), nose=tuple(int(v) for v in nose),
                          head_end=(int(xs[ie]), int(rows[ie])), eyes_reversed=eyes_reversed,
                          method="hough", signal=signal, lines=lines, indices=(ib, ie))
