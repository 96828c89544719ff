import os

import numpy as np
import pytest

DATA = os.path.join(os.path.dirname(__file__), "data")


def disk_mask(shape, cx, cy, r):
    yy, xx = np.mgrid[0:shape[0], 0:shape[1]]
    return (xx - cx) ** 2 + (yy - cy) ** 2 <= r * r


def flood_fill_count(mask):
    """Independent 8-connected component count by explicit stack flood fill."""
    mask = np.asarray(mask, bool)
    seen = np.zeros_like(mask)
    h, w = mask.shape
    count = 0
    for y0 in range(h):
        for x0 in range(w):
            if not mask[y0, x0] or seen[y0, x0]:
                continue
            count += 1
            stack = [(y0, x0)]
            seen[y0, x0] = True
            while stack:
                y, x = stack.pop()
                for dy in (-1, 0, 1):
                    for dx in (-1, 0, 1):
                        ny, nx = y + dy, x + dx
                        if 0 <= ny < h and 0 <= nx < w and mask[ny, nx] and not seen[ny, nx]:
                            seen[ny, nx] = True
                            stack.append((ny, nx))
    return count


def notched_rectangle(h=200, w=200, notch_rows=(60, 80), depth=7):
    """Rectangle occupying columns [20, 150] with a notch cut into its right edge."""
    mask = np.zeros((h, w), bool)
    mask[20:180, 20:151] = True
    mask[notch_rows[0]:notch_rows[1], 151 - depth:151] = False
    return mask


@pytest.fixture(scope="session")
def corpus_member_0():
    from turbotcut import synth
    return synth.corpus_member(0, 0)


ACCEPTANCE_LINES = []


def record_acceptance(number, status, detail):
    """Remember one criterion result for the end-of-run summary."""
    line = f"criterion {number:>2}: {status:<7} {detail}"
    ACCEPTANCE_LINES.append((number, line))
    print(line)
    return line


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
