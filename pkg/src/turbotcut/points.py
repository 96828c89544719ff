from dataclasses import dataclass, field, replace

import numpy as np


@dataclass
class CriticalPoints:
    """Head beginning, nose and head ending, as ``(x, y)`` pixels.

    ``eyes_reversed`` is set when the eye-side notch sits on the upper
    contour. ``signal``, ``lines`` and ``indices`` are diagnostics kept for
    debug output and plots.
    """

    head_begin: tuple
    nose: tuple
    head_end: tuple
    eyes_reversed: bool = False
    method: str = ""
    signal: np.ndarray = field(default=None, repr=False, compare=False)
    lines: tuple = field(default=None, repr=False, compare=False)
    indices: tuple = field(default=None, repr=False, compare=False)

    def translated(self, dx, dy):
        def mv(p):
            return (p[0] + dx, p[1] + dy)
        lines = None
        if self.lines is not None:
            lines = tuple(ln.translated(dx, dy) for ln in self.lines)
        return replace(self, head_begin=mv(self.head_begin), nose=mv(self.nose),
                       head_end=mv(self.head_end), lines=lines)

    def as_dict(self):
        return {
            "head_begin": list(self.head_begin),
            "nose": list(self.nose),
            "head_end": list(self.head_end),
            "eyes_reversed": self.eyes_reversed,
            "method": self.method,
        }
