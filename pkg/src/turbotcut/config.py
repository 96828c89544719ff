"""Pipeline configuration: ``key = value`` files with command-line overrides."""

import math
from dataclasses import dataclass, fields, replace

from .errors import ConfigError
from .export import Calibration


@dataclass(frozen=True)
class PipelineConfig:
    target_lines: int = 2000
    max_level: float = 0.80
    open_radius: int = 20
    close_radius: int = 10
    close_enabled: bool = True
    roi_fraction: float = 0.50
    method: str = "hull"
    curve: str = "ellipse"
    bulge: str = "body"
    peak_window: float = 0.02
    peak_prominence: float = 1.0
    nose_exclusion: float = 0.05
    min_notch_depth: float = 2.0
    mm_per_px_x: float = 1.0
    mm_per_px_y: float = 1.0
    origin_px: tuple = (0.0, 0.0)

    def __post_init__(self):
        validate(self)

    @property
    def calibration(self):
        return Calibration(self.mm_per_px_x, self.mm_per_px_y, self.origin_px)


CHOICES = {
    "method": ("hough", "hull"),
    "curve": ("parabola", "ellipse"),
    "bulge": ("body", "nose"),
}
UNIT_INTERVAL = ("max_level", "peak_window", "nose_exclusion")


def valid_keys():
    return [f.name for f in fields(PipelineConfig)]


def validate(cfg):
    for key, options in CHOICES.items():
        if getattr(cfg, key) not in options:
            raise ConfigError(f"{key} must be one of {', '.join(options)}, got {getattr(cfg, key)!r}")
    for f in fields(cfg):
        v = getattr(cfg, f.name)
        if f.name in CHOICES or f.name == "close_enabled":
            continue
        if f.name == "origin_px":
            if len(v) != 2 or not all(math.isfinite(c) for c in v):
                raise ConfigError("origin_px must be two finite numbers")
            continue
        if not (math.isfinite(v) and v > 0):
            raise ConfigError(f"{f.name} must be positive, got {v!r}")
        if f.name in UNIT_INTERVAL and not v < 1:
            raise ConfigError(f"{f.name} must lie in (0, 1), got {v!r}")
    if cfg.roi_fraction > 1:
        raise ConfigError("roi_fraction must lie in (0, 1]")


def _convert(key, raw):
    ftype = {f.name: f.type for f in fields(PipelineConfig)}[key]
    text = str(raw).strip()
    try:
        if key == "origin_px":
            parts = [p for p in text.replace("(", "").replace(")", "").replace(",", " ").split()]
            if len(parts) != 2:
                raise ValueError
            return (float(parts[0]), float(parts[1]))
        if ftype in (bool, "bool"):
            low = text.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if ftype in (int, "int"):
            value = float(text)
            if value != int(value):
                raise ValueError
            return int(value)
        if ftype in (float, "float"):
            return float(text)
        return text
    except ValueError:
        raise ConfigError(f"bad value for {key}: {raw!r}") from None


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    keys = set(valid_keys())
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, _, value = line.partition("=")
        key = key.strip()
        if key not in keys:
            raise ConfigError(f"line {lineno}: unknown key {key!r}; valid keys: {', '.join(valid_keys())}")
        values[key] = _convert(key, value)
    return values


def parse_config(path=None, overrides=None):
    """Defaults, then the file at ``path``, then ``overrides`` (flags win)."""
    values = {}
    if path is not None:
        with open(path, encoding="utf-8") as fh:
            values.update(parse_config_text(fh.read()))
    for key, value in (overrides or {}).items():
        if value is None:
            continue
        if key not in valid_keys():
            raise ConfigError(f"unknown key {key!r}; valid keys: {', '.join(valid_keys())}")
        values[key] = _convert(key, value) if isinstance(value, str) else value
    return replace(PipelineConfig(), **values) if values else PipelineConfig()
