"""Exception hierarchy.

Every error carries an ``exit_code`` so the command line driver can map a
failure to the documented process status without a lookup table.
"""


class TurbotError(Exception):
    exit_code = 1

    def __init__(self, message, stage=None):
        super().__init__(message)
        self.stage = stage

    def __str__(self):
        msg = super().__str__()
        return f"[{self.stage}] {msg}" if self.stage else msg


class InvalidInputError(TurbotError, ValueError):
    exit_code = 2


class ConfigError(InvalidInputError):
    pass


class DecodeError(TurbotError):
    """Unreadable, truncated or unsupported image file."""
    exit_code = 4


class DegenerateHistogramError(InvalidInputError):
    """Histogram has fewer than two populated levels."""


class DegenerateThresholdError(InvalidInputError):
    pass


class InvalidSpecError(InvalidInputError):
    pass


class DetectionError(TurbotError):
    exit_code = 3


class NoSpecimenError(DetectionError):
    pass


class DegenerateContourError(DetectionError):
    pass


class DetectionFailure(DetectionError):
    """A critical point could not be located."""

    def __init__(self, message, point=None, stage=None):
        super().__init__(message, stage=stage)
        self.point = point


class DegenerateGeometryError(DetectionError):
    pass


class SingularSystemError(DetectionError):
    pass


class AlignmentError(DetectionError):
    pass


class SerializationError(TurbotError):
    exit_code = 4
