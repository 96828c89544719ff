"""Machine-vision cutting curves for flatfish (turbot) head removal."""

__version__ = "0.1.0"

from .config import PipelineConfig, parse_config  # noqa: E402
from .errors import (DecodeError, DetectionError, DetectionFailure, InvalidInputError,  # noqa: E402
                     NoSpecimenError, SerializationError, TurbotError)
from .pipeline import RunResult, detect, run_pipeline  # noqa: E402

__all__ = ["PipelineConfig", "parse_config", "run_pipeline", "detect", "RunResult", "TurbotError",
           "InvalidInputError", "DecodeError", "DetectionError", "DetectionFailure", "NoSpecimenError",
           "SerializationError", "__version__"]
