"""
Error types for fluxfit.

Every failure raised by the library is a FluxfitError carrying an ErrorCode.
The CLI maps the code straight onto the process exit status.
"""

from enum import Enum
from typing import Any, Dict, Optional


class ErrorCode(Enum):
    """Error classes and their CLI exit codes."""
    UNEXPECTED = 1
    USAGE = 2
    CONFIG = 3
    INVALID_PARAMETER = 4
    NUMERIC = 5
    SCHEMA = 6
    IO = 7
    SHAPE = 8
    TRAINING = 9
    PIPELINE = 10


class FluxfitError(Exception):
    """Base fluxfit error."""

    code = ErrorCode.UNEXPECTED

    def __init__(self, message: str, data: Optional[Dict[str, Any]] = None):
        self.message = message
        self.data = data or {}
        super().__init__(message)

    @property
    def exit_code(self) -> int:
        return self.code.value

    def to_dict(self) -> dict:
        d = {"code": self.code.name, "message": self.message}
        if self.data:
            d["data"] = self.data
        return d


class ConfigError(FluxfitError):
    code = ErrorCode.CONFIG


class InvalidParameterError(FluxfitError):
    code = ErrorCode.INVALID_PARAMETER


class NumericError(FluxfitError):
    code = ErrorCode.NUMERIC


class TransitionIndexError(FluxfitError):
    """Raised for a transition request with i >= j or levels out of range."""
    code = ErrorCode.INVALID_PARAMETER


class NearResonanceError(NumericError):
    """A perturbative denominator came within the guard of zero."""


class SchemaError(FluxfitError):
    code = ErrorCode.SCHEMA


class DatasetIOError(FluxfitError):
    code = ErrorCode.IO

    def __init__(self, message: str, entry_index: Optional[int] = None, path: Any = None):
        data = {}
        if entry_index is not None:
            data["entry_index"] = entry_index
        if path is not None:
            data["path"] = str(path)
        self.entry_index = entry_index
        super().__init__(message, data)


class ShapeError(FluxfitError):
    code = ErrorCode.SHAPE


class TrainingDivergenceError(FluxfitError):
    code = ErrorCode.TRAINING

    def __init__(self, message: str, epoch: int):
        self.epoch = epoch
        super().__init__(message, {"epoch": epoch})


class DegenerateBackgroundError(FluxfitError):
    code = ErrorCode.NUMERIC


class PipelineError(FluxfitError):
    """Stage failure inside the characterization pipeline."""

    code = ErrorCode.PIPELINE

    def __init__(self, stage: str, message: str, hint: Optional[str] = None):
        self.stage = stage
        self.hint = hint
        data = {"stage": stage}
        if hint:
            data["hint"] = hint
        text = f"[{stage}] {message}"
        if hint:
            text = f"{text} ({hint})"
        super().__init__(text, data)
