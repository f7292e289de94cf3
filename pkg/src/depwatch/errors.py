"""Exception and warning types shared across depwatch."""

from __future__ import annotations


class DepwatchError(Exception):
    """Base class for all depwatch errors."""


class SnapshotParseError(DepwatchError):
    """Malformed snapshot syntax; carries the offending position when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class FormatVersionError(DepwatchError):
    """Snapshot declares a format_version this build does not understand."""


class ValidationError(DepwatchError):
    """Input violates a documented invariant or precondition."""


class UnknownNodeError(DepwatchError):
    """Graph query referenced a node that is not in the graph."""


class NotFoundError(DepwatchError):
    """Requested repository or library does not exist in the activity source."""


class RateLimitedError(DepwatchError):
    """Provider refused the request; retry after ``retry_after`` seconds."""

    def __init__(self, message: str, retry_after: float):
        super().__init__(message)
        self.retry_after = retry_after


class TransportError(DepwatchError):
    """Network-level failure talking to a live provider."""


class TrainingError(DepwatchError):
    """Dataset unsuitable for classifier training (e.g. a label class is absent)."""


class SchemaMismatchError(ValidationError):
    """Feature schema does not match the schema a model was trained on."""


class FitError(DepwatchError):
    """Time series unsuitable for fitting a forecaster."""


class SnapshotWarning(UserWarning):
    """Non-fatal oddity found while parsing a snapshot (e.g. unknown keys)."""
