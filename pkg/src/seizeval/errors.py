"""Exception types shared across the package.

Every error raised on purpose derives from :class:`SeizevalError`, so callers
can catch one base class at pipeline boundaries while tests assert on the
specific subclass.
"""


class SeizevalError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(SeizevalError, ValueError):
    """Structurally invalid input (unsorted events, non-binary labels, ...)."""


class AlignmentError(SeizevalError, ValueError):
    """Two series that must share length / sampling rate / origin do not."""


class BoundaryError(SeizevalError, ValueError):
    """An event or sample index falls outside the span of its recording."""


class DomainError(SeizevalError, ValueError):
    """A parameter is outside its mathematical domain (e.g. duration <= 0)."""


class CapacityError(SeizevalError, ValueError):
    """Not enough data to satisfy a construction rule (subset building, folds)."""


class SchemaError(SeizevalError, ValueError):
    """Column/feature layout mismatch between producer and consumer."""


class TrainingError(SeizevalError, RuntimeError):
    """A model cannot be fitted on the given training data."""


class ExperimentError(SeizevalError, RuntimeError):
    """A pipeline stage failed; the message names the stage that raised."""


class EdfError(SeizevalError):
    """Base class for EDF container problems."""


class EdfParseError(EdfError):
    """Byte stream is truncated or not decodable at a given offset."""

    def __init__(self, message: str, offset: int | None = None):
        super().__init__(message if offset is None else f"{message} (byte offset {offset})")
        self.offset = offset


class EdfFormatError(EdfError):
    """Header fields are internally inconsistent."""


class ChannelLookupError(EdfError, KeyError):
    """A requested channel label is missing or ambiguous."""
