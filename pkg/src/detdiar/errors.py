"""Exception hierarchy.

Everything raised on bad input derives from :class:`DiarizationError`, which
is a ``ValueError`` so generic callers can still catch it that way.
"""

from __future__ import annotations


class DiarizationError(ValueError):
    """Base class for domain errors (bad input, violated contracts)."""


class InvalidIntervalError(DiarizationError):
    """Interval with non-finite bounds, negative start or non-positive duration."""


class RecordingMismatchError(DiarizationError):
    """Inputs that must belong to one recording reference several."""


class ParseError(DiarizationError):
    """Malformed line in a text input; carries the 1-based line number."""

    def __init__(self, message: str, lineno: int, line: str = ""):
        self.lineno = lineno
        self.line = line
        self.message = message
        detail = f"line {lineno}: {message}"
        if line:
            detail += f" ({line.strip()!r})"
        super().__init__(detail)


class RttmParseError(ParseError):
    pass


class ProposalParseError(ParseError):
    pass


class EmbeddingFormatError(DiarizationError):
    """Invalid DEMB container."""


class BadMagicError(EmbeddingFormatError):
    pass


class TruncatedPayloadError(EmbeddingFormatError):
    """Byte count differs from what the header promises (short or trailing data)."""


class InvalidDimensionError(EmbeddingFormatError):
    pass


class MissingActivityError(DiarizationError):
    pass


class EmptyInputError(DiarizationError):
    pass


class UndefinedDerError(DiarizationError):
    """Hypothesis speech scored against an empty reference."""
