"""Exception types shared across the toolkit.

Everything inherits from ToolkitError so the CLI can map failures to a
single runtime exit code.
"""

from __future__ import annotations


class ToolkitError(Exception):
    """Base class for all toolkit errors."""


class EmptyCorpus(ToolkitError):
    """No usable text was supplied where at least one sentence is required."""


class EmptyInput(ToolkitError):
    """An operation received an empty record collection."""


class ParseError(ToolkitError):
    """A text input (manifest line, ARPA section, ...) could not be parsed."""

    def __init__(self, message: str, *, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)


class MissingField(ParseError):
    """A required manifest field is absent."""

    def __init__(self, field: str, *, path: str | None = None, line: int | None = None):
        self.field = field
        super().__init__(f"missing required field {field!r}", path=path, line=line)


class CountMismatch(ToolkitError):
    """ARPA section sizes disagree with the \\data\\ header."""


class BadMagic(ToolkitError):
    """A binary file does not start with the expected magic bytes."""


class VersionMismatch(ToolkitError):
    """A binary file was written with an unsupported format version."""


class TruncatedFile(ToolkitError):
    """A binary file ended before the declared payload was complete."""


class ShapeMismatch(ToolkitError):
    """Posterior matrix width disagrees with the vocabulary size."""


class NotNormalized(ToolkitError):
    """A probability vector does not sum to one within tolerance."""


class EmptyReference(ToolkitError):
    """A WER reference has zero words."""


class ZeroVector(ToolkitError):
    """Cosine similarity was requested for a zero-norm vector."""


class TooShort(ToolkitError):
    """A waveform is shorter than the encoder's receptive field."""


class DimensionMismatch(ToolkitError):
    """Vector/codebook dimensions are inconsistent."""


class DegenerateStatisticsWarning(UserWarning):
    """Counts-of-counts were too sparse for Chen-Goodman discounts."""
