"""Exception hierarchy."""


class SeqNetError(Exception):
    """Base class for every error raised by seqnet."""


class KindMismatchError(SeqNetError, TypeError):
    """Elements or sequences of different kinds or dimensions were combined."""


class LengthMismatchError(SeqNetError, ValueError):
    """An equal-length distance received sequences of different lengths."""


class EmptySequenceError(SeqNetError, ValueError):
    """A coupling distance received an empty sequence."""


class ParseError(SeqNetError, ValueError):
    """Malformed dataset text. ``line`` is 1-based."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class BudgetExceededError(SeqNetError, ValueError):
    """A brute-force routine was asked for more work than its budget allows."""


class NotMetricError(SeqNetError, ValueError):
    """A metric index was requested for a distance that is not a metric."""


class DuplicateIdError(SeqNetError, KeyError):
    """An object id is already present in the index."""


class MissingIdError(SeqNetError, KeyError):
    """An object id is not present in the index."""


class IndexFormatError(SeqNetError, ValueError):
    """A serialized index is malformed or fails validation."""


class ResultMismatchError(SeqNetError, AssertionError):
    """Two search methods disagreed on a result set."""


class EmptyIndexError(SeqNetError):
    """A query needs at least one indexed window."""
