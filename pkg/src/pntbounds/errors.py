"""Exception types shared across the library."""


class PntBoundsError(Exception):
    """Base class for all library errors."""


class DomainError(PntBoundsError):
    """Argument outside the mathematical domain of an operation."""


class PrecisionExhausted(PntBoundsError):
    """Requested precision or exponent range cannot be honoured."""


class HypothesisViolated(PntBoundsError):
    """A theorem hypothesis failed; the message names the failed condition."""


class BelowTable(PntBoundsError):
    """Queried point lies left of the first row of a step table."""


class AboveLimit(PntBoundsError):
    """Queried point exceeds the sieve limit."""


class PartitionNotCovered(PntBoundsError):
    """A partition point has no admissible table row at or below it."""


class BranchMisuse(PntBoundsError):
    """Interval endpoints passed in the wrong order (x2 < x1)."""


class ParseError(PntBoundsError):
    """Malformed table or anchor file; carries a line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OrderError(ParseError):
    """Table rows are not strictly increasing in log x."""


class EmptyTable(ParseError):
    """Table file contains no data rows."""
