"""Exception hierarchy shared across the package."""


class CpdError(Exception):
    """Base class for all errors raised by this package."""


class MissingColumn(CpdError):
    """A requested CSV column is not present in the header."""


class NonEquidistantTimestamps(CpdError):
    """Timestamps are not strictly increasing on a uniform grid.

    Attributes:
        row: 1-based index of the first offending data row.
    """

    def __init__(self, row: int, message: str | None = None):
        self.row = row
        super().__init__(message or f"non-equidistant timestamp at data row {row}")


class EmptyAfterCleaning(CpdError):
    """Fewer than two usable rows remain after dropping incomplete ones."""


class ZeroVariance(CpdError):
    """All samples are equal; z-scoring is undefined."""


class IndexOutOfRange(CpdError):
    """An index lies outside the series."""


class SegmentTooShort(CpdError):
    """Segment is shorter than the cost model's minimum size."""


class DegenerateSegment(CpdError):
    """Segment statistics make the requested cost undefined (zero variance)."""


class NoConvergence(CpdError):
    """Iterative solver did not reach its tolerance; carries the best iterate."""

    def __init__(self, message: str, coef=None, objective: float | None = None):
        self.coef = coef
        self.objective = objective
        super().__init__(message)


class SeriesTooShort(CpdError):
    """Series cannot hold two segments of the minimum size."""


class SeriesTooLong(CpdError):
    """Series exceeds the guard rail of an O(n^2) routine."""


class MismatchedLength(CpdError):
    """Two segmentations do not refer to the same series length."""


class DegenerateBeliefWarning(UserWarning):
    """Posterior and user belief are contradictory certainties at some index."""
