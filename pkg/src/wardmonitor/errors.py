"""Error types raised across the package.

Every failure mode that callers are expected to branch on gets its own
class, so tests and the HTTP layer can match on identity instead of
parsing messages.
"""


class WardMonitorError(Exception):
    """Base class for all package errors."""


class NonPositiveHeight(WardMonitorError):
    pass


class UnknownIndex(WardMonitorError):
    pass


class InvalidSchedule(WardMonitorError):
    pass


class OutOfRange(WardMonitorError):
    pass


class InsufficientSamples(WardMonitorError):
    pass


class EmptyStream(WardMonitorError):
    pass


class DimensionMismatch(WardMonitorError):
    pass


class ShapeMismatch(WardMonitorError):
    pass


class EmptyDataset(WardMonitorError):
    pass


class UnlabeledWindow(WardMonitorError):
    pass


class IncompleteHistory(WardMonitorError):
    pass


class EmptyHistory(WardMonitorError):
    pass


class TooFewInstances(WardMonitorError):
    pass


class MalformedRow(WardMonitorError):
    """Carries the 1-based line number of the offending row."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class MissingFile(WardMonitorError):
    pass


class HeaderMismatch(WardMonitorError):
    pass


class NonContiguousMinutes(WardMonitorError):
    pass


class UnknownPatient(WardMonitorError):
    pass


class DuplicatePatient(WardMonitorError):
    pass


class EmptyBatch(WardMonitorError):
    pass


class Unavailable(WardMonitorError):
    """Result not ready yet (e.g. forecast queried before 75 minutes of data)."""


class BadRange(WardMonitorError):
    pass
