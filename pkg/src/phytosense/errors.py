"""Exception types raised across the pipeline stages."""


class PhytosenseError(Exception):
    """Base class for all pipeline errors."""


class ConfigError(PhytosenseError):
    """Invalid experiment configuration or missing input path."""


class MalformedRow(PhytosenseError):
    """A CSV row that cannot be parsed; carries the 1-based line number."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NonMonotoneTimestamp(PhytosenseError):
    """Timestamps out of order by more than one row (corrupted export)."""


class EmptyFile(PhytosenseError):
    """File contains no data rows."""


class TooSparse(PhytosenseError):
    """Fewer than two present values; interpolation undefined."""


class DegenerateSeries(PhytosenseError):
    """Zero-variance series; z-scoring undefined (dead electrode)."""


class MissingValue(PhytosenseError):
    """Environmental value absent where one is required."""


class TooFewMinoritySamples(PhytosenseError):
    """Minority class has fewer than two samples; SMOTE undefined."""


class SingularCovariance(PhytosenseError):
    """Class covariance not positive definite even after ridge."""


class NonFiniteInput(PhytosenseError):
    """NaN or infinity in a feature matrix handed to a learner."""


class DimensionMismatch(PhytosenseError):
    """Column count differs from the one seen at fit time."""


class LengthMismatch(PhytosenseError):
    """y_true and y_pred have different lengths."""


class SingleClassInput(PhytosenseError):
    """Only one class present where two are required."""


class ClassTooSmall(PhytosenseError):
    """A class has too few samples to split as requested."""


class NoDays(PhytosenseError):
    """No day series supplied to the daily-profile computation."""


class NoValidCandidate(PhytosenseError):
    """Every pipeline candidate was discarded during search."""
