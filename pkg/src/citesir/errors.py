"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: schema/usage problems exit 1,
data-quality problems exit 2, numerical failures exit 3.
"""


class CiteSirError(Exception):
    """Base class for all package errors."""


class DomainError(CiteSirError, ValueError):
    """Invalid argument or parameter value (violates a documented precondition)."""


class SchemaError(CiteSirError):
    """Input file does not conform to the documented column schema."""


class DataError(CiteSirError):
    """Input data is structurally valid but semantically unusable."""


class InsufficientDataError(DataError):
    """Too few usable observations for the requested operation."""


class IngestionError(DataError):
    """Malformed-row rate exceeded the ingestion threshold."""

    def __init__(self, message: str, samples: tuple[str, ...] = ()):
        super().__init__(message)
        self.samples = samples


class NumericalError(CiteSirError):
    """Numerical procedure failed (instability, underflow, residual too large)."""


class ConvergenceError(NumericalError):
    """No optimizer restart converged; carries the best-effort result."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class SampleNotFoundError(CiteSirError, LookupError):
    """Requested time is not one of a trajectory's sample times."""
