"""Exception types raised across the package."""


class LevyFieldError(Exception):
    """Base class for all package errors."""


class DomainError(LevyFieldError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedKernelError(LevyFieldError, ValueError):
    """The kernel lacks the decay or support certificate an operation needs."""


class UnsupportedProvenanceError(LevyFieldError, ValueError):
    """No analytic limit is available for this sampling-set provenance."""


class CapacityError(LevyFieldError, MemoryError):
    """A requested grid would exceed the configured memory budget."""

    def __init__(self, message, required_bytes):
        super().__init__(message)
        self.required_bytes = required_bytes


class BoundaryError(LevyFieldError, ValueError):
    """Kernel support around a requested point leaves the noise-grid window."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class CoverageError(LevyFieldError, KeyError):
    """A field sample lacks a value an estimator needs."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class DegenerateError(LevyFieldError, ArithmeticError):
    """A statistic is undefined for this input (empty set, zero denominator, ...)."""


class ConfigError(LevyFieldError, ValueError):
    """An experiment configuration is invalid."""
