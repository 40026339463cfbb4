"""Exception types raised across the package."""


class FglapError(Exception):
    """Base class for all package errors."""


class RejectedParameterError(FglapError, ValueError):
    """A constructor argument lies outside the supported parameter range."""


class InvalidYoungFunctionError(FglapError, ValueError):
    pass


class DomainError(FglapError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class InsufficientExteriorDataError(FglapError):
    pass


class InvalidTestFunctionError(FglapError, ValueError):
    pass


class HypothesisViolationError(FglapError):
    """The input violates a hypothesis the computation depends on."""


class DivergentTailError(FglapError):
    pass


class InsufficientDataError(FglapError):
    pass


class ConfigurationError(FglapError, ValueError):
    pass


class SolverFailure(FglapError, RuntimeError):
    """Raised when the energy evaluates to NaN or another unrecoverable state."""
