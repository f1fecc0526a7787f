"""Exception hierarchy shared by all modules."""


class ProductCauchyError(Exception):
    """Base class for every error raised by the package."""


class ValidationFailure(ProductCauchyError):
    """A sampled curve violates one of its structural invariants."""


class DomainError(ProductCauchyError, ValueError):
    """An argument lies outside the domain of the operation."""


class SingularKernel(ProductCauchyError, ZeroDivisionError):
    """A kernel was evaluated on its singular set."""


class ToleranceNotMet(ProductCauchyError):
    """The quadrature error estimate exceeds the requested tolerance."""

    def __init__(self, message, value=None, err_est=None):
        super().__init__(message)
        self.value = value
        self.err_est = err_est


class OracleUnavailable(ProductCauchyError):
    """No closed-form oracle exists for the requested configuration."""


class NotAccretive(ProductCauchyError):
    """The dyadic para-accretivity estimate is not positive."""


class AccretiveLowerBoundFailure(ProductCauchyError):
    """|P_k b| drops below the working lower bound on the grid."""


class HypothesisViolation(ProductCauchyError):
    """A probe was called without the cancellation or separation it assumes."""


class ConfigError(ProductCauchyError, ValueError):
    """A run configuration failed validation."""
