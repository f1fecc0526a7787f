"""Biparameter and partial Cauchy integral transforms on product Lipschitz surfaces."""

from .errors import (
    AccretiveLowerBoundFailure,
    ConfigError,
    DomainError,
    HypothesisViolation,
    NotAccretive,
    OracleUnavailable,
    ProductCauchyError,
    SingularKernel,
    ToleranceNotMet,
    ValidationFailure,
)
from .surface import (
    GridSpec,
    LipschitzCurve,
    ProductSurface,
    SampledField,
    curve_eval,
    field_norm,
    validate_curve,
)

__version__ = "0.1.0"

__all__ = [
    "AccretiveLowerBoundFailure",
    "ConfigError",
    "DomainError",
    "GridSpec",
    "HypothesisViolation",
    "LipschitzCurve",
    "NotAccretive",
    "OracleUnavailable",
    "ProductCauchyError",
    "ProductSurface",
    "SampledField",
    "SingularKernel",
    "ToleranceNotMet",
    "ValidationFailure",
    "curve_eval",
    "field_norm",
    "validate_curve",
]
