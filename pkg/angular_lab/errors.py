"""Exception hierarchy shared by the services, the CLI and the HTTP layer."""

from typing import Optional


class AngularLabError(Exception):
    """Base class for all lab errors."""

    exit_code = 2


class ConfigurationError(AngularLabError):
    """Missing field, unknown checker id or malformed run configuration."""

    def __init__(self, message: str, field: Optional[str] = None):
        super().__init__(message)
        self.field = field


class DomainError(ConfigurationError, ValueError):
    """A value lies outside the domain of the requested operation."""


class ScalingError(DomainError):
    """A scaling relation required as a precondition does not hold."""

    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.6g})")
        self.residual = residual


class DatumSupportError(DomainError):
    """Datum reaches too close to the periodic box boundary."""

    def __init__(self, support_radius: float, limit: float):
        super().__init__(
            f"datum support radius {support_radius:.4g} exceeds {limit:.4g}; "
            "min-image weights would be biased by periodization"
        )
        self.support_radius = support_radius
        self.limit = limit


class NonConvergenceError(AngularLabError):
    """A refinement or fixed-point iteration failed to settle."""

    exit_code = 3
