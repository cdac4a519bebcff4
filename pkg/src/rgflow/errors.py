"""Exception hierarchy shared by all modules.

The CLI maps these onto exit codes: ConfigError -> 2, DomainError -> 3,
NumericalError -> 4.
"""


class RGFlowError(Exception):
    """Base class for every error raised by the package."""


class ConfigError(RGFlowError, ValueError):
    """Malformed or inconsistent run configuration."""

    def __init__(self, field: str, message: str):
        self.field = field
        super().__init__(f"{field}: {message}")


class DomainError(RGFlowError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class BoundaryDivergenceError(DomainError):
    """Minimal-subtraction kernel evaluated at (or too close to) the boundary."""


class BFBoundError(DomainError):
    """AdS state violates nu^2 > 0 (Breitenlohner-Freedman-type bound)."""


class SingularNuError(DomainError):
    """AdS index nu too close to zero; the beta functions divide by nu."""


class GammaPoleError(DomainError):
    """Gamma function evaluated at or below a pole."""


class NumericalError(RGFlowError, ArithmeticError):
    """A numerical procedure failed (no convergence, step underflow, ...)."""


class NoSignChangeError(NumericalError):
    """Bisection bracket does not enclose a sign change."""


class ContinuationError(NumericalError):
    """A fixed point could not be tracked along a parameter path."""
