"""Perturbative LPA renormalization-group flows for a quartic scalar near timelike boundaries."""

from .beta import beta, beta_ads, beta_bulk, beta_half_minkowski
from .errors import ConfigError, DomainError, NumericalError, RGFlowError
from .models import BetaValue, BoundaryCondition, CouplingState, Geometry, ModelSpec, Scheme

__version__ = "0.1.0"

__all__ = [
    "BetaValue",
    "BoundaryCondition",
    "ConfigError",
    "CouplingState",
    "DomainError",
    "Geometry",
    "ModelSpec",
    "NumericalError",
    "RGFlowError",
    "Scheme",
    "beta",
    "beta_ads",
    "beta_bulk",
    "beta_half_minkowski",
]
