"""Theory-space points and flow-family descriptors."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace
from typing import Optional

from .errors import BFBoundError, ConfigError, DomainError

CONFORMAL_XI = 1.0 / 6.0


class Geometry(str, enum.Enum):
    BULK_MINKOWSKI = "bulk_minkowski"
    HALF_MINKOWSKI = "half_minkowski"
    POINCARE_ADS = "poincare_ads"


class BoundaryCondition(str, enum.Enum):
    DIRICHLET = "dirichlet"
    NEUMANN = "neumann"


class Scheme(str, enum.Enum):
    FULL = "full"
    MINIMAL = "minimal"


@dataclass(frozen=True)
class CouplingState:
    """Point (m2_tilde, lambda_tilde) in dimensionless theory space."""

    m2_tilde: float
    lambda_tilde: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.m2_tilde, self.lambda_tilde)


@dataclass(frozen=True)
class BetaValue:
    """(k d/dk m2_tilde, k d/dk lambda_tilde) at a state."""

    dm2: float
    dlambda: float

    def as_tuple(self) -> tuple[float, float]:
        return (self.dm2, self.dlambda)

    def max_abs(self) -> float:
        return max(abs(self.dm2), abs(self.dlambda))


@dataclass(frozen=True)
class ModelSpec:
    """Which flow system to evaluate.

    Use the ``bulk``, ``half_minkowski`` and ``ads`` constructors; only the
    fields that belong to the chosen geometry may be set.
    """

    geometry: Geometry
    boundary_condition: Optional[BoundaryCondition] = None
    scheme: Optional[Scheme] = None
    z_tilde: Optional[float] = None
    xi: Optional[float] = None
    large_deflation: Optional[bool] = None
    kl: Optional[float] = None

    def __post_init__(self):
        geometry = Geometry(self.geometry)
        object.__setattr__(self, "geometry", geometry)
        if self.boundary_condition is not None:
            object.__setattr__(self, "boundary_condition", BoundaryCondition(self.boundary_condition))
        if self.scheme is not None:
            object.__setattr__(self, "scheme", Scheme(self.scheme))

        if geometry is Geometry.BULK_MINKOWSKI:
            for name in ("boundary_condition", "scheme", "z_tilde", "xi", "large_deflation", "kl"):
                if getattr(self, name) is not None:
                    raise ConfigError(name, "not applicable to bulk Minkowski")
        elif geometry is Geometry.HALF_MINKOWSKI:
            for name in ("xi", "large_deflation", "kl"):
                if getattr(self, name) is not None:
                    raise ConfigError(name, "not applicable to half-Minkowski")
            for name in ("boundary_condition", "scheme", "z_tilde"):
                if getattr(self, name) is None:
                    raise ConfigError(name, "required for half-Minkowski")
            z = float(self.z_tilde)
            object.__setattr__(self, "z_tilde", z)
            if not math.isfinite(z) or z < 0.0:
                raise ConfigError("z_tilde", f"must be finite and >= 0, got {z}")
            if self.scheme is Scheme.MINIMAL and z == 0.0:
                raise ConfigError("z_tilde", "minimal subtraction requires z_tilde > 0")
        else:
            if self.z_tilde is not None:
                raise ConfigError("z_tilde", "not applicable to AdS")
            if self.boundary_condition is BoundaryCondition.NEUMANN:
                raise ConfigError(
                    "boundary_condition",
                    "Neumann conditions on AdS need nu in [0, 1), which the flow does not preserve",
                )
            if self.xi is None:
                raise ConfigError("xi", "required for AdS")
            object.__setattr__(self, "xi", float(self.xi))
            if not math.isfinite(self.xi):
                raise ConfigError("xi", "must be finite")
            if self.large_deflation is None:
                object.__setattr__(self, "large_deflation", True)
            if not self.large_deflation:
                if self.kl is None:
                    raise ConfigError("kl", "required when large_deflation is false")
                if not math.isfinite(self.kl) or self.kl < 0.0:
                    raise ConfigError("kl", f"must be finite and >= 0, got {self.kl}")
            elif self.kl is not None:
                raise ConfigError("kl", "only used when large_deflation is false")

    # -- constructors -----------------------------------------------------

    @classmethod
    def bulk(cls) -> "ModelSpec":
        return cls(Geometry.BULK_MINKOWSKI)

    @classmethod
    def half_minkowski(cls, boundary_condition, scheme, z_tilde: float) -> "ModelSpec":
        return cls(
            Geometry.HALF_MINKOWSKI,
            boundary_condition=BoundaryCondition(boundary_condition),
            scheme=Scheme(scheme),
            z_tilde=z_tilde,
        )

    @classmethod
    def ads(cls, xi: float = CONFORMAL_XI, large_deflation: bool = True, kl: Optional[float] = None) -> "ModelSpec":
        return cls(Geometry.POINCARE_ADS, xi=xi, large_deflation=large_deflation, kl=kl)

    def with_(self, **changes) -> "ModelSpec":
        return replace(self, **changes)

    @property
    def is_ads(self) -> bool:
        return self.geometry is Geometry.POINCARE_ADS

    @property
    def is_autonomous(self) -> bool:
        return not self.is_ads or bool(self.large_deflation)

    def to_dict(self) -> dict:
        out = {"geometry": self.geometry.value}
        for name in ("boundary_condition", "scheme"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value.value
        for name in ("z_tilde", "xi", "large_deflation", "kl"):
            value = getattr(self, name)
            if value is not None:
                out[name] = value
        return out


def nu_tilde_squared(state: CouplingState, model: ModelSpec) -> float:
    """Squared AdS index, 1/4 + m2 - 12 (xi - 1/6) [+ (k l)**2 without large deflation]."""
    # 1/4 - 12 (xi - 1/6) written as 9/4 - 12 xi, exact at xi = 3/16
    value = state.m2_tilde + (2.25 - 12.0 * model.xi)
    if not model.large_deflation:
        value += model.kl * model.kl
    return value


def domain_margin(state: CouplingState, model: ModelSpec) -> float:
    """Signed distance-like quantity that is positive inside the model domain.

    Minkowski family: 1 + m2_tilde.  AdS: nu_tilde**2.
    """
    if model.is_ads:
        return nu_tilde_squared(state, model)
    return 1.0 + state.m2_tilde


def check_state(state: CouplingState, model: ModelSpec) -> None:
    m2, lam = state.m2_tilde, state.lambda_tilde
    if not (math.isfinite(m2) and math.isfinite(lam)):
        raise DomainError(f"non-finite state ({m2}, {lam})")
    if model.is_ads:
        nu2 = nu_tilde_squared(state, model)
        if nu2 <= 0.0:
            raise BFBoundError(f"nu_tilde^2 = {nu2} <= 0 at m2_tilde = {m2}")
    elif m2 <= -1.0:
        raise DomainError(f"m2_tilde must exceed -1, got {m2}")
