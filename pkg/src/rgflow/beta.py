"""Right-hand sides of the flow systems, plus the dimensionful potential flows.

All closed forms follow from the LPA potential flow

    d_k U_k(phi) = F(M^2(phi)),   M^2 = m^2 + lambda phi^2 / 2 + k^2 (+ curvature)

by the prescription beta_{m^2} = d^2 F / d phi^2 |_0 = lambda F'(M^2) and
beta_lambda = d^4 F / d phi^4 |_0 = 3 lambda^2 F''(M^2).  The
``potential_flow_*`` functions return F itself so the tests can differentiate
it numerically and compare with the closed forms.

Sign conventions in the half-Minkowski systems: ``s = -1`` for Dirichlet and
``s = +1`` for Neumann, so the potential carries the factor (1 + s K).
"""

from __future__ import annotations

import enum
import math
from typing import Optional

from .errors import BFBoundError, DomainError, GammaPoleError, SingularNuError
from .kernels import kernel_triple, one_plus_kernel
from .models import (
    CONFORMAL_XI,
    BetaValue,
    BoundaryCondition,
    CouplingState,
    Geometry,
    ModelSpec,
    Scheme,
    check_state,
    nu_tilde_squared,
)
from .specialfn import EULER_GAMMA, digamma, log_gamma, polygamma1, polygamma2

LOOP = 1.0 / (16.0 * math.pi**2)
NU_MIN = 1e-8


def _bc_sign(bc: BoundaryCondition) -> float:
    return -1.0 if BoundaryCondition(bc) is BoundaryCondition.DIRICHLET else 1.0


# ---------------------------------------------------------------------------
# Dimensionless beta functions
# ---------------------------------------------------------------------------


def beta_bulk(s: CouplingState) -> BetaValue:
    m2, lam = s.m2_tilde, s.lambda_tilde
    if not m2 > -1.0:
        raise DomainError(f"m2_tilde must exceed -1, got {m2}")
    u = 1.0 + m2
    return BetaValue(
        dm2=-2.0 * m2 + lam * LOOP * (math.log(u) + 1.0),
        dlambda=3.0 * lam * lam * LOOP / u,
    )


def beta_half_minkowski(s: CouplingState, spec: ModelSpec) -> BetaValue:
    """Half-Minkowski system at fixed z_tilde with mu = k.

    With (K, K2, K4) the kernel triple of the chosen scheme, u = 1 + m2 and
    L = log u::

        dm2     = -2 m2 + lam/(16 pi^2) [ (1 + sK)(L + 1) - s u L K2 ]
        dlambda = lam^2/(16 pi^2) [ 3 (1 + sK)/u - 6 s (L + 1) K2 - s u L K4 ]
    """
    if spec.geometry is not Geometry.HALF_MINKOWSKI:
        raise DomainError(f"beta_half_minkowski needs a half-Minkowski model, got {spec.geometry.value}")
    m2, lam = s.m2_tilde, s.lambda_tilde
    if not m2 > -1.0:
        raise DomainError(f"m2_tilde must exceed -1, got {m2}")
    u = 1.0 + m2
    log_u = math.log(u)
    minimal = spec.scheme is Scheme.MINIMAL
    sign = _bc_sign(spec.boundary_condition)
    _, k2, k4 = kernel_triple(spec.z_tilde, math.sqrt(u), minimal)
    factor = one_plus_kernel(spec.z_tilde, math.sqrt(u), sign, minimal)
    dm2 = -2.0 * m2 + lam * LOOP * (factor * (log_u + 1.0) - sign * u * log_u * k2)
    dlambda = lam * lam * LOOP * (
        3.0 * factor / u - 6.0 * sign * (log_u + 1.0) * k2 - sign * u * log_u * k4
    )
    return BetaValue(dm2, dlambda)


def nu_tilde(s: CouplingState, spec: ModelSpec) -> float:
    nu2 = nu_tilde_squared(s, spec)
    if abs(nu2) < NU_MIN * NU_MIN:
        raise SingularNuError(f"nu_tilde^2 = {nu2} is zero to working precision (xi = {spec.xi}, m2_tilde = {s.m2_tilde})")
    if nu2 < 0.0:
        raise BFBoundError(f"nu_tilde^2 = {nu2} <= 0 at m2_tilde = {s.m2_tilde}, xi = {spec.xi}")
    nu = math.sqrt(nu2)
    if nu < NU_MIN:
        raise SingularNuError(f"nu_tilde = {nu} too close to zero (xi = {spec.xi}, m2_tilde = {s.m2_tilde})")
    return nu


def beta_ads(s: CouplingState, spec: ModelSpec) -> BetaValue:
    """Poincare AdS4 system, Dirichlet boundary, mu = 1/(2l).

    With nu the AdS index, S = 2 gamma - 1 + psi(nu + 1/2) + psi(nu + 3/2),
    T = psi'(nu + 1/2) + psi'(nu + 3/2) and T2 the same with psi''::

        dm2     = lam/(4 nu) [1 - 2 nu S - (nu^2 - 1/4) T]
        dlambda = 2 lam + 3 lam^2/(16 nu^3) [-2 - (6 nu^2 + 1/2) T - 2 nu (nu^2 - 1/4) T2]

    Only digamma arguments >= 1/2 appear, so the system is regular across
    nu = 1/2 and everywhere inside the bound nu^2 > 0.
    """
    if not spec.is_ads:
        raise DomainError(f"beta_ads needs an AdS model, got {spec.geometry.value}")
    lam = s.lambda_tilde
    nu = nu_tilde(s, spec)
    a, b = nu + 0.5, nu + 1.5
    shifted = nu * nu - 0.25
    big_s = 2.0 * EULER_GAMMA - 1.0 + digamma(a) + digamma(b)
    big_t = polygamma1(a) + polygamma1(b)
    big_t2 = polygamma2(a) + polygamma2(b)
    dm2 = lam / (4.0 * nu) * (1.0 - 2.0 * nu * big_s - shifted * big_t)
    bracket = -2.0 - (6.0 * nu * nu + 0.5) * big_t - 2.0 * nu * shifted * big_t2
    dlambda = 2.0 * lam + 3.0 * lam * lam / (16.0 * nu**3) * bracket
    return BetaValue(dm2, dlambda)


def beta(s: CouplingState, spec: ModelSpec) -> BetaValue:
    """Dispatch on ``spec.geometry``."""
    if spec.geometry is Geometry.BULK_MINKOWSKI:
        return beta_bulk(s)
    if spec.geometry is Geometry.HALF_MINKOWSKI:
        return beta_half_minkowski(s, spec)
    return beta_ads(s, spec)


def beta_half_minkowski_dimensionful(
    m2: float,
    lam: float,
    k: float,
    z: float,
    mu: float,
    boundary_condition: BoundaryCondition,
    scheme: Scheme,
) -> tuple[float, float]:
    """(d_k m^2, d_k lambda) in dimensionful variables with free scale ``mu``."""
    if k <= 0.0 or mu <= 0.0:
        raise DomainError("k and mu must be positive")
    u = k * k + m2
    if u <= 0.0:
        raise DomainError(f"k^2 + m^2 must be positive, got {u}")
    log_u = math.log(u / (mu * mu))
    minimal = Scheme(scheme) is Scheme.MINIMAL
    sign = _bc_sign(boundary_condition)
    _, k2, k4 = kernel_triple(z, math.sqrt(u), minimal)
    factor = one_plus_kernel(z, math.sqrt(u), sign, minimal)
    dm2 = k * lam * LOOP * (factor * (log_u + 1.0) - sign * u * log_u * k2)
    dlam = k * lam * lam * LOOP * (
        3.0 * factor / u - 6.0 * sign * (log_u + 1.0) * k2 - sign * u * log_u * k4
    )
    return dm2, dlam


# ---------------------------------------------------------------------------
# Dimensionful potential flows (differentiation oracles)
# ---------------------------------------------------------------------------


def potential_flow_bulk(phi: float, m2: float, lam: float, k: float, mu: float) -> float:
    big_m2 = m2 + 0.5 * lam * phi * phi + k * k
    if big_m2 <= 0.0:
        raise DomainError(f"M^2 must be positive, got {big_m2}")
    return k * LOOP * big_m2 * math.log(big_m2 / (mu * mu))


def potential_flow_half_minkowski(
    phi: float,
    m2: float,
    lam: float,
    k: float,
    z: float,
    scheme: Scheme,
    boundary_condition: BoundaryCondition,
    mu: float,
) -> float:
    """d_k U_k(phi) = k/(16 pi^2) M^2 log(M^2/mu^2) (1 -/+ kernel(z, M))."""
    big_m2 = m2 + 0.5 * lam * phi * phi + k * k
    if big_m2 <= 0.0:
        raise DomainError(f"M^2 must be positive, got {big_m2}")
    factor = one_plus_kernel(z, math.sqrt(big_m2), _bc_sign(boundary_condition), Scheme(scheme) is Scheme.MINIMAL)
    return k * LOOP * big_m2 * math.log(big_m2 / (mu * mu)) * factor


def potential_flow_ads(
    phi: float,
    m2: float,
    lam: float,
    k: float,
    xi: float,
    l: float,
    mu: Optional[float] = None,
    include_k2: bool = True,
) -> float:
    """d_k U_k(phi) on Poincare AdS4 with Dirichlet boundary conditions.

    ``mu`` defaults to 1/(2l), which removes the logarithm.  ``include_k2=False``
    drops k^2 from the effective mass inside nu (large deflation).
    """
    if l <= 0.0 or k <= 0.0:
        raise DomainError("k and l must be positive")
    if mu is None:
        mu = 0.5 / l
    curvature = -12.0 / (l * l)
    mbar2 = m2 + 0.5 * lam * phi * phi + (k * k if include_k2 else 0.0) + (xi - CONFORMAL_XI) * curvature
    nu2 = 0.25 + l * l * mbar2
    if nu2 <= 0.0:
        raise BFBoundError(f"nu_k^2 = {nu2} <= 0")
    nu = math.sqrt(nu2)
    if nu <= 0.5:
        raise GammaPoleError(f"Gamma(nu_k - 1/2) needs nu_k > 1/2, got {nu}")
    log_g_low = log_gamma(nu - 0.5)
    ratio = math.exp(log_gamma(nu + 1.5) - log_g_low)
    big_s = -1.0 + 2.0 * EULER_GAMMA + digamma(nu + 0.5) + digamma(nu + 1.5)
    bracket = (1.0 + 2.0 * nu) + 2.0 * math.log(2.0 * l * mu) * math.exp(-log_g_low) - 2.0 * ratio * big_s
    return k / (4.0 * l * l) * bracket


# ---------------------------------------------------------------------------
# Rescaling and dimension counting
# ---------------------------------------------------------------------------


def nondimensionalize(m2: float, lam: float, k: float, geometry: Geometry, l: Optional[float] = None) -> CouplingState:
    """Minkowski family: (m^2/k^2, lambda).  AdS: (l^2 m^2, k^2 l^2 lambda)."""
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")
    if Geometry(geometry) is Geometry.POINCARE_ADS:
        if l is None or not l > 0.0:
            raise DomainError(f"AdS rescaling needs l > 0, got {l}")
        return CouplingState(l * l * m2, k * k * l * l * lam)
    return CouplingState(m2 / (k * k), lam)


def redimensionalize(s: CouplingState, k: float, geometry: Geometry, l: Optional[float] = None) -> tuple[float, float]:
    """Inverse of :func:`nondimensionalize`; returns (m^2, lambda)."""
    if not k > 0.0:
        raise DomainError(f"k must be positive, got {k}")
    if Geometry(geometry) is Geometry.POINCARE_ADS:
        if l is None or not l > 0.0:
            raise DomainError(f"AdS rescaling needs l > 0, got {l}")
        return s.m2_tilde / (l * l), s.lambda_tilde / (k * k * l * l)
    return s.m2_tilde * k * k, s.lambda_tilde


class CouplingClass(str, enum.Enum):
    RELEVANT = "relevant"
    MARGINAL = "marginal"
    IRRELEVANT = "irrelevant"


def scaling_dimension(n: int, d: int) -> int:
    """Mass dimension d(1 - n) + 1 + n of the coupling of phi^(2n) in d+1 dimensions."""
    return d * (1 - n) + 1 + n


def classify_coupling(n: int, d: int) -> CouplingClass:
    if n < 1 or d < 1:
        raise DomainError(f"need n >= 1 and d >= 1, got n={n}, d={d}")
    dim = scaling_dimension(n, d)
    if dim > 0:
        return CouplingClass.RELEVANT
    if dim == 0:
        return CouplingClass.MARGINAL
    return CouplingClass.IRRELEVANT


__all__ = [
    "LOOP",
    "beta",
    "beta_ads",
    "beta_bulk",
    "beta_half_minkowski",
    "beta_half_minkowski_dimensionful",
    "check_state",
    "classify_coupling",
    "CouplingClass",
    "nondimensionalize",
    "nu_tilde",
    "potential_flow_ads",
    "potential_flow_bulk",
    "potential_flow_half_minkowski",
    "redimensionalize",
    "scaling_dimension",
]
