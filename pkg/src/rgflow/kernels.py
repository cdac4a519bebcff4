"""Boundary-contribution kernels in dimensionless variables.

Full Hadamard subtraction (image-reflected parametrix removed as well)::

    B(z, M)  = 2 J1(x) / x                     x = sqrt(2) M z
    B2(z, M) = J2(x) / M**2                    (= -dB/dM**2)
    B4(z, M) = -3 z J3(x) / (sqrt(2) M**3)     (= 3 dB2/dM**2)

These are the real forms of the modified-Bessel expressions with imaginary
argument, using I_n(i x) = i**n J_n(x).

Minimal subtraction (only the direct parametrix removed)::

    C(z, M)  = 2 K1(y) / (M z)                 y = 2 M z
    C2(z, M) = 2 K2(y) / M**2                  (= -dC/dM**2)
    C4(z, M) = -6 z K3(y) / M**3               (= 3 dC2/dM**2)

``z`` is the dimensionless distance k*z from the boundary and ``M`` the
dimensionless effective mass sqrt(1 + m2_tilde).  The C family diverges at
z = 0 and is guarded by ``Z_MIN``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import BoundaryDivergenceError, DomainError
from .specialfn import bessel_j, bessel_k

Z_MIN = 1e-10
_SQRT2 = math.sqrt(2.0)

FULL_KERNELS = ("b", "b2", "b4")
MINIMAL_KERNELS = ("c", "c2", "c4")


@dataclass(frozen=True)
class KernelPoint:
    z_tilde: float
    m_eff: float

    def __post_init__(self):
        _check(self.z_tilde, self.m_eff)


def _check(z: float, m_eff: float) -> None:
    if not (math.isfinite(z) and math.isfinite(m_eff)):
        raise DomainError(f"kernel arguments must be finite, got z={z}, M={m_eff}")
    if z < 0.0:
        raise DomainError(f"z_tilde must be >= 0, got {z}")
    if m_eff <= 0.0:
        raise DomainError(f"effective mass must be > 0, got {m_eff}")


def _guard(z: float, m_eff: float, z_min: float) -> None:
    _check(z, m_eff)
    if z <= z_min:
        raise BoundaryDivergenceError(
            f"minimal-subtraction kernel diverges at the boundary: z_tilde={z} <= {z_min}"
        )


def _two_j1_over_x(x: float) -> float:
    if x < 1e-3:
        q = 0.25 * x * x
        return 1.0 - 0.5 * q + q * q / 12.0
    return 2.0 * bessel_j(1, x) / x


def b_kernel(z: float, m_eff: float) -> float:
    _check(z, m_eff)
    return _two_j1_over_x(_SQRT2 * m_eff * z)


def b_kernel_complement(z: float, m_eff: float) -> float:
    """1 - B(z, M), summed directly for small arguments to avoid cancellation."""
    _check(z, m_eff)
    x = _SQRT2 * m_eff * z
    if x >= 2.0:
        return 1.0 - _two_j1_over_x(x)
    # 2 J1(x)/x = sum_k (-q)^k / (k! (k+1)!), so 1 - B is the tail from k = 1
    q = 0.25 * x * x
    term = 1.0
    total = 0.0
    for k in range(1, 40):
        term *= -q / (k * (k + 1))
        total -= term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def b2_kernel(z: float, m_eff: float) -> float:
    _check(z, m_eff)
    return bessel_j(2, _SQRT2 * m_eff * z) / (m_eff * m_eff)


def b4_kernel(z: float, m_eff: float) -> float:
    _check(z, m_eff)
    return -3.0 * z * bessel_j(3, _SQRT2 * m_eff * z) / (_SQRT2 * m_eff**3)


def c_kernel(z: float, m_eff: float, z_min: float = Z_MIN) -> float:
    _guard(z, m_eff, z_min)
    return 2.0 * bessel_k(1, 2.0 * m_eff * z) / (m_eff * z)


def c2_kernel(z: float, m_eff: float, z_min: float = Z_MIN) -> float:
    _guard(z, m_eff, z_min)
    return 2.0 * bessel_k(2, 2.0 * m_eff * z) / (m_eff * m_eff)


def c4_kernel(z: float, m_eff: float, z_min: float = Z_MIN) -> float:
    _guard(z, m_eff, z_min)
    return -6.0 * z * bessel_k(3, 2.0 * m_eff * z) / m_eff**3


KERNELS = {
    "b": b_kernel,
    "b2": b2_kernel,
    "b4": b4_kernel,
    "c": c_kernel,
    "c2": c2_kernel,
    "c4": c4_kernel,
}


def one_plus_kernel(z: float, m_eff: float, sign: float, minimal: bool) -> float:
    """1 + sign * K(z, M) for the boundary-condition sign (-1 Dirichlet, +1 Neumann)."""
    if minimal:
        return 1.0 + sign * c_kernel(z, m_eff)
    if sign < 0.0:
        return b_kernel_complement(z, m_eff)
    return 1.0 + b_kernel(z, m_eff)


def kernel_triple(z: float, m_eff: float, minimal: bool) -> tuple[float, float, float]:
    """(K, K2, K4) for the chosen subtraction scheme, evaluated at (z, M)."""
    if minimal:
        return c_kernel(z, m_eff), c2_kernel(z, m_eff), c4_kernel(z, m_eff)
    return b_kernel(z, m_eff), b2_kernel(z, m_eff), b4_kernel(z, m_eff)


def evaluate(point: KernelPoint, names=None) -> dict[str, float]:
    """Evaluate the named kernels (default: all that are defined at ``point``)."""
    if names is None:
        names = FULL_KERNELS + (MINIMAL_KERNELS if point.z_tilde > Z_MIN else ())
    out = {}
    for name in names:
        try:
            fn = KERNELS[name]
        except KeyError:
            raise DomainError(f"unknown kernel {name!r}; expected one of {sorted(KERNELS)}")
        out[name] = fn(point.z_tilde, point.m_eff)
    return out
