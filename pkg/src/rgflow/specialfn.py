"""Double-precision special functions used by the kernels and beta functions.

Everything here is written from series, recurrences and asymptotic
expansions so that the module has no dependency beyond :mod:`math`:

* ``bessel_j``  -- integer order 0..3, ascending series / Miller downward
  recurrence / Hankel asymptotics depending on ``x``.
* ``bessel_k``  -- integer order 0..3, ascending series for ``x <= 2`` and
  Steed's continued fraction above, upward recurrence for orders 2 and 3.
* ``log_gamma``, ``gamma``, ``digamma``, ``polygamma1``, ``polygamma2`` --
  recurrence shift to ``x >= 10`` followed by the Stirling-type series.

Regime switchover points are pinned by golden tests in ``tests/test_specialfn.py``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DomainError, NumericalError

EULER_GAMMA = 0.57721566490153286060651209008240243

# B_2, B_4, ..., B_20
_BERNOULLI_EVEN = (
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
)

_SHIFT_TO = 10.0
_J_SERIES_MAX_X = 8.0
_J_ASYMPTOTIC_MIN_X = 25.0
_K_SERIES_MAX_X = 2.0
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class SpecialFnAccuracy:
    """Convergence controls for the series evaluations."""

    rel_tol: float = 1e-12
    max_terms: int = 500

    def __post_init__(self):
        if not (0.0 < self.rel_tol <= 1e-6):
            raise ValueError(f"rel_tol must lie in (0, 1e-6], got {self.rel_tol}")
        if self.max_terms < 50:
            raise ValueError(f"max_terms must be >= 50, got {self.max_terms}")

    @property
    def stop_tol(self) -> float:
        # series are summed well past the target so the target holds after rounding
        return max(self.rel_tol * 1e-4, _EPS / 4)


DEFAULT_ACCURACY = SpecialFnAccuracy()


def _check_real(x: float, name: str = "x") -> float:
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"{name} must be finite, got {x}")
    return x


# ---------------------------------------------------------------------------
# Bessel J
# ---------------------------------------------------------------------------


def _j_series(n: int, x: float, acc: SpecialFnAccuracy) -> float:
    q = -0.25 * x * x
    term = (0.5 * x) ** n / math.factorial(n)
    total = term
    for k in range(1, acc.max_terms):
        term *= q / (k * (k + n))
        total += term
        if abs(term) <= acc.stop_tol * abs(total):
            return total
    raise NumericalError(f"J_{n} series did not converge at x={x}")


def _j_miller(n: int, x: float) -> float:
    start = 2 * ((int(x) + 40) // 2)
    j_next, j_cur = 0.0, 1e-30
    norm = 0.0
    wanted = 0.0
    for k in range(start, 0, -1):
        j_prev = (2.0 * k / x) * j_cur - j_next
        j_next, j_cur = j_cur, j_prev
        # j_cur now holds the unnormalized J_{k-1}
        if (k - 1) == n:
            wanted = j_cur
        if (k - 1) % 2 == 0 and k - 1 > 0:
            norm += 2.0 * j_cur
        if abs(j_cur) > 1e250:
            j_cur *= 1e-250
            j_next *= 1e-250
            norm *= 1e-250
            wanted *= 1e-250
    norm += j_cur
    return wanted / norm


def _j_hankel(n: int, x: float, acc: SpecialFnAccuracy) -> float:
    mu = 4.0 * n * n
    p, q = 1.0, 0.0
    term = 1.0
    last = math.inf
    for k in range(1, acc.max_terms):
        term *= (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        if abs(term) > last:
            break
        last = abs(term)
        if k % 2 == 0:
            p += term if (k // 2) % 2 == 0 else -term
        else:
            q += term if ((k - 1) // 2) % 2 == 0 else -term
        if last < _EPS * 1e-2:
            break
    chi = x - (0.5 * n + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(chi) - q * math.sin(chi))


def bessel_j(order: int, x: float, acc: SpecialFnAccuracy = DEFAULT_ACCURACY) -> float:
    """Bessel function of the first kind ``J_order(x)`` for order 0..3 and x >= 0."""
    if order not in (0, 1, 2, 3):
        raise DomainError(f"bessel_j supports orders 0..3, got {order}")
    x = _check_real(x)
    if x < 0.0:
        raise DomainError(f"bessel_j requires x >= 0, got {x}")
    if x == 0.0:
        return 1.0 if order == 0 else 0.0
    if x <= _J_SERIES_MAX_X:
        return _j_series(order, x, acc)
    if x <= _J_ASYMPTOTIC_MIN_X:
        return _j_miller(order, x)
    return _j_hankel(order, x, acc)


# ---------------------------------------------------------------------------
# Bessel K
# ---------------------------------------------------------------------------


def _k01_series(x: float, acc: SpecialFnAccuracy) -> tuple[float, float]:
    q = 0.25 * x * x
    log_half = math.log(0.5 * x)
    # K0 = -(log(x/2) + gamma) I0 + sum H_k q^k / (k!)^2
    t0 = 1.0
    i0 = 1.0
    s0 = 0.0
    # K1 = 1/x + log(x/2) I1 - (x/4) sum [psi(k+1) + psi(k+2)] q^k / (k! (k+1)!)
    t1 = 1.0
    i1_sum = 1.0
    s1 = (-2.0 * EULER_GAMMA + 1.0) * t1
    harmonic = 0.0
    for k in range(1, acc.max_terms):
        harmonic += 1.0 / k
        t0 *= q / (k * k)
        t1 *= q / (k * (k + 1))
        i0 += t0
        i1_sum += t1
        d0 = harmonic * t0
        d1 = (2.0 * (harmonic - EULER_GAMMA) + 1.0 / (k + 1)) * t1
        s0 += d0
        s1 += d1
        if t0 <= acc.stop_tol * i0 and abs(d1) <= acc.stop_tol * abs(s1):
            break
    else:
        raise NumericalError(f"K0/K1 series did not converge at x={x}")
    k0 = -(log_half + EULER_GAMMA) * i0 + s0
    i1 = 0.5 * x * i1_sum
    k1 = 1.0 / x + log_half * i1 - 0.25 * x * s1
    return k0, k1


def _k01_steed(x: float, acc: SpecialFnAccuracy) -> tuple[float, float]:
    # Steed's algorithm for the second continued fraction (Temme), order 0
    b = 2.0 * (1.0 + x)
    d = 1.0 / b
    h = delh = d
    q1, q2 = 0.0, 1.0
    a1 = 0.25
    q = c = a1
    a = -a1
    s = 1.0 + q * delh
    for i in range(2, acc.max_terms + 2):
        a -= 2 * (i - 1)
        c = -a * c / i
        qnew = (q1 - b * q2) / a
        q1, q2 = q2, qnew
        q += c * qnew
        b += 2.0
        d = 1.0 / (b + a * d)
        delh = (b * d - 1.0) * delh
        h += delh
        dels = q * delh
        s += dels
        if abs(dels / s) < _EPS:
            break
    else:
        raise NumericalError(f"K continued fraction did not converge at x={x}")
    h *= a1
    k0 = math.sqrt(math.pi / (2.0 * x)) * math.exp(-x) / s
    k1 = k0 * (x + 0.5 - h) / x
    return k0, k1


def bessel_k(order: int, x: float, acc: SpecialFnAccuracy = DEFAULT_ACCURACY) -> float:
    """Modified Bessel function of the second kind ``K_order(x)``, order 0..3, x > 0."""
    if order not in (0, 1, 2, 3):
        raise DomainError(f"bessel_k supports orders 0..3, got {order}")
    x = _check_real(x)
    if x <= 0.0:
        raise DomainError(f"bessel_k requires x > 0, got {x}")
    if x <= _K_SERIES_MAX_X:
        k0, k1 = _k01_series(x, acc)
    else:
        k0, k1 = _k01_steed(x, acc)
    if order == 0:
        return k0
    if order == 1:
        return k1
    k2 = k0 + (2.0 / x) * k1
    if order == 2:
        return k2
    return k1 + (4.0 / x) * k2


# ---------------------------------------------------------------------------
# Gamma family
# ---------------------------------------------------------------------------


def _check_positive(x: float, name: str) -> float:
    x = _check_real(x)
    if x <= 0.0:
        raise DomainError(f"{name} requires x > 0, got {x}")
    return x


def log_gamma(x: float) -> float:
    """Natural log of the gamma function for x > 0."""
    x = _check_positive(x, "log_gamma")
    shift = 0.0
    if x < _SHIFT_TO:
        prod = 1.0
        while x < _SHIFT_TO:
            prod *= x
            x += 1.0
        shift = math.log(prod)
    inv = 1.0 / x
    inv2 = inv * inv
    series = 0.0
    power = inv
    for k, b in enumerate(_BERNOULLI_EVEN, start=1):
        series += b / (2 * k * (2 * k - 1)) * power
        power *= inv2
    return (x - 0.5) * math.log(x) - x + 0.5 * math.log(2.0 * math.pi) + series - shift


def gamma(x: float) -> float:
    """Gamma function for x > 0, routed through :func:`log_gamma`."""
    return math.exp(log_gamma(x))


def digamma(x: float) -> float:
    """psi(x) = d/dx log Gamma(x) for x > 0."""
    x = _check_positive(x, "digamma")
    acc = 0.0
    while x < _SHIFT_TO:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    power = inv2
    series = 0.0
    for k, b in enumerate(_BERNOULLI_EVEN, start=1):
        series += b / (2 * k) * power
        power *= inv2
    return acc + math.log(x) - 0.5 / x - series


def polygamma1(x: float) -> float:
    """Trigamma psi'(x) for x > 0."""
    x = _check_positive(x, "polygamma1")
    acc = 0.0
    while x < _SHIFT_TO:
        acc += 1.0 / (x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    power = inv2 * inv
    series = 0.0
    for b in _BERNOULLI_EVEN:
        series += b * power
        power *= inv2
    return acc + inv + 0.5 * inv2 + series


def polygamma2(x: float) -> float:
    """Tetragamma psi''(x) for x > 0."""
    x = _check_positive(x, "polygamma2")
    acc = 0.0
    while x < _SHIFT_TO:
        acc -= 2.0 / (x * x * x)
        x += 1.0
    inv = 1.0 / x
    inv2 = inv * inv
    power = inv2 * inv2
    series = 0.0
    for k, b in enumerate(_BERNOULLI_EVEN, start=1):
        series += (2 * k + 1) * b * power
        power *= inv2
    return acc - inv2 - inv2 * inv - series
