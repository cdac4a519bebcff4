"""Fixed points of the autonomous flow systems and the scalar parameter scans.

Stability convention: Jacobians and eigenvalues are those of the k d/dk
system.  A perturbation around a fixed point evolves as exp(e * log k) along
an eigenvector with eigenvalue e, so a point is approached as k -> infinity
exactly when every eigenvalue has negative real part.  Such a point is
labelled ``UVAttractive``; all real parts positive gives ``IRAttractive``,
mixed signs ``Saddle``, and any real part within ``marginal_tol`` of zero
``Marginal``.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .beta import beta, nu_tilde
from .errors import ConfigError, ContinuationError, DomainError, NoSignChangeError, NumericalError
from .models import (
    CONFORMAL_XI,
    BoundaryCondition,
    CouplingState,
    ModelSpec,
    Scheme,
    check_state,
    domain_margin,
)

NEWTON_TOL = 1e-10
DEDUP_TOL = 1e-6
MARGINAL_TOL = 1e-7
JACOBIAN_STEP = 1e-6


class Stability(str, enum.Enum):
    UV_ATTRACTIVE = "UVAttractive"
    IR_ATTRACTIVE = "IRAttractive"
    SADDLE = "Saddle"
    MARGINAL = "Marginal"


@dataclass(frozen=True)
class FixedPoint:
    state: CouplingState
    jacobian: np.ndarray
    eigenvalues: tuple[complex, complex]
    classification: Stability
    residual: float


@dataclass(frozen=True)
class FixedLine:
    """The AdS line lambda_tilde = 0, every point of which is fixed.

    ``m2_min`` is the lower end of the admissible range (open bound).
    """

    lambda_tilde: float
    m2_min: float
    degenerate: bool = True


@dataclass(frozen=True)
class SeedGrid:
    m2_range: tuple[float, float]
    lambda_range: tuple[float, float]
    n: int = 8

    def __post_init__(self):
        for name in ("m2_range", "lambda_range"):
            lo, hi = (float(v) for v in getattr(self, name))
            object.__setattr__(self, name, (lo, hi))
            if not (math.isfinite(lo) and math.isfinite(hi) and lo <= hi):
                raise ConfigError(name, f"need finite lo <= hi, got ({lo}, {hi})")
        if int(self.n) != self.n or self.n < 1:
            raise ConfigError("n", f"need an integer >= 1, got {self.n}")

    def states(self) -> list[CouplingState]:
        ms = np.linspace(*self.m2_range, self.n) if self.n > 1 else [0.5 * sum(self.m2_range)]
        ls = np.linspace(*self.lambda_range, self.n) if self.n > 1 else [0.5 * sum(self.lambda_range)]
        return [CouplingState(float(m), float(l)) for m in ms for l in ls]


@dataclass
class FixedPointReport:
    points: list[FixedPoint]
    lines: list[FixedLine]
    failed_seeds: list[CouplingState] = field(default_factory=list)


def _beta_vec(model: ModelSpec, x: np.ndarray) -> np.ndarray:
    b = beta(CouplingState(float(x[0]), float(x[1])), model)
    return np.array([b.dm2, b.dlambda])


def jacobian(model: ModelSpec, state: CouplingState, step: float = JACOBIAN_STEP) -> np.ndarray:
    """Central-difference Jacobian d(beta)/d(m2, lambda), step scaled by max(1, |x|)."""
    check_state(state, model)
    x0 = np.array(state.as_tuple(), dtype=float)
    jac = np.empty((2, 2))
    for j in range(2):
        h = step * max(1.0, abs(x0[j]))
        e = np.zeros(2)
        e[j] = h
        lo, hi = x0 - e, x0 + e
        for x in (lo, hi):
            if domain_margin(CouplingState(*x), model) <= 0.0:
                raise DomainError(f"Jacobian stencil leaves the domain at {tuple(x)}")
        jac[:, j] = (_beta_vec(model, hi) - _beta_vec(model, lo)) / (2.0 * h)
    return jac


def classify(eigenvalues: Sequence[complex], marginal_tol: float = MARGINAL_TOL) -> Stability:
    re = [complex(e).real for e in eigenvalues]
    if any(abs(r) < marginal_tol for r in re):
        return Stability.MARGINAL
    if all(r < 0.0 for r in re):
        return Stability.UV_ATTRACTIVE
    if all(r > 0.0 for r in re):
        return Stability.IR_ATTRACTIVE
    return Stability.SADDLE


def _residual(model: ModelSpec, x: np.ndarray) -> float:
    return float(np.max(np.abs(_beta_vec(model, x))))


def newton(
    model: ModelSpec,
    seed: CouplingState,
    tol: float = NEWTON_TOL,
    max_iter: int = 50,
) -> CouplingState:
    """Damped Newton iteration on beta = 0.

    Iterates until the residual is below ``tol`` and the last step is below
    1e-9 in scaled norm, so slowly converging (degenerate) roots are still
    pinned well inside the deduplication radius.  Raises NumericalError on
    failure and DomainError if the seed is inadmissible.
    """
    check_state(seed, model)
    x = np.array(seed.as_tuple(), dtype=float)
    f = _beta_vec(model, x)
    res = float(np.max(np.abs(f)))
    for _ in range(max_iter):
        if res == 0.0:
            return CouplingState(float(x[0]), float(x[1]))
        jac = jacobian(model, CouplingState(float(x[0]), float(x[1])))
        try:
            delta = -np.linalg.solve(jac, f)
        except np.linalg.LinAlgError:
            delta = -np.linalg.lstsq(jac, f, rcond=None)[0]
        if not np.all(np.isfinite(delta)):
            raise NumericalError(f"Newton step is not finite at {tuple(x)}")
        alpha = 1.0
        while True:
            trial = x + alpha * delta
            ok = domain_margin(CouplingState(float(trial[0]), float(trial[1])), model) > 0.0
            if ok:
                try:
                    f_trial = _beta_vec(model, trial)
                    res_trial = float(np.max(np.abs(f_trial)))
                    ok = math.isfinite(res_trial) and (res_trial < (1.0 - 1e-4 * alpha) * res or res_trial < tol)
                except DomainError:
                    ok = False
            if ok:
                break
            alpha *= 0.5
            if alpha < 1e-10:
                raise NumericalError(f"line search failed at {tuple(x)} (residual {res})")
        x, f, res = trial, f_trial, res_trial
        step = float(np.max(np.abs(alpha * delta) / np.maximum(1.0, np.abs(x))))
        if res < tol and step < 1e-9:
            return CouplingState(float(x[0]), float(x[1]))
    if res < tol:
        return CouplingState(float(x[0]), float(x[1]))
    raise NumericalError(f"Newton did not converge from {seed.as_tuple()} (residual {res})")


def analyze(model: ModelSpec, state: CouplingState, marginal_tol: float = MARGINAL_TOL) -> FixedPoint:
    jac = jacobian(model, state)
    eig = tuple(complex(e) for e in np.linalg.eigvals(jac))
    eig = tuple(sorted(eig, key=lambda e: (e.real, e.imag)))
    res = _residual(model, np.array(state.as_tuple()))
    return FixedPoint(state, jac, eig, classify(eig, marginal_tol), res)


def ads_fixed_line(model: ModelSpec) -> FixedLine:
    # nu^2 = m2 + 9/4 - 12 xi > 0
    return FixedLine(lambda_tilde=0.0, m2_min=12.0 * model.xi - 2.25)


def find_fixed_points(
    model: ModelSpec,
    seeds: SeedGrid | Iterable[CouplingState],
    newton_tol: float = NEWTON_TOL,
    max_iter: int = 50,
    workers: int = 1,
) -> FixedPointReport:
    """Newton from every seed, deduplicate, classify.

    On AdS the lambda_tilde = 0 line is reported as a ``FixedLine`` and roots
    on it are folded into that record instead of being listed as points.
    """
    if not model.is_autonomous:
        raise ConfigError("large_deflation", "fixed points need the autonomous (large-deflation) AdS system")
    seed_list = seeds.states() if isinstance(seeds, SeedGrid) else list(seeds)

    def run(seed):
        try:
            return newton(model, seed, newton_tol, max_iter)
        except (NumericalError, DomainError):
            return None

    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        roots = list(pool.map(run, seed_list))

    points: list[FixedPoint] = []
    failed = []
    for seed, root in zip(seed_list, roots):
        if root is None:
            failed.append(seed)
            continue
        if model.is_ads and abs(root.lambda_tilde) <= DEDUP_TOL:
            continue
        if any(math.dist(root.as_tuple(), p.state.as_tuple()) < DEDUP_TOL for p in points):
            continue
        try:
            points.append(analyze(model, root))
        except DomainError:
            failed.append(seed)
    points.sort(key=lambda p: p.state.as_tuple())
    lines = [ads_fixed_line(model)] if model.is_ads else []
    return FixedPointReport(points, lines, failed)


# ---------------------------------------------------------------------------
# Scans
# ---------------------------------------------------------------------------


def neumann_massless_factor(z_tilde: float, scheme: Scheme = Scheme.MINIMAL) -> float:
    """dlambda / lambda^2 at m2 = 0 for Neumann conditions (independent of lambda)."""
    model = ModelSpec.half_minkowski(BoundaryCondition.NEUMANN, scheme, z_tilde)
    return beta(CouplingState(0.0, 1.0), model).dlambda


def _bisect(fn, lo: float, hi: float, tol: float, what: str) -> float:
    f_lo, f_hi = fn(lo), fn(hi)
    if f_lo == 0.0:
        return lo
    if f_hi == 0.0:
        return hi
    if (f_lo > 0.0) == (f_hi > 0.0):
        raise NoSignChangeError(f"{what}: no sign change on [{lo}, {hi}] (values {f_lo}, {f_hi})")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        f_mid = fn(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0.0) == (f_lo > 0.0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def scan_neumann_sign_change(
    scheme: Scheme = Scheme.MINIMAL,
    bracket: tuple[float, float] = (0.5, 1.5),
    tol: float = 1e-6,
) -> float:
    """z_tilde where the massless Neumann beta_lambda changes sign."""
    lo, hi = bracket
    if not 0.0 < lo < hi:
        raise ConfigError("bracket", f"need 0 < lo < hi, got {bracket}")
    return _bisect(lambda z: neumann_massless_factor(z, Scheme(scheme)), lo, hi, tol, "Neumann sign scan")


class XiBranch:
    """Nontrivial AdS fixed point tracked in xi by natural-parameter continuation.

    Starts from the conformal point (found by Newton from ``seed``) and walks
    toward any requested xi in steps of ``step``, halving on failure.
    """

    def __init__(self, seed: CouplingState = CouplingState(0.2, 0.3), step: float = 0.005, min_step: float = 1e-7):
        self.step = step
        self.min_step = min_step
        start = newton(ModelSpec.ads(CONFORMAL_XI), seed)
        if start.lambda_tilde <= DEDUP_TOL:
            raise ContinuationError(f"seed {seed.as_tuple()} converged to the trivial line")
        self.known: dict[float, CouplingState] = {CONFORMAL_XI: start}

    def at(self, xi: float) -> CouplingState:
        if xi in self.known:
            return self.known[xi]
        cur = min(self.known, key=lambda k: abs(k - xi))
        state = self.known[cur]
        step = self.step
        while cur != xi:
            nxt = xi if abs(xi - cur) <= step else cur + math.copysign(step, xi - cur)
            try:
                trial = newton(ModelSpec.ads(nxt), state)
                nu_tilde(trial, ModelSpec.ads(nxt))
                if trial.lambda_tilde <= DEDUP_TOL:
                    raise NumericalError("fell onto the trivial line")
            except (NumericalError, DomainError):
                step *= 0.5
                if step < self.min_step:
                    raise ContinuationError(f"lost the fixed point between xi={cur} and xi={xi}")
                continue
            cur, state = nxt, trial
            self.known[cur] = state
        return state


def scan_critical_xi(
    bracket: tuple[float, float] = (0.05, 0.17),
    tol: float = 1e-5,
    step: float = 0.005,
    branch: Optional[XiBranch] = None,
) -> float:
    """xi at which the nontrivial AdS fixed point sits at m2_tilde* = -1/4."""
    lo, hi = bracket
    if not lo < hi:
        raise ConfigError("bracket", f"need lo < hi, got {bracket}")
    branch = branch or XiBranch(step=step)
    return _bisect(lambda xi: branch.at(xi).m2_tilde + 0.25, lo, hi, tol, "critical-xi scan")


__all__ = [
    "FixedLine",
    "FixedPoint",
    "FixedPointReport",
    "SeedGrid",
    "Stability",
    "XiBranch",
    "analyze",
    "classify",
    "find_fixed_points",
    "jacobian",
    "neumann_massless_factor",
    "newton",
    "scan_critical_xi",
    "scan_neumann_sign_change",
]
