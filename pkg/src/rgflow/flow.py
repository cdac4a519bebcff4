"""RG trajectories in renormalization time and flow-field sampling.

Renormalization time is t = log(Lambda / k), so along any trajectory

    dS/dt = -k dS/dk = -beta(S).

IR flow runs t upward from 0, UV flow runs it downward; both use the same
right-hand side.  The integrator is the Dormand-Prince 5(4) pair with its
native fourth-order continuous extension, which is also used to resample
trajectories and to localize domain exits by bisection.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, NamedTuple, Optional

import numpy as np

from .beta import beta
from .errors import ConfigError, DomainError, NumericalError
from .models import CouplingState, ModelSpec, check_state, domain_margin

K_END_FLOOR = 1e-8
DOMAIN_EPS = 1e-6
DIVERGENCE_CAP = 1e8
LOCATE_TOL = 1e-10


class Direction(str, enum.Enum):
    IR = "ir"
    UV = "uv"


class Termination(str, enum.Enum):
    REACHED_TARGET = "ReachedTarget"
    DIVERGED_COUPLING = "DivergedCoupling"
    LEFT_DOMAIN = "LeftDomain"
    STEP_LIMIT = "StepLimit"


@dataclass(frozen=True)
class FlowProblem:
    """One RG integration.

    ``k_end = 0`` (IR only) is replaced by ``K_END_FLOOR * k_start``.  For AdS
    without large deflation, ``model.kl`` is the value of k*l at ``k_start``
    and is rescaled along the flow.  ``step`` switches off error control and
    uses that fixed step in |t|; it exists for convergence-order studies.
    """

    model: ModelSpec
    initial: CouplingState
    k_start: float = 1.0
    k_end: float = 0.0
    direction: Direction = Direction.IR
    atol: float = 1e-10
    rtol: float = 1e-8
    max_steps: int = 100_000
    step: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, "direction", Direction(self.direction))
        if not (math.isfinite(self.k_start) and self.k_start > 0.0):
            raise ConfigError("k_start", f"must be finite and > 0, got {self.k_start}")
        if not (math.isfinite(self.k_end) and self.k_end >= 0.0):
            raise ConfigError("k_end", f"must be finite and >= 0, got {self.k_end}")
        if self.direction is Direction.IR and not self.k_end < self.k_start:
            raise ConfigError("k_end", "IR flow needs k_end < k_start")
        if self.direction is Direction.UV and not self.k_end > self.k_start:
            raise ConfigError("k_end", "UV flow needs k_end > k_start")
        if not (self.atol > 0.0 and self.rtol > 0.0):
            raise ConfigError("atol", "tolerances must be positive")
        if self.max_steps < 1:
            raise ConfigError("max_steps", f"must be >= 1, got {self.max_steps}")
        if self.step is not None and not self.step > 0.0:
            raise ConfigError("step", f"must be > 0, got {self.step}")

    @classmethod
    def over_span(cls, model: ModelSpec, initial: CouplingState, t_span: float, direction=Direction.IR, k_start=1.0, **kw):
        """Problem covering |t| = ``t_span`` in the given direction."""
        if not t_span > 0.0:
            raise ConfigError("t_span", f"must be > 0, got {t_span}")
        sign = 1.0 if Direction(direction) is Direction.IR else -1.0
        return cls(model, initial, k_start, k_start * math.exp(-sign * t_span), direction, **kw)

    @property
    def effective_k_end(self) -> float:
        return max(self.k_end, K_END_FLOOR * self.k_start)

    @property
    def t_end(self) -> float:
        return math.log(self.k_start / self.effective_k_end)


class FlowSample(NamedTuple):
    t: float
    k: float
    state: CouplingState


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B = _A[6]
_E = (71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40)
_D = (
    -12715105075 / 11282082432,
    0.0,
    87487479700 / 32700410799,
    -10690763975 / 1880347072,
    701980252875 / 199316789632,
    -1453857185 / 822651844,
    69997945 / 29380423,
)


@dataclass(frozen=True)
class _Segment:
    t0: float
    h: float
    coeffs: tuple

    def __call__(self, t: float) -> np.ndarray:
        th = (t - self.t0) / self.h
        r1, r2, r3, r4, r5 = self.coeffs
        return r1 + th * (r2 + (1.0 - th) * (r3 + th * (r4 + (1.0 - th) * r5)))


@dataclass
class Trajectory:
    """Accepted integrator steps of one flow, plus the termination reason."""

    t: np.ndarray
    m2_tilde: np.ndarray
    lambda_tilde: np.ndarray
    termination: Termination
    k_start: float
    direction: Direction
    _segments: list = field(default_factory=list, repr=False)

    @property
    def k(self) -> np.ndarray:
        return self.k_start * np.exp(-self.t)

    @property
    def samples(self) -> list[FlowSample]:
        return [
            FlowSample(float(t), float(k), CouplingState(float(m), float(l)))
            for t, k, m, l in zip(self.t, self.k, self.m2_tilde, self.lambda_tilde)
        ]

    @property
    def final(self) -> CouplingState:
        return CouplingState(float(self.m2_tilde[-1]), float(self.lambda_tilde[-1]))

    def state_at(self, t: float) -> CouplingState:
        """Dense-output state at any t inside the covered span."""
        lo, hi = sorted((self.t[0], self.t[-1]))
        if not lo <= t <= hi:
            raise DomainError(f"t={t} outside the trajectory span [{lo}, {hi}]")
        if not self._segments:
            return CouplingState(float(self.m2_tilde[0]), float(self.lambda_tilde[0]))
        for seg in self._segments:
            if min(seg.t0, seg.t0 + seg.h) <= t <= max(seg.t0, seg.t0 + seg.h):
                y = seg(t)
                return CouplingState(float(y[0]), float(y[1]))
        seg = self._segments[-1]
        y = seg(t)
        return CouplingState(float(y[0]), float(y[1]))

    def resample(self, n: int) -> "Trajectory":
        """Uniformly spaced samples in t (n >= 2) from the dense output."""
        if n < 2:
            raise ConfigError("samples", f"need at least 2 samples, got {n}")
        ts = np.linspace(self.t[0], self.t[-1], n)
        states = [self.state_at(float(t)) for t in ts[:-1]]
        states.append(self.final)
        return Trajectory(
            ts,
            np.array([s.m2_tilde for s in states]),
            np.array([s.lambda_tilde for s in states]),
            self.termination,
            self.k_start,
            self.direction,
            self._segments,
        )


def _rhs_for(problem: FlowProblem) -> Callable[[float, np.ndarray], np.ndarray]:
    model = problem.model
    if model.is_autonomous:

        def rhs(t, y):
            b = beta(CouplingState(float(y[0]), float(y[1])), model)
            return np.array([-b.dm2, -b.dlambda])

    else:
        kl0 = model.kl

        def rhs(t, y):
            b = beta(CouplingState(float(y[0]), float(y[1])), replace(model, kl=kl0 * math.exp(-t)))
            return np.array([-b.dm2, -b.dlambda])

    return rhs


def _margin_for(problem: FlowProblem) -> Callable[[float, np.ndarray], float]:
    model = problem.model
    if model.is_autonomous:
        return lambda t, y: domain_margin(CouplingState(float(y[0]), float(y[1])), model)
    kl0 = model.kl
    return lambda t, y: domain_margin(CouplingState(float(y[0]), float(y[1])), replace(model, kl=kl0 * math.exp(-t)))


def _dp_step(rhs, t, y, h, f0):
    ks = [f0]
    for i in range(1, 7):
        yi = y + h * sum(a * kj for a, kj in zip(_A[i], ks))
        ks.append(rhs(t + _C[i] * h, yi))
    y1 = y + h * sum(b * kj for b, kj in zip(_B, ks))
    err = h * sum(e * kj for e, kj in zip(_E, ks))
    return y1, err, ks


def _dense(y0, y1, h, ks) -> tuple:
    ydiff = y1 - y0
    bspl = h * ks[0] - ydiff
    r4 = ydiff - h * ks[6] - bspl
    r5 = h * sum(d * kj for d, kj in zip(_D, ks))
    return (y0, ydiff, bspl, r4, r5)


def _locate(seg: _Segment, inside: Callable[[float], bool]) -> float:
    """Bisect on the dense output for the first t where ``inside`` turns false."""
    a, b = seg.t0, seg.t0 + seg.h
    while abs(b - a) > LOCATE_TOL:
        mid = 0.5 * (a + b)
        if inside(mid):
            a = mid
        else:
            b = mid
    return b


def _initial_step(rhs, t, y, f0, span, atol, rtol) -> float:
    scale = atol + rtol * np.abs(y)
    d0 = float(np.sqrt(np.mean((y / scale) ** 2)))
    d1 = float(np.sqrt(np.mean((f0 / scale) ** 2)))
    h = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    return min(h, abs(span))


def integrate(problem: FlowProblem) -> Trajectory:
    """Integrate the flow; termination is recorded, never raised."""
    check_state(problem.initial, problem.model)
    rhs = _rhs_for(problem)
    margin = _margin_for(problem)
    t_end = problem.t_end
    sign = 1.0 if problem.direction is Direction.IR else -1.0

    t = 0.0
    y = np.array(problem.initial.as_tuple(), dtype=float)
    ts, ys, segments = [t], [y], []

    def finish(reason):
        arr = np.array(ys)
        return Trajectory(np.array(ts), arr[:, 0], arr[:, 1], reason, problem.k_start, problem.direction, segments)

    def underflow():
        # a blow-up at the domain edge (nu -> 0 with lambda -> inf on AdS) can
        # outrun the float resolution of t just before the margin test fires
        if margin(t, y) <= 10.0 * DOMAIN_EPS:
            return finish(Termination.LEFT_DOMAIN)
        raise NumericalError(f"step size underflow at t={t}")

    if margin(t, y) <= DOMAIN_EPS:
        return finish(Termination.LEFT_DOMAIN)

    f0 = rhs(t, y)
    fixed = problem.step
    h = fixed if fixed is not None else _initial_step(rhs, t, y, f0, t_end, problem.atol, problem.rtol)
    attempts = 0
    while True:
        remaining = abs(t_end - t)
        if remaining <= 1e-14 * max(1.0, abs(t_end)):
            return finish(Termination.REACHED_TARGET)
        if attempts >= problem.max_steps:
            return finish(Termination.STEP_LIMIT)
        attempts += 1
        h = min(h, remaining)
        hs = sign * h
        try:
            y1, err, ks = _dp_step(rhs, t, y, hs, f0)
            ok = bool(np.all(np.isfinite(y1)) and np.all(np.isfinite(ks[6])))
        except DomainError:
            ok = False
        if not ok:
            if fixed is not None:
                raise NumericalError(f"fixed step {fixed} left the domain near t={t}")
            h *= 0.25
            if h < 4.0 * math.ulp(t):
                return underflow()
            continue

        if fixed is None:
            scale = problem.atol + problem.rtol * np.maximum(np.abs(y), np.abs(y1))
            en = float(np.sqrt(np.mean((err / scale) ** 2)))
            if en > 1.0:
                h *= max(0.2, 0.9 * en**-0.2)
                if h < 4.0 * math.ulp(t):
                    return underflow()
                continue
            factor = 5.0 if en == 0.0 else min(5.0, max(0.2, 0.9 * en**-0.2))
        else:
            factor = 1.0

        seg = _Segment(t, hs, _dense(y, y1, hs, ks))
        t1 = t + hs if h < remaining else t_end

        left = margin(t1, y1) <= DOMAIN_EPS
        diverged = float(np.max(np.abs(y1))) > DIVERGENCE_CAP
        if left or diverged:

            def inside(tt):
                yy = seg(tt)
                return margin(tt, yy) > DOMAIN_EPS and float(np.max(np.abs(yy))) <= DIVERGENCE_CAP

            t_hit = _locate(seg, inside)
            y_hit = seg(t_hit)
            segments.append(seg)
            ts.append(t_hit)
            ys.append(y_hit)
            out_of_domain = margin(t_hit, y_hit) <= DOMAIN_EPS
            return finish(Termination.LEFT_DOMAIN if out_of_domain else Termination.DIVERGED_COUPLING)

        segments.append(seg)
        t, y, f0 = t1, y1, ks[6]
        ts.append(t)
        ys.append(y)
        h *= factor


# ---------------------------------------------------------------------------
# Vector-field sampling
# ---------------------------------------------------------------------------

_HALF_PI = 0.5 * math.pi


@dataclass(frozen=True)
class GridSpec:
    """n x n grid over (m2_tilde, lambda_tilde).

    With ``compactified`` the ranges are given in arctan coordinates, i.e. the
    grid is uniform in (arctan m2, arctan lambda) and both ranges must lie
    strictly inside (-pi/2, pi/2).
    """

    m2_range: tuple[float, float]
    lambda_range: tuple[float, float]
    n: int = 21
    compactified: bool = False

    def __post_init__(self):
        for name in ("m2_range", "lambda_range"):
            lo, hi = (float(v) for v in getattr(self, name))
            object.__setattr__(self, name, (lo, hi))
            if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
                raise ConfigError(name, f"need finite lo < hi, got ({lo}, {hi})")
            if self.compactified and not (-_HALF_PI < lo and hi < _HALF_PI):
                raise ConfigError(name, "compactified ranges must lie inside (-pi/2, pi/2)")
        if int(self.n) != self.n or self.n < 2:
            raise ConfigError("n", f"need an integer >= 2, got {self.n}")

    def axes(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linspace(*self.m2_range, self.n), np.linspace(*self.lambda_range, self.n)


@dataclass(frozen=True)
class FieldTable:
    """Flow field on a grid, one row per node (m2 index major).

    ``x, y`` are plot coordinates (arctan-compactified if requested); ``vx, vy``
    is the IR-pointing vector in those coordinates.  Masked rows hold NaN in
    every beta/vector column.
    """

    x: np.ndarray
    y: np.ndarray
    m2_tilde: np.ndarray
    lambda_tilde: np.ndarray
    dm2: np.ndarray
    dlambda: np.ndarray
    vx: np.ndarray
    vy: np.ndarray
    mask: np.ndarray
    compactified: bool

    COLUMNS = ("x", "y", "m2_tilde", "lambda_tilde", "dm2", "dlambda", "vx", "vy", "mask")

    def __len__(self) -> int:
        return len(self.x)


def _field_row(model: ModelSpec, xs: np.ndarray, y: float, compactified: bool):
    out = []
    for x in xs:
        m2, lam = (math.tan(x), math.tan(y)) if compactified else (float(x), float(y))
        state = CouplingState(m2, lam)
        try:
            if domain_margin(state, model) <= 0.0:
                raise DomainError("outside domain")
            b = beta(state, model)
            if not (math.isfinite(b.dm2) and math.isfinite(b.dlambda)):
                raise DomainError("non-finite beta")
        except DomainError:
            out.append((x, y, m2, lam, math.nan, math.nan, math.nan, math.nan, True))
            continue
        vx, vy = -b.dm2, -b.dlambda
        if compactified:
            vx /= 1.0 + m2 * m2
            vy /= 1.0 + lam * lam
        out.append((x, y, m2, lam, b.dm2, b.dlambda, vx, vy, False))
    return out


def sample_vector_field(model: ModelSpec, grid: GridSpec, workers: int = 1) -> FieldTable:
    xs, ys = grid.axes()
    # rows are independent; order is fixed by the map regardless of worker count
    with ThreadPoolExecutor(max_workers=max(1, workers)) as pool:
        by_lambda = list(pool.map(lambda y: _field_row(model, xs, float(y), grid.compactified), ys))
    rows = [by_lambda[j][i] for i in range(len(xs)) for j in range(len(ys))]
    cols = list(zip(*rows))
    arrays = [np.array(c, dtype=float) for c in cols[:-1]]
    return FieldTable(*arrays, mask=np.array(cols[-1], dtype=bool), compactified=grid.compactified)


__all__ = [
    "DIVERGENCE_CAP",
    "DOMAIN_EPS",
    "Direction",
    "FieldTable",
    "FlowProblem",
    "FlowSample",
    "GridSpec",
    "Termination",
    "Trajectory",
    "integrate",
    "sample_vector_field",
]
