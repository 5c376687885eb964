"""Fixed-point iteration step rules and a generic runner.

Parameter placement follows one convention for every scheme: ``delta`` weights
the innermost averaging stage, ``zeta`` the next one out and ``gamma`` the
outermost. With this convention the comparator columns of the classical
``sqrt(c^2 - 6c + 30)`` benchmark table are reproduced to 10 decimals.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

from .space import (
    MappingSpec,
    NormedSpace,
    ParameterError,
    Point,
    convex_combine,
    counting,
    norm,
    sub,
)

PARAM_MARGIN = 1e-15


class SchemeId(str, enum.Enum):
    PICARD = "picard"
    MANN = "mann"
    ISHIKAWA = "ishikawa"
    NOOR = "noor"
    AGARWAL = "agarwal"
    ABBAS_NAZIR = "abbas_nazir"
    THAKUR = "thakur"
    NEW = "new"

    @classmethod
    def parse(cls, name: Union[str, "SchemeId"]) -> "SchemeId":
        if isinstance(name, SchemeId):
            return name
        key = name.strip().lower().replace("-", "_")
        key = _ALIASES.get(key, key)
        try:
            return cls(key)
        except ValueError:
            raise KeyError(f"unknown scheme {name!r}") from None


_ALIASES = {
    "new_garodia_uddin": "new",
    "new_iter": "new",
    "abbas": "abbas_nazir",
}

# Mapping evaluations per step (excluding the residual evaluation).
EVALS_PER_STEP = {
    SchemeId.PICARD: 1,
    SchemeId.MANN: 1,
    SchemeId.ISHIKAWA: 2,
    SchemeId.NOOR: 3,
    SchemeId.AGARWAL: 2,
    SchemeId.ABBAS_NAZIR: 3,
    SchemeId.THAKUR: 3,
    SchemeId.NEW: 3,
}


Rule = Union[float, Sequence[float]]


def _check_unit(value: float, what: str):
    if not (PARAM_MARGIN < value < 1.0 - PARAM_MARGIN):
        raise ParameterError(f"{what} must lie strictly inside (0, 1), got {value}")


@dataclass(frozen=True)
class ParamSchedule:
    """Sequences ``delta_n``, ``zeta_n``, ``gamma_n`` for n = 1, 2, ...

    Each rule is either a constant or a list whose last entry is repeated
    once the list is exhausted.
    """

    delta: Rule = 0.95
    zeta: Rule = 0.30
    gamma: Rule = 0.90

    def __post_init__(self):
        for name in ("delta", "zeta", "gamma"):
            rule = getattr(self, name)
            if isinstance(rule, (int, float)):
                _check_unit(float(rule), name)
            else:
                rule = tuple(float(v) for v in rule)
                if not rule:
                    raise ParameterError(f"empty {name} table")
                for v in rule:
                    _check_unit(v, name)
                object.__setattr__(self, name, rule)

    @staticmethod
    def _value(rule: Rule, n: int) -> float:
        if isinstance(rule, tuple):
            return rule[min(n, len(rule)) - 1]
        return float(rule)

    def at(self, n: int) -> tuple[float, float, float]:
        """Parameters for step ``n`` (1-based)."""
        if n < 1:
            raise ValueError("schedule index starts at 1")
        return (
            self._value(self.delta, n),
            self._value(self.zeta, n),
            self._value(self.gamma, n),
        )

    def is_constant(self) -> bool:
        return not any(isinstance(r, tuple) for r in (self.delta, self.zeta, self.gamma))


def step_new(S: MappingSpec, c: Point, delta: float) -> Point:
    a = S(c)
    b = convex_combine(a, S(a), delta)
    return S(b)


def step_thakur(S: MappingSpec, w: Point, delta: float, zeta: float) -> Point:
    u = convex_combine(w, S(w), delta)
    v = S(convex_combine(w, u, zeta))
    return S(v)


def step_classical(
    scheme: SchemeId,
    S: MappingSpec,
    x: Point,
    delta: float,
    zeta: float = 0.5,
    gamma: float = 0.5,
) -> Point:
    scheme = SchemeId.parse(scheme)
    if scheme is SchemeId.PICARD:
        return S(x)
    if scheme is SchemeId.MANN:
        return convex_combine(x, S(x), delta)
    if scheme is SchemeId.ISHIKAWA:
        y = convex_combine(x, S(x), delta)
        return convex_combine(x, S(y), zeta)
    if scheme is SchemeId.NOOR:
        z = convex_combine(x, S(x), delta)
        y = convex_combine(x, S(z), zeta)
        return convex_combine(x, S(y), gamma)
    if scheme is SchemeId.AGARWAL:
        sx = S(x)
        y = convex_combine(x, sx, delta)
        return convex_combine(sx, S(y), zeta)
    if scheme is SchemeId.ABBAS_NAZIR:
        sx = S(x)
        z = convex_combine(x, sx, delta)
        sz = S(z)
        y = convex_combine(sx, sz, zeta)
        return convex_combine(S(y), sz, gamma)
    if scheme is SchemeId.THAKUR:
        return step_thakur(S, x, delta, zeta)
    if scheme is SchemeId.NEW:
        return step_new(S, x, delta)
    raise KeyError(scheme)


class StopReason(str, enum.Enum):
    TOLERANCE_MET = "tolerance_met"
    MAX_ITERS = "max_iters"
    DIVERGED = "diverged"


@dataclass
class Trajectory:
    scheme: SchemeId
    space: NormedSpace
    iterates: list = field(default_factory=list)
    residuals: list = field(default_factory=list)
    errors: Optional[list] = None
    stop_reason: Optional[StopReason] = None
    evaluations: int = 0

    def __len__(self):
        return len(self.iterates)

    @property
    def final(self) -> Point:
        return self.iterates[-1]

    def values(self) -> np.ndarray:
        """Iterates stacked into an array of shape (steps, dim)."""
        return np.array([p.value for p in self.iterates])

    def steps_to(self, tol: float, use: str = "error") -> Optional[int]:
        """First 1-based step whose error (or residual) is below ``tol``."""
        seq = self.errors if use == "error" else self.residuals
        if seq is None:
            return None
        for i, e in enumerate(seq, start=1):
            if e < tol:
                return i
        return None


def run(
    scheme,
    S: MappingSpec,
    x0: Point,
    params: Optional[ParamSchedule] = None,
    tol: float = 1e-10,
    max_iters: int = 1000,
    stop_on: str = "auto",
    reference: Optional[Point] = None,
) -> Trajectory:
    """Iterate ``scheme`` from ``x0`` and record every iterate.

    Step 1 is ``x0`` itself. Iteration stops when the stopping quantity is at
    most ``tol`` or ``max_iters`` iterates have been recorded. ``stop_on`` is
    ``"error"`` (distance to the reference point), ``"residual"``
    (``|Sx - x|``) or ``"auto"``, which uses the error when a reference is
    available. ``reference`` defaults to the mapping's known fixed point.

    A non-finite iterate ends the run with ``StopReason.DIVERGED``; the
    offending iterate is not recorded.
    """
    scheme = SchemeId.parse(scheme)
    if tol <= 0:
        raise ParameterError("tol must be positive")
    if max_iters < 1:
        raise ParameterError("max_iters must be >= 1")
    params = params or ParamSchedule()
    q = reference if reference is not None else S.fixed_point
    if stop_on == "auto":
        stop_on = "error" if q is not None else "residual"
    if stop_on not in ("error", "residual"):
        raise ValueError(f"unknown stopping rule {stop_on!r}")
    if stop_on == "error" and q is None:
        raise ValueError("error-based stopping needs a reference point")

    Sc, count = counting(S)
    space = S.space
    traj = Trajectory(scheme, space, errors=[] if q is not None else None)

    def record(x: Point) -> bool:
        sx = Sc(x)
        r = norm(space, sub(sx, x))
        if not math.isfinite(r):
            return False
        traj.iterates.append(x)
        traj.residuals.append(r)
        if q is not None:
            traj.errors.append(norm(space, sub(x, q)))
        return True

    def done() -> bool:
        last = traj.errors[-1] if stop_on == "error" else traj.residuals[-1]
        return last <= tol

    x = x0
    with np.errstate(all="ignore"):
        if not x.is_finite() or not record(x):
            traj.stop_reason = StopReason.DIVERGED
        n = 1
        while traj.stop_reason is None:
            if done():
                traj.stop_reason = StopReason.TOLERANCE_MET
                break
            if len(traj.iterates) >= max_iters:
                traj.stop_reason = StopReason.MAX_ITERS
                break
            delta, zeta, gamma = params.at(n)
            x = step_classical(scheme, Sc, x, delta, zeta, gamma)
            n += 1
            if not x.is_finite() or not record(x):
                traj.stop_reason = StopReason.DIVERGED
    traj.evaluations = count[0]
    return traj


def iterate(scheme, S: MappingSpec, x0: Point, params: Optional[ParamSchedule] = None, steps: int = 30) -> list:
    """Exactly ``steps`` iterates starting with ``x0``, with no stopping rule."""
    scheme = SchemeId.parse(scheme)
    params = params or ParamSchedule()
    out = [x0]
    for n in range(1, steps):
        out.append(step_classical(scheme, S, out[-1], *params.at(n)))
    return out
