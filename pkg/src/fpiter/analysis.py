"""Rate-of-convergence tools.

Closed-form contraction bounds for the new three-step scheme and Thakur's
scheme, their ratio, and an empirical comparison of two trajectories in the
sense of Berinde (``|a_n - q| / |b_n - q| -> 0`` means ``a`` is faster).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .space import DimensionError, MappingSpec, ParameterError, Point, norm, sub
from .schemes import SchemeId, Trajectory

MACHINE_ZERO = 1e-15


def _open_unit(value: float, name: str, closed_right: bool = False):
    ok = 0.0 < value < 1.0 or (closed_right and value == 1.0)
    if not ok:
        interval = "(0, 1]" if closed_right else "(0, 1)"
        raise ParameterError(f"{name} must lie in {interval}, got {value}")


def _log_factor_new(xi: float, delta: float) -> float:
    return 2.0 * math.log(xi) + math.log1p(-(1.0 - xi) * delta)


def _log_factor_thakur(xi: float, delta: float, zeta: float) -> float:
    return 2.0 * math.log(xi) + math.log1p(-(1.0 - xi) * delta * zeta)


def _geometric(e1: float, log_factor: float, n: int) -> float:
    if e1 < 0:
        raise ParameterError(f"initial error must be nonnegative, got {e1}")
    if n < 0:
        raise ParameterError(f"n must be nonnegative, got {n}")
    if e1 == 0.0:
        return 0.0
    if n == 0:
        return e1
    return math.exp(math.log(e1) + n * log_factor)


def bound_new(xi: float, delta: float, e1: float, n: int) -> float:
    """``xi^(2n) (1 - (1 - xi) delta)^n e1``: error bound of the new scheme after n steps."""
    _open_unit(xi, "xi")
    _open_unit(delta, "delta")
    return _geometric(e1, _log_factor_new(xi, delta), n)


def bound_thakur(xi: float, delta: float, zeta: float, e1: float, n: int) -> float:
    """``xi^(2n) (1 - (1 - xi) delta zeta)^n e1``.

    ``zeta = 1`` is accepted so the bound can be compared with
    :func:`bound_new`, with which it then coincides.
    """
    _open_unit(xi, "xi")
    _open_unit(delta, "delta")
    _open_unit(zeta, "zeta", closed_right=True)
    return _geometric(e1, _log_factor_thakur(xi, delta, zeta), n)


def theoretical_ratio(
    xi: float, delta: float, zeta: float, e1_new: float, e1_thakur: float, n: int
) -> float:
    """``bound_new / bound_thakur`` evaluated in log space."""
    _open_unit(xi, "xi")
    _open_unit(delta, "delta")
    _open_unit(zeta, "zeta", closed_right=True)
    if e1_new < 0 or n < 0:
        raise ParameterError("e1_new and n must be nonnegative")
    if not e1_thakur > 0:
        raise ZeroDivisionError("Thakur bound vanishes: e1_thakur must be positive")
    if e1_new == 0.0:
        return 0.0
    # xi^(2n) cancels exactly
    log_r = (
        math.log(e1_new)
        - math.log(e1_thakur)
        + n * (math.log1p(-(1.0 - xi) * delta) - math.log1p(-(1.0 - xi) * delta * zeta))
    )
    return math.exp(log_r)


@dataclass(frozen=True)
class RateBound:
    scheme: SchemeId
    xi: float
    delta: float
    zeta: float
    initial_error: float

    def __post_init__(self):
        if self.scheme not in (SchemeId.NEW, SchemeId.THAKUR):
            raise ValueError(f"no closed-form bound for {self.scheme.value}")
        _open_unit(self.xi, "xi")
        _open_unit(self.delta, "delta")
        _open_unit(self.zeta, "zeta", closed_right=True)

    @property
    def per_step_factor(self) -> float:
        if self.scheme is SchemeId.NEW:
            return math.exp(_log_factor_new(self.xi, self.delta))
        return math.exp(_log_factor_thakur(self.xi, self.delta, self.zeta))

    def bound_at(self, n: int) -> float:
        if self.scheme is SchemeId.NEW:
            return bound_new(self.xi, self.delta, self.initial_error, n)
        return bound_thakur(self.xi, self.delta, self.zeta, self.initial_error, n)


class Verdict(str, enum.Enum):
    A_FASTER = "a_faster"
    B_FASTER = "b_faster"
    INCONCLUSIVE = "inconclusive"


@dataclass
class ComparisonReport:
    scheme_a: SchemeId
    scheme_b: SchemeId
    ratio_sequence: list
    verdict: Verdict
    threshold: float = 0.5
    tail_fraction: float = 0.25

    def first_n_below(self, eps: float) -> Optional[int]:
        """First 1-based step at which the error ratio drops below ``eps``."""
        for i, r in enumerate(self.ratio_sequence, start=1):
            if r < eps:
                return i
        return None


def _tail_wins(seq: np.ndarray, threshold: float) -> bool:
    return bool(np.all(seq < threshold) and np.all(np.diff(seq) < 0))


def error_sequence(traj: Trajectory, q: Point) -> np.ndarray:
    return np.array([norm(traj.space, sub(x, q)) for x in traj.iterates])


def empirical_compare(
    traj_a: Trajectory,
    traj_b: Trajectory,
    q: Point,
    threshold: float = 0.5,
    tail_fraction: float = 0.25,
) -> ComparisonReport:
    """Compare two trajectories converging to ``q``.

    The ratio ``|a_n - q| / |b_n - q|`` is formed step by step until either
    error reaches machine zero. ``a`` is declared faster when the last
    ``tail_fraction`` of the ratios (at least two entries) is below
    ``threshold`` and strictly decreasing; ``b`` symmetrically on the
    inverse ratio.
    """
    if not traj_a.iterates or not traj_b.iterates:
        raise ValueError("trajectories must be non-empty")
    if not traj_a.space.compatible(traj_b.space):
        raise DimensionError(f"{traj_a.space.tag} vs {traj_b.space.tag}")
    ea = error_sequence(traj_a, q)
    eb = error_sequence(traj_b, q)
    ratios = []
    for a, b in zip(ea, eb):
        if a < MACHINE_ZERO or b < MACHINE_ZERO:
            break
        ratios.append(float(a / b))
    verdict = Verdict.INCONCLUSIVE
    r = np.array(ratios)
    k = max(2, math.ceil(tail_fraction * len(r)))
    if len(r) >= 2:
        tail = r[-k:]
        if _tail_wins(tail, threshold):
            verdict = Verdict.A_FASTER
        elif _tail_wins(1.0 / tail, threshold):
            verdict = Verdict.B_FASTER
    return ComparisonReport(traj_a.scheme, traj_b.scheme, ratios, verdict, threshold, tail_fraction)


def estimate_contraction_factor(mapping: MappingSpec, lower: float, upper: float, points: int = 4001, margin: float = 0.01) -> float:
    """Grid estimate of a scalar map's Lipschitz constant on ``[lower, upper]``.

    Takes the largest difference quotient between neighbouring grid points and
    inflates it by ``margin`` (relative). When that would reach 1 the estimate
    is instead placed halfway between the observed slope and 1.
    """
    xs = np.linspace(lower, upper, points)
    sx = np.array([mapping(mapping.space.point(x)).scalar for x in xs])
    slope = float(np.max(np.abs(np.diff(sx) / np.diff(xs))))
    if slope >= 1.0:
        raise ParameterError(f"observed slope {slope} is not a contraction")
    return min(slope * (1.0 + margin), 0.5 * (slope + 1.0))
