"""Mixed Volterra-Fredholm functional integral equations.

Solves

    x(t) = F(t, x(t), V[x](t), W[x](t)),
    V[x](t) = int_{g <= s <= t} K(t, s, x(s)) ds,
    W[x](t) = int_{box} H(t, s, x(s)) ds,

on a box in R^m by running the new three-step scheme on the operator ``A``
given by the right-hand side, with functions represented by their values on a
tensor quadrature grid and measured in the max norm.

Callbacks are vectorised: ``F(t, u, v, w)`` receives ``t`` of shape ``(B, m)``
and ``u, v, w`` of shape ``(B,)``; ``K(t, s, x)`` and ``H(t, s, x)`` receive
``t`` of shape ``(B, 1, m)``, ``s`` of shape ``(1, N, m)`` and ``x`` of shape
``(1, N)`` and may return anything broadcastable to ``(B, N)``.
"""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .quadrature import QuadratureGrid
from .schemes import ParamSchedule, SchemeId, StopReason, Trajectory, run
from .space import Lipschitz, MappingSpec, NormedSpace, ParameterError, Point, norm, sub


class NotAContractionError(ValueError):
    """The certificate ``alpha + (beta L_K + gamma L_H) |box|`` is not below 1."""

    def __init__(self, theta: float):
        super().__init__(f"contraction certificate theta = {theta:.6g} >= 1")
        self.theta = theta


class EvaluationError(ArithmeticError):
    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class DivergenceError(ArithmeticError):
    pass


class CertificateWarning(UserWarning):
    pass


class SummableScheduleWarning(UserWarning):
    pass


@dataclass(frozen=True)
class IntegralProblem:
    box: tuple
    F: Callable
    K: Callable
    H: Callable
    alpha: float
    beta: float
    gamma: float
    L_K: float
    L_H: float
    solution: Optional[Callable] = None  # p(t) with t of shape (N, m)
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "box", tuple((float(g), float(h)) for g, h in self.box))
        for g, h in self.box:
            if not g < h:
                raise ParameterError(f"empty axis [{g}, {h}]")
        for name in ("alpha", "beta", "gamma", "L_K", "L_H"):
            v = getattr(self, name)
            if not (v >= 0 and math.isfinite(v)):
                raise ParameterError(f"{name} must be a finite nonnegative number, got {v}")

    @property
    def m(self) -> int:
        return len(self.box)

    @property
    def measure(self) -> float:
        return math.prod(h - g for g, h in self.box)

    @property
    def theta(self) -> float:
        return self.alpha + (self.beta * self.L_K + self.gamma * self.L_H) * self.measure


def apply_A(
    problem: IntegralProblem,
    grid: QuadratureGrid,
    c,
    workers: int = 1,
    chunk: int = 256,
):
    """One application of the integral operator to the grid function ``c``.

    Target nodes are processed in blocks of ``chunk`` rows, optionally on a
    thread pool; every row is reduced the same way so the result does not
    depend on ``workers`` or ``chunk``.
    """
    as_point = isinstance(c, Point)
    x = np.asarray(c.value if as_point else c, dtype=float)
    N = grid.size
    if x.shape != (N,):
        raise ParameterError(f"grid function of length {x.shape} for {N} nodes")
    if not np.all(np.isfinite(x)):
        raise EvaluationError("non-finite input grid function")
    nodes = grid.nodes
    s = nodes[None, :, :]
    xs = x[None, :]
    w = grid.weights[None, :]
    out = np.empty(N)

    def block(lo: int):
        rows = np.arange(lo, min(lo + chunk, N))
        t = nodes[rows][:, None, :]
        with np.errstate(all="ignore"):
            kv = np.broadcast_to(problem.K(t, s, xs), (rows.size, N))
            hv = np.broadcast_to(problem.H(t, s, xs), (rows.size, N))
            v = np.sum(grid.volterra_rows(rows) * kv, axis=1)
            wv = np.sum(w * hv, axis=1)
            f = np.broadcast_to(problem.F(nodes[rows], x[rows], v, wv), rows.shape)
        bad = ~np.isfinite(f)
        if bad.any():
            i = rows[np.argmax(bad)]
            raise EvaluationError(f"non-finite value at node {tuple(nodes[i])}", tuple(nodes[i]))
        out[rows] = f

    starts = range(0, N, chunk)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(block, starts))
    else:
        for lo in starts:
            block(lo)
    return Point(out, c.space) if as_point else out


def certify_contraction(
    problem: IntegralProblem,
    grid: Optional[QuadratureGrid] = None,
    samples: int = 20,
    seed: int = 0,
    slack: float = 1e-10,
) -> float:
    """Return the contraction certificate theta; raise if theta >= 1.

    When ``grid`` is given, ``samples`` random pairs of grid functions are
    also pushed through the discrete operator and a ``CertificateWarning`` is
    issued if any observed Lipschitz ratio exceeds theta by more than
    ``slack`` (relative to the pair distance).
    """
    theta = problem.theta
    if theta >= 1.0:
        raise NotAContractionError(theta)
    if grid is not None and samples > 0:
        ratio = empirical_lipschitz(problem, grid, samples, seed)
        if ratio > theta + slack:
            warnings.warn(
                f"observed Lipschitz ratio {ratio:.6g} exceeds theta = {theta:.6g}",
                CertificateWarning,
                stacklevel=2,
            )
    return theta


def empirical_lipschitz(problem: IntegralProblem, grid: QuadratureGrid, samples: int = 100, seed: int = 0) -> float:
    """Largest ``|A x - A y| / |x - y|`` (max norm) over random grid-function pairs."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(samples):
        x = rng.uniform(-2.0, 2.0, grid.size)
        y = x + rng.uniform(-1.0, 1.0, grid.size) * rng.uniform(0.01, 1.0)
        d = np.max(np.abs(x - y))
        if d == 0:
            continue
        ax = apply_A(problem, grid, x)
        ay = apply_A(problem, grid, y)
        worst = max(worst, float(np.max(np.abs(ax - ay)) / d))
    return worst


def bound_56(e0: float, theta: float, deltas) -> tuple[np.ndarray, np.ndarray]:
    """Error bounds after steps 0..n-1 for a schedule ``deltas``.

    Entry ``n`` of the first array is ``e0 * prod_{k<=n} (1 - delta_k (1 - theta))``;
    the second array holds the relaxation ``e0 * exp(-(1 - theta) sum_{k<=n} delta_k)``.
    The product is accumulated as a sum of ``log1p`` terms, which keeps it
    from underflowing and makes ``product <= exponential`` hold in floating point.
    """
    if not 0.0 <= theta < 1.0:
        if theta >= 1.0:
            raise NotAContractionError(theta)
        raise ParameterError(f"theta must lie in [0, 1), got {theta}")
    if e0 < 0:
        raise ParameterError(f"e0 must be nonnegative, got {e0}")
    d = np.asarray(deltas, dtype=float)
    if np.any((d < 0) | (d > 1)):
        raise ParameterError("every delta_k must lie in [0, 1]")
    step = d * (1.0 - theta)
    log_prod = np.cumsum(np.log1p(-step))
    log_exp = -np.cumsum(step)
    if e0 == 0.0:
        zeros = np.zeros_like(d)
        return zeros, zeros.copy()
    return e0 * np.exp(log_prod), e0 * np.exp(log_exp)


@dataclass
class SolveResult:
    solution: Point
    trajectory: Trajectory
    theta: float
    deltas: list
    achieved_residual: float
    tol: float
    initial_error: Optional[float] = None
    quadrature_slack: float = 0.0
    errors: Optional[list] = None
    grid: Optional[QuadratureGrid] = field(default=None, repr=False)

    @property
    def converged(self) -> bool:
        return self.trajectory.stop_reason is StopReason.TOLERANCE_MET

    def bound_56_at(self, n: int) -> float:
        """Bound on ``|c_{n+1} - p|`` (``c_0`` is the start); needs a known solution."""
        if self.initial_error is None:
            raise ValueError("no known solution: the a-priori bound is unavailable")
        prod, _ = bound_56(self.initial_error, self.theta, self.deltas[: n + 1])
        return float(prod[n])

    def bound_history(self) -> tuple[np.ndarray, np.ndarray]:
        if self.initial_error is None:
            raise ValueError("no known solution: the a-priori bound is unavailable")
        return bound_56(self.initial_error, self.theta, self.deltas)


def grid_space(grid: QuadratureGrid) -> NormedSpace:
    return NormedSpace.chebyshev_grid(grid.nodes, tag=f"grid-{grid.rule}-{'x'.join(map(str, grid.counts))}-{grid.box}")


def discretisation_defect(problem: IntegralProblem, grid: QuadratureGrid, p: np.ndarray) -> float:
    """``|A_h p - p|`` in the max norm for the sampled exact solution ``p``.

    The discrete operator's fixed point lies within ``defect / (1 - theta)``
    of ``p``.
    """
    return float(np.max(np.abs(apply_A(problem, grid, p) - p)))


def _warn_if_summable(schedule: ParamSchedule):
    d = schedule.delta
    if isinstance(d, tuple) and len(d) > 1:
        n = len(d)
        if d[-1] < 1.0 / n**2:
            warnings.warn(
                "delta schedule tail looks summable; convergence is not guaranteed",
                SummableScheduleWarning,
                stacklevel=3,
            )


def solve(
    problem: IntegralProblem,
    grid: QuadratureGrid,
    schedule: Optional[ParamSchedule] = None,
    c0=None,
    tol: float = 1e-10,
    max_iters: int = 200,
    workers: int = 1,
    slack_factor: float = 10.0,
    check_certificate: bool = True,
) -> SolveResult:
    """Run the new three-step scheme on the discretised operator.

    Stops once the max-norm residual satisfies ``|A c - c| <= (1 - theta) tol``,
    which bounds the distance to the discrete fixed point by ``tol``. When the problem carries a
    known solution, errors against it and the a-priori bound are recorded too.
    A start that already meets ``tol`` is returned as is; otherwise the
    contraction certificate must hold.
    """
    if grid.box != problem.box:
        raise ParameterError("grid box differs from the problem box")
    schedule = schedule or ParamSchedule(delta=0.95)
    space = grid_space(grid)
    if c0 is None:
        c0 = space.zeros()
    elif not isinstance(c0, Point):
        c0 = Point(c0, space)
    theta = problem.theta
    start_residual = float(np.max(np.abs(apply_A(problem, grid, c0.value, workers=workers) - c0.value)))
    if start_residual > tol:
        theta = certify_contraction(problem, grid if check_certificate else None)
        _warn_if_summable(schedule)

    S = MappingSpec(
        lambda x: apply_A(problem, grid, x, workers=workers),
        space,
        lipschitz=Lipschitz.contraction(theta) if 0 < theta < 1 else Lipschitz(),
        name=problem.name or "A",
    )
    p = None
    if problem.solution is not None:
        p = Point(grid.sample(problem.solution), space)
    try:
        stop_tol = tol * (1.0 - theta) if theta < 1.0 else tol
        traj = run(SchemeId.NEW, S, c0, schedule, tol=stop_tol, max_iters=max_iters, stop_on="residual", reference=p)
    except EvaluationError as exc:
        raise DivergenceError(str(exc)) from exc
    if traj.stop_reason is StopReason.DIVERGED:
        raise DivergenceError(f"non-finite iterate after {len(traj)} steps")
    deltas = [schedule.at(n)[0] for n in range(1, len(traj) + 1)]
    final = traj.final
    result = SolveResult(
        solution=final,
        trajectory=traj,
        theta=theta,
        deltas=deltas,
        achieved_residual=traj.residuals[-1],
        tol=tol,
        grid=grid,
    )
    if p is not None and theta < 1.0:
        result.initial_error = norm(space, sub(c0, p))
        result.errors = list(traj.errors)
        defect = discretisation_defect(problem, grid, p.value)
        result.quadrature_slack = slack_factor * defect / (1.0 - theta) + 1e-12 * (1.0 + norm(space, p))
    return result
