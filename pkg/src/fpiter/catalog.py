"""Named test maps and integral-equation problems.

Extra entries can be added at runtime with :func:`register_map` and
:func:`register_problem`; the CLI resolves ``--map`` and ``--problem`` here.
"""

from __future__ import annotations

import math
from typing import Callable

import numpy as np

from .integral import IntegralProblem
from .space import Box, Lipschitz, MappingSpec, NormedSpace, Point

_MAPS: dict[str, Callable[[], MappingSpec]] = {}
_PROBLEMS: dict[str, Callable[[], IntegralProblem]] = {}


def register_map(name: str, factory: Callable[[], MappingSpec]):
    _MAPS[name] = factory


def register_problem(name: str, factory: Callable[[], IntegralProblem]):
    _PROBLEMS[name] = factory


def get_map(name: str) -> MappingSpec:
    try:
        return _MAPS[name]()
    except KeyError:
        raise KeyError(f"unknown map {name!r}; known: {', '.join(sorted(_MAPS))}") from None


def get_problem(name: str) -> IntegralProblem:
    try:
        return _PROBLEMS[name]()
    except KeyError:
        raise KeyError(f"unknown problem {name!r}; known: {', '.join(sorted(_PROBLEMS))}") from None


def map_names() -> list:
    return sorted(_MAPS)


def problem_names() -> list:
    return sorted(_PROBLEMS)


# -- scalar maps -----------------------------------------------------------

R = NormedSpace.real_line()


def sqrt_quadratic() -> MappingSpec:
    """``S(c) = sqrt(c^2 - 6c + 30)`` on ``[1, 50]``, fixed point 5."""
    return MappingSpec(
        lambda x: np.sqrt(x * x - 6.0 * x + 30.0),
        R,
        Box(1.0, 50.0),
        Lipschitz.nonexpansive(),
        R.point(5.0),
        "sqrt-quadratic",
    )


def _scaled(factor: float, name: str) -> Callable[[], MappingSpec]:
    def make():
        return MappingSpec(lambda x: factor * x, R, Box(), Lipschitz.contraction(factor), R.point(0.0), name)

    return make


def cosine() -> MappingSpec:
    # fixed point of cos (Dottie number), Lipschitz sin(1) on [0, 1]
    q = 0.7390851332151607
    return MappingSpec(np.cos, R, Box(0.0, 1.0), Lipschitz.contraction(math.sin(1.0)), R.point(q), "cosine")


def identity() -> MappingSpec:
    return MappingSpec(lambda x: np.array(x, copy=True), R, Box(), Lipschitz.nonexpansive(), None, "identity")


def rotation_2d() -> MappingSpec:
    """Rotation by 60 degrees about (1, 1) scaled by 0.9 in the Euclidean plane."""
    E2 = NormedSpace.euclidean(2)
    c, s = math.cos(math.pi / 3), math.sin(math.pi / 3)
    M = 0.9 * np.array([[c, -s], [s, c]])
    centre = np.array([1.0, 1.0])
    return MappingSpec(lambda x: centre + M @ (x - centre), E2, Box(), Lipschitz.contraction(0.9), E2.point(centre), "rotation-2d")


register_map("sqrt-quadratic", sqrt_quadratic)
register_map("half", _scaled(0.5, "half"))
register_map("quarter", _scaled(0.25, "quarter"))
register_map("cosine", cosine)
register_map("identity", identity)
register_map("rotation-2d", rotation_2d)


# -- integral problems -----------------------------------------------------

def _x(t, s, x):
    return x


def mvf_linear_1d(alpha: float = 0.25) -> IntegralProblem:
    """Manufactured 1-D problem on [0, 1] with solution ``p(t) = t``.

    ``F = alpha u + v/4 + w/4 + g(t)``, ``K = H = x``; with ``alpha = 1/4``
    the certificate is 3/4.
    """

    def F(t, u, v, w):
        t = t[..., 0]
        g = t - alpha * t - t * t / 8.0 - 1.0 / 8.0
        return alpha * u + 0.25 * v + 0.25 * w + g

    return IntegralProblem(
        ((0.0, 1.0),), F, _x, _x, alpha, 0.25, 0.25, 1.0, 1.0,
        solution=lambda t: t[..., 0], name="mvf-linear-1d",
    )


def mvf_exp_1d() -> IntegralProblem:
    """Manufactured 1-D problem with solution ``p(t) = exp(t)`` (not polynomial)."""
    e = math.e

    def F(t, u, v, w):
        t = t[..., 0]
        g = np.exp(t) - np.exp(t) / 4.0 - (np.exp(t) - 1.0) / 4.0 - (e - 1.0) / 4.0
        return 0.25 * u + 0.25 * v + 0.25 * w + g

    return IntegralProblem(
        ((0.0, 1.0),), F, _x, _x, 0.25, 0.25, 0.25, 1.0, 1.0,
        solution=lambda t: np.exp(t[..., 0]), name="mvf-exp-1d",
    )


def mvf_nonlinear_2d() -> IntegralProblem:
    """Manufactured problem on [0, 1]^2 with solution ``p(t) = t1 + t2``.

    ``F = sin(u)/5 + v/4 + w/4 + g(t)``, ``K = x``, ``H = x/2``; certificate
    ``0.2 + (0.25 + 0.125) = 0.575``.
    """

    def F(t, u, v, w):
        t1, t2 = t[..., 0], t[..., 1]
        p = t1 + t2
        g = p - 0.2 * np.sin(p) - 0.25 * (t1 * t2 * p / 2.0) - 0.25 * 0.5
        return 0.2 * np.sin(u) + 0.25 * v + 0.25 * w + g

    return IntegralProblem(
        ((0.0, 1.0), (0.0, 1.0)), F, _x, lambda t, s, x: 0.5 * x, 0.2, 0.25, 0.25, 1.0, 0.5,
        solution=lambda t: t[..., 0] + t[..., 1], name="mvf-nonlinear-2d",
    )


def mvf_identity() -> IntegralProblem:
    """``F(t, u, v, w) = u``: every grid function is a fixed point (certificate 1)."""
    return IntegralProblem(
        ((0.0, 1.0),), lambda t, u, v, w: u, _x, _x, 1.0, 0.0, 0.0, 1.0, 1.0,
        name="mvf-identity",
    )


def mvf_inflated() -> IntegralProblem:
    """The linear manufactured problem with ``alpha = 0.6`` (certificate 1.1)."""
    p = mvf_linear_1d(alpha=0.6)
    return IntegralProblem(p.box, p.F, p.K, p.H, 0.6, p.beta, p.gamma, p.L_K, p.L_H, p.solution, "mvf-inflated")


register_problem("mvf-linear-1d", mvf_linear_1d)
register_problem("mvf-exp-1d", mvf_exp_1d)
register_problem("mvf-nonlinear-2d", mvf_nonlinear_2d)
register_problem("mvf-identity", mvf_identity)
register_problem("mvf-inflated", mvf_inflated)
