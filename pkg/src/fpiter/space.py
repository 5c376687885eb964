"""Normed spaces, points and self-maps.

Points are immutable wrappers around a float64 payload tagged with the space
they live in. Three kinds of space are supported: the real line, R^d with the
Euclidean norm, and grid functions (nodal values on a tensor grid) with the
discrete Chebyshev (max) norm.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

DOMAIN_TOL = 1e-12
LIPSCHITZ_TOL = 1e-12


class DimensionError(ValueError):
    """Arithmetic attempted between points of different spaces."""


class ParameterError(ValueError):
    """A scalar parameter is outside its admissible range."""


class DomainError(ValueError):
    """A mapping produced (or was given) a point outside its domain."""

    def __init__(self, message: str, point: Optional["Point"] = None):
        super().__init__(message)
        self.point = point


class SpaceKind(str, enum.Enum):
    REAL_LINE = "real-line"
    EUCLIDEAN = "euclidean"
    CHEBYSHEV_GRID = "chebyshev-grid"


@dataclass(frozen=True, eq=False)
class NormedSpace:
    kind: SpaceKind
    dim: int = 1
    tag: str = ""
    nodes: Optional[np.ndarray] = None  # (N, m) node coordinates for grid spaces

    def __post_init__(self):
        if self.dim < 1:
            raise DimensionError(f"dimension must be >= 1, got {self.dim}")
        if self.kind is SpaceKind.REAL_LINE and self.dim != 1:
            raise DimensionError("the real line has dimension 1")
        if not self.tag:
            object.__setattr__(self, "tag", f"{self.kind.value}-{self.dim}")
        if self.nodes is not None:
            nodes = np.array(self.nodes, dtype=float)
            if nodes.ndim == 1:
                nodes = nodes[:, None]
            if nodes.shape[0] != self.dim:
                raise DimensionError(
                    f"{nodes.shape[0]} nodes given for a space of dimension {self.dim}"
                )
            nodes.setflags(write=False)
            object.__setattr__(self, "nodes", nodes)

    @classmethod
    def real_line(cls) -> "NormedSpace":
        return cls(SpaceKind.REAL_LINE, 1, "real-line")

    @classmethod
    def euclidean(cls, d: int) -> "NormedSpace":
        return cls(SpaceKind.EUCLIDEAN, d, f"euclidean-{d}")

    @classmethod
    def chebyshev_grid(cls, nodes, tag: str = "") -> "NormedSpace":
        nodes = np.asarray(nodes, dtype=float)
        n = nodes.shape[0]
        return cls(SpaceKind.CHEBYSHEV_GRID, n, tag or f"chebyshev-grid-{n}", nodes)

    def compatible(self, other: "NormedSpace") -> bool:
        return self.tag == other.tag and self.dim == other.dim

    def point(self, payload) -> "Point":
        return Point(payload, self)

    def zeros(self) -> "Point":
        return Point(np.zeros(self.dim), self)

    def norm(self, u: "Point") -> float:
        return norm(self, u)

    def distance(self, u: "Point", v: "Point") -> float:
        return norm(self, sub(u, v))


class Point:
    """Immutable element of a :class:`NormedSpace`."""

    __slots__ = ("_value", "space")

    def __init__(self, payload, space: NormedSpace):
        value = np.array(payload, dtype=float).reshape(-1)
        if value.shape[0] != space.dim:
            raise DimensionError(
                f"payload of length {value.shape[0]} does not fit {space.tag}"
            )
        value.setflags(write=False)
        self._value = value
        self.space = space

    @property
    def value(self) -> np.ndarray:
        return self._value

    @property
    def scalar(self) -> float:
        if self.space.dim != 1:
            raise DimensionError(f"{self.space.tag} point is not a scalar")
        return float(self._value[0])

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self._value)))

    def __repr__(self):
        if self.space.dim == 1:
            return f"Point({self._value[0]!r}, {self.space.tag})"
        return f"Point({self._value!r}, {self.space.tag})"

    def __eq__(self, other):
        if not isinstance(other, Point):
            return NotImplemented
        return self.space.compatible(other.space) and np.array_equal(
            self._value, other._value
        )

    __hash__ = None


def _check_same(u: Point, v: Point):
    if not u.space.compatible(v.space):
        raise DimensionError(f"space mismatch: {u.space.tag} vs {v.space.tag}")


def sub(u: Point, v: Point) -> Point:
    _check_same(u, v)
    return Point(u.value - v.value, u.space)


def add(u: Point, v: Point) -> Point:
    _check_same(u, v)
    return Point(u.value + v.value, u.space)


def scale(lam: float, u: Point) -> Point:
    return Point(lam * u.value, u.space)


def convex_combine(u: Point, v: Point, t: float) -> Point:
    """Return ``(1 - t) u + t v``, evaluated as ``u + t (v - u)``.

    The result is clipped to the componentwise hull of ``u`` and ``v``, which
    rounding in ``v - u`` can otherwise leave when the magnitudes differ widely.
    """
    _check_same(u, v)
    if not 0.0 <= t <= 1.0:
        raise ParameterError(f"convex weight must lie in [0, 1], got {t}")
    a, b = u.value, v.value
    with np.errstate(invalid="ignore"):
        out = np.clip(a + t * (b - a), np.minimum(a, b), np.maximum(a, b))
    return Point(out, u.space)


def norm(space: NormedSpace, u: Point) -> float:
    if not space.compatible(u.space):
        raise DimensionError(f"point of {u.space.tag} measured in {space.tag}")
    x = u.value
    if space.kind is SpaceKind.EUCLIDEAN:
        return math.hypot(*x)
    return float(np.max(np.abs(x)))


@dataclass(frozen=True)
class Box:
    """Closed box ``[lower, upper]`` (componentwise); ``None`` bounds are open."""

    lower: Optional[float | Sequence[float]] = None
    upper: Optional[float | Sequence[float]] = None

    def contains(self, u: Point, tol: float = DOMAIN_TOL) -> bool:
        x = u.value
        if self.lower is not None and np.any(x < np.asarray(self.lower) - tol):
            return False
        if self.upper is not None and np.any(x > np.asarray(self.upper) + tol):
            return False
        return True


WHOLE_SPACE = Box()


@dataclass(frozen=True)
class Lipschitz:
    """Declared Lipschitz class of a map: contraction(xi), nonexpansive or unknown."""

    kind: str = "unknown"
    factor: Optional[float] = None

    @classmethod
    def contraction(cls, xi: float) -> "Lipschitz":
        if not 0.0 < xi < 1.0:
            raise ParameterError(f"contraction factor must lie in (0, 1), got {xi}")
        return cls("contraction", xi)

    @classmethod
    def nonexpansive(cls) -> "Lipschitz":
        return cls("nonexpansive", 1.0)

    @property
    def bound(self) -> Optional[float]:
        return self.factor


@dataclass(frozen=True)
class MappingSpec:
    """A self-map ``S: J -> J`` on a convex subset of a normed space.

    ``fn`` acts on raw payloads (a 1-D float array) and must be pure. Calling
    the mapping checks domain membership of both input and output.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    space: NormedSpace
    domain: Box = WHOLE_SPACE
    lipschitz: Lipschitz = field(default_factory=Lipschitz)
    fixed_point: Optional[Point] = None
    name: str = ""

    def __call__(self, u: Point) -> Point:
        if not self.space.compatible(u.space):
            raise DimensionError(f"map on {self.space.tag} applied to {u.space.tag}")
        if not self.domain.contains(u):
            raise DomainError(f"{u!r} is outside the domain of {self.name or 'map'}", u)
        out = Point(self.fn(u.value), self.space)
        if out.is_finite() and not self.domain.contains(out):
            raise DomainError(f"{self.name or 'map'} sends {u!r} to {out!r} outside its domain", out)
        return out

    def residual(self, u: Point) -> float:
        return norm(self.space, sub(self(u), u))

    def with_fn(self, fn) -> "MappingSpec":
        return MappingSpec(fn, self.space, self.domain, self.lipschitz, self.fixed_point, self.name)


def counting(mapping: MappingSpec) -> tuple[MappingSpec, list]:
    """Wrap ``mapping`` so each evaluation is tallied in the returned one-element list."""
    count = [0]
    fn = mapping.fn

    def wrapped(x):
        count[0] += 1
        return fn(x)

    return mapping.with_fn(wrapped), count


@dataclass
class LipschitzReport:
    max_ratio: float
    violations: int
    pairs_used: int


def spot_check_lipschitz(mapping: MappingSpec, samples) -> LipschitzReport:
    """Largest observed ``|Su - Sv| / |u - v|`` over ``samples`` (pairs of points).

    Pairs with ``u == v`` are skipped. A violation is a pair whose ratio exceeds
    the declared class bound by more than ``LIPSCHITZ_TOL``.
    """
    samples = list(samples)
    if not samples:
        raise ValueError("need at least one sample pair")
    bound = mapping.lipschitz.bound
    space = mapping.space
    max_ratio = 0.0
    violations = 0
    used = 0
    for u, v in samples:
        if not isinstance(u, Point):
            u, v = space.point(u), space.point(v)
        d = space.distance(u, v)
        if d == 0.0:
            continue
        used += 1
        ratio = space.distance(mapping(u), mapping(v)) / d
        max_ratio = max(max_ratio, ratio)
        if bound is not None and ratio > bound + LIPSCHITZ_TOL:
            violations += 1
    return LipschitzReport(max_ratio, violations, used)
