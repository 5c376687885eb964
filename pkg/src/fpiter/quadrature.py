"""Composite Newton-Cotes rules on tensor-product grids.

Besides the usual full-interval weights each axis carries a lower-triangular
*prefix* weight matrix ``P`` whose row ``k`` integrates over ``[g, x_k]`` using
only nodes ``x_0..x_k``. Rows reuse the composite rule of the grid; for
Simpson with an odd number of sub-intervals the last three are covered by the
3/8 rule, and a single sub-interval falls back to the trapezoid. All prefix
weights are nonnegative and row ``k`` sums to ``x_k - g``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

TRAPEZOID = "trapezoid"
SIMPSON = "simpson"
RULES = (TRAPEZOID, SIMPSON)


class QuadratureError(ValueError):
    pass


def _trapezoid_weights(k: int, h: float) -> np.ndarray:
    w = np.full(k + 1, h)
    w[0] = w[-1] = 0.5 * h
    return w


def _simpson_weights(k: int, h: float) -> np.ndarray:
    # k even, k >= 2
    w = np.empty(k + 1)
    w[0::2] = 2.0
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def _simpson_any(k: int, h: float) -> np.ndarray:
    """Simpson-type weights over k sub-intervals for any k >= 1."""
    if k == 1:
        return _trapezoid_weights(1, h)
    if k % 2 == 0:
        return _simpson_weights(k, h)
    w = np.zeros(k + 1)
    if k > 3:
        w[: k - 2] = _simpson_weights(k - 3, h)
    w[k - 3 :] += np.array([1.0, 3.0, 3.0, 1.0]) * (3.0 * h / 8.0)
    return w


def axis_weights(n_nodes: int, length: float, rule: str) -> np.ndarray:
    if rule not in RULES:
        raise QuadratureError(f"unknown rule {rule!r}")
    k = n_nodes - 1
    if k < 1:
        raise QuadratureError("need at least two nodes per axis")
    h = length / k
    if rule == TRAPEZOID:
        return _trapezoid_weights(k, h)
    if k % 2:
        raise QuadratureError(f"composite Simpson needs an even number of intervals, got {k}")
    return _simpson_weights(k, h)


def prefix_weights(n_nodes: int, length: float, rule: str) -> np.ndarray:
    """Row k integrates from the left end to node k."""
    k_max = n_nodes - 1
    h = length / k_max
    P = np.zeros((n_nodes, n_nodes))
    for k in range(1, n_nodes):
        P[k, : k + 1] = _trapezoid_weights(k, h) if rule == TRAPEZOID else _simpson_any(k, h)
    return P


@dataclass(frozen=True, eq=False)
class QuadratureGrid:
    """Uniform tensor grid on ``box`` with a composite rule along each axis.

    Nodes are ordered lexicographically (last axis fastest), matching
    ``np.meshgrid(..., indexing="ij")``.
    """

    box: tuple
    counts: tuple
    rule: str = SIMPSON
    axes: list = field(init=False, repr=False)
    weights_1d: list = field(init=False, repr=False)
    prefix_1d: list = field(init=False, repr=False)
    nodes: np.ndarray = field(init=False, repr=False)
    index: np.ndarray = field(init=False, repr=False)
    weights: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        box = tuple((float(g), float(h)) for g, h in self.box)
        counts = tuple(int(n) for n in self.counts)
        if len(box) != len(counts) or not box:
            raise QuadratureError("box and counts must have the same positive length")
        for g, h in box:
            if not g < h:
                raise QuadratureError(f"empty axis [{g}, {h}]")
        object.__setattr__(self, "box", box)
        object.__setattr__(self, "counts", counts)
        axes = [np.linspace(g, h, n) for (g, h), n in zip(box, counts)]
        w1 = [axis_weights(n, h - g, self.rule) for (g, h), n in zip(box, counts)]
        p1 = [prefix_weights(n, h - g, self.rule) for (g, h), n in zip(box, counts)]
        mesh = np.meshgrid(*axes, indexing="ij")
        nodes = np.stack([m.reshape(-1) for m in mesh], axis=-1)
        imesh = np.meshgrid(*[np.arange(n) for n in counts], indexing="ij")
        index = np.stack([m.reshape(-1) for m in imesh], axis=-1)
        weights = w1[0]
        for w in w1[1:]:
            weights = np.kron(weights, w)
        for arr in (nodes, index, weights, *w1, *p1):
            arr.setflags(write=False)
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "weights_1d", w1)
        object.__setattr__(self, "prefix_1d", p1)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "index", index)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def uniform(cls, box: Sequence, nodes_per_axis: int, rule: str = SIMPSON) -> "QuadratureGrid":
        return cls(tuple(box), (nodes_per_axis,) * len(box), rule)

    @property
    def m(self) -> int:
        return len(self.box)

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def measure(self) -> float:
        return math.prod(h - g for g, h in self.box)

    @property
    def spacing(self) -> float:
        return max((h - g) / (n - 1) for (g, h), n in zip(self.box, self.counts))

    def volterra_rows(self, rows) -> np.ndarray:
        """Weights for integrating over ``[g, t]`` for each target node in ``rows``.

        Returns an array of shape ``(len(rows), size)``.
        """
        rows = np.asarray(rows)
        out = np.ones((rows.shape[0], self.size))
        for a in range(self.m):
            P = self.prefix_1d[a]
            out *= P[self.index[rows, a][:, None], self.index[None, :, a]]
        return out

    def sample(self, f) -> np.ndarray:
        """Evaluate ``f`` (taking an ``(N, m)`` coordinate array) on the nodes."""
        return np.asarray(f(self.nodes), dtype=float).reshape(self.size)


def quadrature(grid: QuadratureGrid, values) -> float:
    """Integral of a grid function; products are summed in node order with ``math.fsum``."""
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.shape[0] != grid.size:
        raise QuadratureError(f"{values.shape[0]} values for a grid of {grid.size} nodes")
    return math.fsum((grid.weights * values).tolist())
