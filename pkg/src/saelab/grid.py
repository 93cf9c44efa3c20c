"""Uniform grids, grid functions and trapezoidal inner products.

A :class:`Grid` discretises a finite geometry with spacing ``h = (b - a)/N``.
Interval geometries keep both endpoints (``N + 1`` nodes); periodic ones drop
the right endpoint, which is identified with the left (``N`` nodes).
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from saelab.errors import ValidationError
from saelab.geometry import Interval, Periodic, TruncatedLine

# Coarsest grid accepted: three interior nodes, enough for every stencil.
MIN_CELLS = 4


@dataclass(frozen=True)
class Grid:
    geometry: Interval | TruncatedLine | Periodic
    N: int

    @property
    def a(self) -> float:
        return float(self.geometry.a)

    @property
    def b(self) -> float:
        return float(self.geometry.b)

    @property
    def periodic(self) -> bool:
        return isinstance(self.geometry, Periodic)

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.N

    @property
    def n_nodes(self) -> int:
        return self.N if self.periodic else self.N + 1

    @cached_property
    def nodes(self) -> np.ndarray:
        x = self.a + self.h * np.arange(self.n_nodes)
        x.setflags(write=False)
        return x

    @cached_property
    def weights(self) -> np.ndarray:
        """Trapezoid weights, one per node."""
        w = np.full(self.n_nodes, self.h)
        if not self.periodic:
            w[0] = w[-1] = 0.5 * self.h
        w.setflags(write=False)
        return w


def make_grid(geometry, N: int) -> Grid:
    """Build a uniform grid with ``N`` cells over ``geometry``.

    Raises
    ------
    ValidationError
        If ``N`` is not an integer of at least ``MIN_CELLS``.
    """
    if not isinstance(geometry, (Interval, TruncatedLine, Periodic)):
        raise ValidationError(f"cannot discretise geometry {geometry!r}")
    if isinstance(N, bool) or int(N) != N:
        raise ValidationError(f"node count must be an integer, got {N!r}")
    N = int(N)
    if N < MIN_CELLS:
        raise ValidationError(f"N={N} is too coarse for any stencil (need N >= {MIN_CELLS})")
    return Grid(geometry, N)


class GridFunction:
    """Complex samples of a state on a grid. Immutable."""

    __slots__ = ("grid", "values")

    def __init__(self, grid: Grid, values):
        v = np.array(values, dtype=complex)
        if v.shape != (grid.n_nodes,):
            raise ValidationError(
                f"expected {grid.n_nodes} values for this grid, got shape {v.shape}"
            )
        if not np.all(np.isfinite(v)):
            bad = int(np.flatnonzero(~np.isfinite(v))[0])
            raise ValidationError(f"non-finite value at node {bad}")
        v.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", v)

    def __setattr__(self, name, value):
        raise AttributeError("GridFunction is immutable")

    def __repr__(self):
        return f"GridFunction(n_nodes={self.grid.n_nodes}, h={self.grid.h:.3g})"

    def _check(self, other: GridFunction):
        if other.grid != self.grid:
            raise ValidationError("grid functions live on different grids")

    def __add__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: GridFunction) -> GridFunction:
        self._check(other)
        return GridFunction(self.grid, self.values - other.values)

    def __mul__(self, alpha) -> GridFunction:
        return GridFunction(self.grid, complex(alpha) * self.values)

    __rmul__ = __mul__

    def conj(self) -> GridFunction:
        return GridFunction(self.grid, self.values.conj())


def sample(witness, grid: Grid) -> GridFunction:
    """Evaluate a witness at every node of ``grid``."""
    return GridFunction(grid, evaluate_finite(witness.f, grid.nodes, witness.label))


def evaluate_finite(fn, x: np.ndarray, label: str = "") -> np.ndarray:
    with np.errstate(all="ignore"):
        v = np.asarray(fn(x), dtype=complex)
    v = np.broadcast_to(v, x.shape).copy()
    bad = ~np.isfinite(v)
    if bad.any():
        j = int(np.flatnonzero(bad)[0])
        name = f" {label!r}" if label else ""
        raise ValidationError(f"witness{name} is not finite at node {j} (x = {x[j]!r})")
    return v


def inner(f: GridFunction, g: GridFunction) -> complex:
    """Trapezoidal ``<f, g>``, conjugate-linear in ``f``."""
    if f.grid != g.grid:
        raise ValidationError("inner product of grid functions on different grids")
    return complex(np.sum(f.grid.weights * f.values.conj() * g.values))


def norm(f: GridFunction) -> float:
    return float(np.sqrt(max(inner(f, f).real, 0.0)))


def trapezoid(values: np.ndarray, h: float, slopes: tuple[complex, complex] | None = None) -> complex:
    """Trapezoid rule over uniformly spaced samples including both endpoints.

    If ``slopes = (g'(a), g'(b))`` of the integrand are known, the leading
    Euler-Maclaurin term ``-h^2/12 (g'(b) - g'(a))`` is subtracted, which
    lifts the rule to O(h^4) for smooth integrands.
    """
    v = np.asarray(values)
    total = h * (v.sum() - 0.5 * (v[0] + v[-1]))
    if slopes is not None:
        total -= h * h / 12.0 * (slopes[1] - slopes[0])
    return complex(total)
