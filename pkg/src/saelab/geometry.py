"""Spatial geometries.

Finite geometries can be discretised; ``HalfLine`` and ``Line`` exist only so
that analytic routines (deficiency counts) can talk about them.
"""

from __future__ import annotations

from dataclasses import dataclass

from saelab.errors import ValidationError


@dataclass(frozen=True)
class Interval:
    a: float
    b: float

    def __post_init__(self):
        if not (float(self.a) < float(self.b)):
            raise ValidationError(f"interval needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return float(self.b) - float(self.a)


@dataclass(frozen=True)
class TruncatedLine:
    """The real line cut to [-L, L]; behaves like an interval on a grid."""

    L: float = 12.0

    def __post_init__(self):
        if not self.L > 0:
            raise ValidationError(f"half-length must be positive, got {self.L}")

    @property
    def a(self) -> float:
        return -float(self.L)

    @property
    def b(self) -> float:
        return float(self.L)

    @property
    def length(self) -> float:
        return 2.0 * float(self.L)


@dataclass(frozen=True)
class Periodic:
    """A circle of circumference b - a; the point b is identified with a."""

    a: float = 0.0
    b: float = 1.0

    def __post_init__(self):
        if not (float(self.a) < float(self.b)):
            raise ValidationError(f"periodic cell needs a < b, got [{self.a}, {self.b}]")

    @property
    def length(self) -> float:
        return float(self.b) - float(self.a)


@dataclass(frozen=True)
class HalfLine:
    """[0, +inf)."""


@dataclass(frozen=True)
class Line:
    """(-inf, +inf)."""


FiniteGeometry = Interval | TruncatedLine | Periodic
