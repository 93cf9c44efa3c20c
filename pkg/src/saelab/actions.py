"""Formal actions (no domain attached) and boundary-condition declarations."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from saelab.errors import ValidationError
from saelab.witness import SymbolicWitness

_ORDERS = {"position": 0, "momentum": 1, "laplacian": 2, "schrodinger": 2}


@dataclass(frozen=True)
class FormalAction:
    """The recipe ``psi -> A psi``.

    ``kind`` is one of ``position``, ``momentum``, ``laplacian`` or
    ``schrodinger``; the last carries a real potential witness.
    """

    kind: str
    potential: SymbolicWitness | None = None

    def __post_init__(self):
        if self.kind not in _ORDERS:
            raise ValidationError(f"unknown action {self.kind!r}; expected one of {sorted(_ORDERS)}")
        if (self.kind == "schrodinger") != (self.potential is not None):
            raise ValidationError("a potential is required for, and only for, the Schrodinger action")

    @property
    def order(self) -> int:
        """Order of the differential expression."""
        return _ORDERS[self.kind]

    @classmethod
    def schrodinger(cls, potential: SymbolicWitness) -> FormalAction:
        return cls("schrodinger", potential)

    def potential_values(self, x: np.ndarray) -> np.ndarray:
        """Real potential on ``x``; rejects a visibly complex potential."""
        if self.potential is None:
            return np.zeros_like(np.asarray(x, dtype=float))
        with np.errstate(all="ignore"):
            v = np.asarray(self.potential.f(np.asarray(x, dtype=float)), dtype=complex)
        v = np.broadcast_to(v, np.shape(x))
        if not np.all(np.isfinite(v)):
            raise ValidationError("potential is not finite on the grid")
        if np.max(np.abs(v.imag), initial=0.0) > 1e-12 * max(1.0, np.max(np.abs(v.real), initial=0.0)):
            raise ValidationError("Schrodinger potential must be real-valued at every node")
        return v.real.copy()

    def apply(self, psi: SymbolicWitness):
        """Evaluator of ``A psi`` built from the witness's exact derivatives."""
        need = self.order
        if not psi.has_derivative(need):
            raise ValidationError(
                f"{self.kind} needs derivative of order {need}, which {psi.label or 'the witness'} lacks"
            )
        if self.kind == "position":
            return lambda x: np.asarray(x, dtype=float) * psi.f(x)
        if self.kind == "momentum":
            return lambda x: -1j * psi.df(x)
        if self.kind == "laplacian":
            return lambda x: -psi.d2f(x)
        V = self.potential
        return lambda x: -psi.d2f(x) + V.f(x) * psi.f(x)

    def __str__(self):
        return self.kind if self.potential is None else f"schrodinger[{self.potential.label}]"


POSITION = FormalAction("position")
MOMENTUM = FormalAction("momentum")
LAPLACIAN = FormalAction("laplacian")


@dataclass(frozen=True)
class BoundaryCondition:
    """Domain declaration: ``dirichlet``, ``periodic``, ``quasi_periodic`` or ``maximal``.

    Quasi-periodic data ``psi(b) = exp(i theta) psi(a)`` store ``theta`` reduced
    to ``[0, 2 pi)``; periodic is the ``theta = 0`` member.
    """

    kind: str
    theta: float = 0.0

    def __post_init__(self):
        if self.kind not in ("dirichlet", "periodic", "quasi_periodic", "maximal"):
            raise ValidationError(f"unknown boundary condition {self.kind!r}")
        if not math.isfinite(self.theta):
            raise ValidationError("theta must be finite")
        if self.kind != "quasi_periodic" and self.theta != 0.0:
            raise ValidationError("theta is only meaningful for quasi-periodic conditions")
        reduced = math.fmod(self.theta, 2 * math.pi)
        if reduced < 0:
            reduced += 2 * math.pi
        if reduced >= 2 * math.pi:
            reduced = 0.0
        object.__setattr__(self, "theta", reduced)

    @classmethod
    def quasi_periodic(cls, theta: float) -> BoundaryCondition:
        return cls("quasi_periodic", float(theta))

    @property
    def wraps(self) -> bool:
        return self.kind in ("periodic", "quasi_periodic")

    @property
    def phase(self) -> complex:
        return complex(np.exp(1j * self.theta))

    def __str__(self):
        return f"quasi_periodic({self.theta:.12g})" if self.kind == "quasi_periodic" else self.kind


DIRICHLET = BoundaryCondition("dirichlet")
PERIODIC = BoundaryCondition("periodic")
MAXIMAL = BoundaryCondition("maximal")


def parse_action(name: str, potential: SymbolicWitness | None = None) -> FormalAction:
    name = name.lower().replace("-", "_")
    if name == "schrodinger":
        if potential is None:
            raise ValidationError("the Schrodinger action needs a potential")
        return FormalAction.schrodinger(potential)
    return FormalAction(name)


def parse_bc(name: str, theta: float = 0.0) -> BoundaryCondition:
    name = name.lower().replace("-", "_")
    if name in ("quasi_periodic", "quasiperiodic"):
        return BoundaryCondition.quasi_periodic(theta)
    return BoundaryCondition(name)
