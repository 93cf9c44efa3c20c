"""Numerical laboratory for 1D quantum operators, their domains and dynamics.

The package turns the difference between a *hermitian* formal action and a
*self-adjoint* operator (formal action plus declared domain) into quantities
one can compute: boundary forms, point spectra under boundary conditions,
deficiency counts, unitary propagators, quadratic-form probes and
finite-dimensional commutator experiments.
"""

from saelab.errors import NumericalError, SaeError, ValidationError
from saelab.grid import Grid, GridFunction, inner, make_grid, norm, sample
from saelab.geometry import HalfLine, Interval, Line, Periodic, TruncatedLine
from saelab.witness import SymbolicWitness

__all__ = [
    "Grid",
    "GridFunction",
    "HalfLine",
    "Interval",
    "Line",
    "NumericalError",
    "Periodic",
    "SaeError",
    "SymbolicWitness",
    "TruncatedLine",
    "ValidationError",
    "inner",
    "make_grid",
    "norm",
    "sample",
]

__version__ = "0.1.0"
