"""Grid-refinement probes for operator- and form-domain membership.

A witness lies outside the operator domain when ``||A psi||`` computed on
finer and finer grids keeps growing; it lies in the form domain when the
energy ``integral |psi'|^2`` settles. Both are read off a sequence of
trapezoid sums of the witness's exact derivatives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from saelab.actions import FormalAction
from saelab.config import DEFAULTS, RefinementThresholds
from saelab.errors import ValidationError
from saelab.geometry import Interval

CONVERGENT = "CONVERGENT"
DIVERGENT = "DIVERGENT"
INCONCLUSIVE = "INCONCLUSIVE"


@dataclass(frozen=True)
class DivergenceReport:
    """Sequence of norms (or energies) over a refinement ladder.

    Attributes
    ----------
    N_list : tuple of int
    values : tuple of float
        ``||A psi||`` for ``quantity="action"``, ``integral |psi'|^2`` for
        ``quantity="form"``.
    shifted : tuple of bool
        Whether each grid was offset by ``h/2`` to avoid a singular node.
    verdict : str
    growth : float
        ``values[-1] / values[0]``.
    """

    N_list: tuple[int, ...]
    values: tuple[float, ...]
    shifted: tuple[bool, ...]
    verdict: str
    growth: float
    quantity: str


def _adaptive_samples(fn, a: float, b: float, N: int, singular=()):
    """Samples of ``fn`` on ``N`` cells of ``[a, b]``.

    The grid is translated so that the first declared singular point sits at
    a cell midpoint; otherwise it is shifted by ``h/2`` only if a node turns
    out to be singular.
    """
    h = (b - a) / N
    x = a + h * np.arange(N + 1)
    inside = [s for s in singular if a <= s <= b]
    if inside:
        frac = ((inside[0] - a) / h) % 1.0
        x = x + (frac - 0.5) * h
    with np.errstate(all="ignore"):
        v = np.asarray(fn(x), dtype=complex)
    if np.all(np.isfinite(v)):
        return v, h, bool(inside)
    x = x + 0.5 * h
    with np.errstate(all="ignore"):
        v = np.asarray(fn(x), dtype=complex)
    if not np.all(np.isfinite(v)):
        raise ValidationError("witness is singular at nodes of both the plain and the shifted grid")
    return v, h, True


def _classify(values: np.ndarray, squared: np.ndarray, th: RefinementThresholds) -> str:
    first, last3 = values[0], values[-3:]
    increasing = np.all(np.diff(last3) > 0)
    if first > 0 and values.max() > th.growth_factor * first and increasing:
        return DIVERGENT
    # slow (e.g. logarithmic) blow-up: increments that fail to shrink
    inc = np.diff(squared)
    if np.all(inc > 0) and np.all(inc[1:] >= th.increment_floor * inc[:-1]):
        return DIVERGENT
    scale = abs(last3[-1])
    if scale == 0 or np.max(np.abs(last3 - last3[-1])) <= th.plateau_rtol * scale:
        return CONVERGENT
    return INCONCLUSIVE


def refinement_probe(witness, action: FormalAction, N_list, geometry=Interval(-6.0, 6.0),
                     quantity: str = "action",
                     thresholds: RefinementThresholds | None = None) -> DivergenceReport:
    """Tabulate ``||A psi||`` (or the kinetic energy) over increasing grid sizes.

    Parameters
    ----------
    witness : SymbolicWitness
    action : FormalAction
        Ignored for ``quantity="form"``, which always evaluates
        ``integral |psi'|^2``.
    N_list : sequence of int
        Strictly increasing, at least three entries. The slow-divergence
        rule assumes a roughly geometric ladder.
    geometry : Interval or TruncatedLine
    quantity : {"action", "form"}
    """
    th = thresholds or DEFAULTS.refinement
    Ns = [int(n) for n in N_list]
    if len(Ns) < 3 or any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise ValidationError("N_list must be strictly increasing with at least three entries")
    if quantity == "action":
        fn = action.apply(witness)
    elif quantity == "form":
        if not witness.has_derivative(1):
            raise ValidationError("form energy needs the first derivative")
        fn = witness.df
    else:
        raise ValidationError(f"quantity must be 'action' or 'form', got {quantity!r}")
    a, b = float(geometry.a), float(geometry.b)
    vals, shifts = [], []
    for N in Ns:
        v, h, shifted = _adaptive_samples(fn, a, b, N, witness.singular)
        w = np.abs(v) ** 2
        total = h * (w.sum() - 0.5 * (w[0] + w[-1]))
        vals.append(float(np.sqrt(total)) if quantity == "action" else float(total))
        shifts.append(shifted)
    values = np.array(vals)
    squared = values**2 if quantity == "action" else values
    verdict = _classify(values, squared, th)
    growth = float(values[-1] / values[0]) if values[0] > 0 else float("inf")
    return DivergenceReport(tuple(Ns), tuple(vals), tuple(shifts), verdict, growth, quantity)
