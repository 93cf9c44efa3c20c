"""Operators as (formal action, declared domain) pairs.

Finite-difference assembly over the active nodes of a grid, exact boundary
forms from integration by parts, expectations by quadrature of symbolic
derivatives, analytic point spectra under boundary conditions, and
deficiency counts from the characteristic roots of ``A psi = +-i psi``.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from saelab.actions import BoundaryCondition, FormalAction
from saelab.errors import ValidationError
from saelab.geometry import HalfLine, Interval, Line, Periodic, TruncatedLine
from saelab.grid import Grid, GridFunction, evaluate_finite, make_grid, trapezoid
from saelab import witness as W

HERMITIAN_RTOL = 1e-12


# ---------------------------------------------------------------------------
# assembled matrices
# ---------------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    """Dense matrix of an operator over the active nodes of ``grid``.

    ``active`` lists the grid-node indices carried by the matrix: interior
    nodes for Dirichlet data, the ``N`` identified nodes for (quasi-)periodic
    data, every node for the maximal domain.
    """

    grid: Grid
    action: FormalAction
    bc: BoundaryCondition
    entries: np.ndarray
    hermitian_flag: bool
    active: np.ndarray = field(repr=False)
    label: str = ""

    @property
    def name(self) -> str:
        return self.label or f"{self.action} / {self.bc}"

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @property
    def weights(self) -> np.ndarray:
        """Quadrature weights of the active nodes."""
        if self.bc.kind == "maximal":
            return np.asarray(self.grid.weights)
        return np.full(self.dim, self.grid.h)

    def restrict(self, psi: GridFunction) -> np.ndarray:
        if psi.grid != self.grid:
            raise ValidationError("grid function does not live on the operator's grid")
        return np.array(psi.values[self.active])

    def extend(self, vec) -> GridFunction:
        """Grid function whose active values are ``vec``; inactive nodes follow the bc."""
        vec = np.asarray(vec, dtype=complex)
        if vec.shape != (self.dim,):
            raise ValidationError(f"expected {self.dim} active values, got shape {vec.shape}")
        full = np.zeros(self.grid.n_nodes, dtype=complex)
        full[self.active] = vec
        if self.bc.wraps and not self.grid.periodic:
            full[-1] = self.bc.phase * vec[0]
        return GridFunction(self.grid, full)

    def apply(self, psi: GridFunction) -> GridFunction:
        return self.extend(self.entries @ self.restrict(psi))

    def hermiticity_residual(self) -> float:
        E = self.entries
        return float(np.max(np.abs(E - E.conj().T), initial=0.0))


def _active_nodes(grid: Grid, bc: BoundaryCondition) -> np.ndarray:
    if bc.kind == "dirichlet":
        if grid.periodic:
            raise ValidationError("Dirichlet data need an interval grid, not a periodic one")
        return np.arange(1, grid.N)
    if bc.wraps:
        return np.arange(grid.N)
    if grid.periodic:
        raise ValidationError("the maximal domain needs an interval grid")
    return np.arange(grid.n_nodes)


def assemble(action: FormalAction, bc: BoundaryCondition, grid: Grid) -> OperatorMatrix:
    """Finite-difference matrix of ``action`` restricted by ``bc``.

    Raises
    ------
    ValidationError
        For Momentum with Dirichlet data and for every Maximal pairing
        other than Position.
    """
    if bc.kind == "maximal" and action.kind != "position":
        raise ValidationError(
            f"{action} on the maximal domain is not hermitian, so there is no Hermitian matrix "
            "to assemble; use boundary_form / hermiticity_defect to exhibit the failure"
        )
    if action.kind == "momentum" and bc.kind == "dirichlet":
        raise ValidationError(
            "momentum with Dirichlet data at both ends is hermitian but not self-adjoint "
            "(it has no eigenvectors at all); a Hermitian matrix cannot model it. "
            "Use point_spectrum_bc or deficiency_indices for this pairing"
        )
    idx = _active_nodes(grid, bc)
    n, h = len(idx), grid.h
    x = grid.nodes[idx]
    E = np.zeros((n, n), dtype=complex)
    k = np.arange(n - 1)
    phase = bc.phase
    if action.kind == "position":
        E[np.arange(n), np.arange(n)] = x
    elif action.kind == "momentum":
        E[k, k + 1] = -1j / (2 * h)
        E[k + 1, k] = 1j / (2 * h)
        E[n - 1, 0] += -1j * phase / (2 * h)
        E[0, n - 1] += 1j * np.conj(phase) / (2 * h)
    else:
        E[np.arange(n), np.arange(n)] = 2.0 / h**2
        E[k, k + 1] = E[k + 1, k] = -1.0 / h**2
        if bc.wraps:
            E[n - 1, 0] += -phase / h**2
            E[0, n - 1] += -np.conj(phase) / h**2
        if action.kind == "schrodinger":
            E[np.arange(n), np.arange(n)] += action.potential_values(x)
    E.setflags(write=False)
    idx.setflags(write=False)
    defect = float(np.max(np.abs(E - E.conj().T), initial=0.0))
    herm = defect <= HERMITIAN_RTOL * max(float(np.max(np.abs(E))), 1e-300)
    return OperatorMatrix(grid, action, bc, E, herm, idx)


# ---------------------------------------------------------------------------
# boundary forms and expectations
# ---------------------------------------------------------------------------

def _endpoints(interval) -> tuple[float, float]:
    if isinstance(interval, (Interval, TruncatedLine, Periodic)):
        return float(interval.a), float(interval.b)
    a, b = interval
    Interval(a, b)
    return float(a), float(b)


def _at(fn, x: float) -> complex:
    with np.errstate(all="ignore"):
        v = complex(np.asarray(fn(np.array([x])), dtype=complex).reshape(-1)[0])
    if not np.isfinite(v):
        raise ValidationError(f"witness is not finite at the endpoint x = {x}")
    return v


def boundary_form(action: FormalAction, psi: W.SymbolicWitness, phi: W.SymbolicWitness, interval) -> complex:
    """``<psi, A phi> - <A psi, phi>`` as the exact endpoint term.

    Momentum gives ``-i [conj(psi) phi]_a^b``; Laplacian and Schrodinger give
    ``[conj(psi') phi - conj(psi) phi']_a^b`` (real potentials cancel).
    """
    a, b = _endpoints(interval)
    if action.kind == "position":
        warnings.warn("the position boundary form vanishes identically", stacklevel=2)
        return 0j
    if action.kind == "momentum":
        return complex(-1j * (np.conj(_at(psi.f, b)) * _at(phi.f, b) - np.conj(_at(psi.f, a)) * _at(phi.f, a)))
    for w in (psi, phi):
        if not w.has_derivative(1):
            raise ValidationError(f"{action} boundary form needs first derivatives")

    def term(x):
        return np.conj(_at(psi.df, x)) * _at(phi.f, x) - np.conj(_at(psi.f, x)) * _at(phi.df, x)

    return complex(term(b) - term(a))


def _endpoint_slope(g, x0: float, direction: float, delta: float) -> complex:
    # second-order one-sided difference pointing into the interval
    pts = x0 + direction * delta * np.arange(3)
    v = np.asarray(g(pts), dtype=complex)
    return complex(direction * (-3 * v[0] + 4 * v[1] - v[2]) / (2 * delta))


def expectation(action: FormalAction, psi: W.SymbolicWitness, interval, N: int = 2000,
                endpoint_correction: bool = True) -> complex:
    """Trapezoid value of ``integral conj(psi) (A psi)`` on ``N`` cells.

    The integrand is built from the witness's exact derivatives. With
    ``endpoint_correction`` the leading Euler-Maclaurin term is removed, the
    integrand slopes at the endpoints being taken from the symbolic
    integrand itself.
    """
    a, b = _endpoints(interval)
    grid = make_grid(Interval(a, b), N)
    Apsi = action.apply(psi)

    def g(x):
        return np.conj(psi.f(x)) * Apsi(x)

    vals = evaluate_finite(g, grid.nodes, psi.label)
    slopes = None
    if endpoint_correction:
        delta = 1e-4 * (b - a)
        slopes = (_endpoint_slope(g, a, 1.0, delta), _endpoint_slope(g, b, -1.0, delta))
    return trapezoid(vals, grid.h, slopes)


def hermiticity_defect(action: FormalAction, bc: BoundaryCondition, trials, interval) -> float:
    """Largest ``|boundary_form|`` over ordered pairs (including diagonal) of trials.

    ``bc`` names the domain the trials are meant to sample; it is recorded,
    not enforced, so that violations can be exhibited deliberately.
    """
    trials = list(trials)
    if len(trials) < 1:
        raise ValidationError("hermiticity_defect needs a nonempty trial set")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return max(abs(boundary_form(action, p, q, interval))
                   for p, q in itertools.product(trials, repeat=2))


# ---------------------------------------------------------------------------
# analytic point spectra and deficiency indices
# ---------------------------------------------------------------------------

def point_spectrum_bc(action: FormalAction, bc: BoundaryCondition, interval, index_range):
    """Closed-form eigenpairs of a constant-coefficient action under ``bc``.

    Returns a list of ``(eigenvalue, SymbolicWitness)`` sorted by eigenvalue,
    one entry per eigenfunction, so degenerate levels appear repeatedly.
    For (quasi-)periodic data momentum index ``n`` gives ``(theta + 2 pi n)/L``;
    the Laplacian lists both branches ``(theta +- 2 pi n)/L``.
    """
    if action.kind not in ("momentum", "laplacian"):
        raise ValidationError(f"{action} has no closed-form point spectrum here")
    if bc.kind == "maximal":
        raise ValidationError("every complex number is an eigenvalue on the maximal domain")
    a, b = _endpoints(interval)
    L = b - a
    out = []
    if bc.kind == "dirichlet":
        if action.kind == "momentum":
            return []
        for n in index_range:
            if n >= 1:
                out.append(((n * np.pi / L) ** 2, W.sine_mode(n, a, b)))
        return sorted(out, key=lambda p: p[0])
    theta = bc.theta
    seen = set()
    for n in index_range:
        branches = [n] if action.kind == "momentum" else [n, -n]
        for m in branches:
            if m in seen:
                continue
            seen.add(m)
            k = (theta + 2 * np.pi * m) / L
            lam = k if action.kind == "momentum" else k * k
            out.append((float(lam), W.plane_wave(k, a, b)))
    return sorted(out, key=lambda p: p[0])


@dataclass(frozen=True)
class DeficiencyReport:
    n_plus: int
    n_minus: int
    witnesses: tuple[dict, ...]


def _characteristic_roots(action: FormalAction, sign: int) -> np.ndarray:
    """Exponents ``mu`` with ``e^{mu x}`` solving ``A psi = sign * i * psi``."""
    if action.kind == "momentum":
        # -i mu = sign*i  ->  mu = -sign
        return np.array([-float(sign) + 0j])
    # -mu^2 = sign*i  ->  mu^2 = -sign*i
    r = np.sqrt(complex(0, -sign))
    return np.array([r, -r])


def deficiency_indices(action: FormalAction, geometry) -> DeficiencyReport:
    """Dimensions ``n_pm = dim ker(A^dagger -+ i)`` on a finite interval, half-line or line."""
    if action.kind not in ("momentum", "laplacian"):
        raise ValidationError(f"deficiency analysis is only provided for momentum and Laplacian, not {action}")
    if isinstance(geometry, Periodic):
        raise ValidationError("deficiency indices are defined here for intervals, half-line and line")
    finite = isinstance(geometry, (Interval, TruncatedLine))
    if not (finite or isinstance(geometry, (HalfLine, Line))):
        raise ValidationError(f"unsupported geometry {geometry!r}")
    counts, wits = {}, []
    for sign in (+1, -1):
        roots = _characteristic_roots(action, sign)
        c = 0
        for mu in roots:
            if finite:
                ok = True
            elif isinstance(geometry, HalfLine):
                ok = mu.real < 0
            else:
                ok = False
            c += int(ok)
            wits.append({"sign": "+" if sign > 0 else "-", "mu": complex(mu), "square_integrable": bool(ok)})
        counts[sign] = c
    # analytic: no combination of exponentials grows slower on the full line
    return DeficiencyReport(counts[1], counts[-1], tuple(wits))


# ---------------------------------------------------------------------------
# matrix elements in a non-invariant basis
# ---------------------------------------------------------------------------

def _cos_basis(n: int):
    return W.cosine_mode(n, np.sqrt(2.0))


def momentum_matrix_element(n: int, m: int, N: int = 4000) -> complex:
    """``p_{n,m} = -i integral_0^1 psi_n psi_m'`` with ``psi_n = sqrt(2) cos(pi n x)``."""
    pn, pm = _cos_basis(n), _cos_basis(m)
    grid = make_grid(Interval(0.0, 1.0), N)
    x = grid.nodes
    g = pn.f(x) * pm.df(x)
    ends = np.array([0.0, 1.0])
    slope = pn.df(ends) * pm.df(ends) + pn.f(ends) * pm.d2f(ends)
    return -1j * trapezoid(g, grid.h, (complex(slope[0]), complex(slope[1])))


def matrix_element_defect(n: int, m: int, theta: float = 0.0, N: int = 4000) -> complex:
    """``conj(p_{n,m}) - p_{m,n}`` by quadrature.

    ``theta`` labels the quasi-periodic realization the question is posed
    in; the cosine basis does not depend on it, and neither does the result.
    """
    if n < 0 or m < 0:
        raise ValidationError("indices must be nonnegative")
    if not np.isfinite(theta):
        raise ValidationError("theta must be finite")
    return complex(np.conj(momentum_matrix_element(n, m, N)) - momentum_matrix_element(m, n, N))


def matrix_element_defect_closed_form(n: int, m: int) -> complex:
    """``i (psi_m(1) psi_n(1) - psi_m(0) psi_n(0))``."""
    pn, pm = _cos_basis(n), _cos_basis(m)
    one, zero = np.array([1.0]), np.array([0.0])
    return complex(1j * (pm.f(one) * pn.f(one) - pm.f(zero) * pn.f(zero))[0])
