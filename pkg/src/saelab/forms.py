"""Quadratic forms with their own domains.

Forms are evaluated by trapezoid quadrature of exact witness derivatives
(with the Euler-Maclaurin endpoint term where the integrand does not vanish
at the ends), or exactly for step functions. The probes read closedness and
lower semicontinuity off scripted sequences, and ``operator_from_form``
builds the operator a discrete Dirichlet energy represents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import erfc

from saelab.actions import DIRICHLET, LAPLACIAN, BoundaryCondition
from saelab.config import DEFAULTS, FormThresholds
from saelab.errors import ValidationError
from saelab.geometry import Interval
from saelab.grid import Grid, GridFunction, evaluate_finite, trapezoid
from saelab.operators import OperatorMatrix, assemble
from saelab.witness import ReallySimple, SymbolicWitness

KINDS = ("dirichlet_energy", "position", "delta_at_zero", "radial_coulomb", "x2")
LINE_KINDS = ("position", "delta_at_zero", "x2")

# default quadrature resolution per unit length on the truncated line
LINE_CELLS_PER_UNIT = 10_000

NOT_CLOSED = "NOT_CLOSED"
CLOSED_CONSISTENT = "CLOSED_CONSISTENT"
INCONCLUSIVE = "INCONCLUSIVE"
VIOLATED = "VIOLATED"
SATISFIED = "SATISFIED"


@dataclass(frozen=True)
class QuadraticFormSpec:
    """A quadratic form together with the space it lives on.

    ``dirichlet_energy`` lives on [0, 1]; ``radial_coulomb`` on [0, 60/Z];
    the line forms (``position``, ``delta_at_zero``, ``x2``) on the truncated
    line [-L, L]. ``shift`` adds ``shift * ||psi||^2``.
    """

    kind: str
    Z: float | None = None
    lower_bound: float | None = None
    shift: float = 0.0
    L: float = DEFAULTS.line_half_length

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValidationError(f"unknown form {self.kind!r}; expected one of {KINDS}")
        if self.kind == "radial_coulomb":
            if self.Z is None or not self.Z > 0:
                raise ValidationError("RadialCoulomb needs a charge Z > 0")
        elif self.Z is not None:
            raise ValidationError("Z only applies to RadialCoulomb")

    @property
    def interval(self) -> tuple[float, float]:
        if self.kind == "dirichlet_energy":
            return 0.0, 1.0
        if self.kind == "radial_coulomb":
            return 0.0, 60.0 / self.Z
        return -float(self.L), float(self.L)

    def default_cells(self) -> int:
        a, b = self.interval
        if self.kind == "dirichlet_energy":
            return 2000
        if self.kind == "radial_coulomb":
            return 30_000
        return int(round(LINE_CELLS_PER_UNIT * (b - a)))

    def shifted(self, lam: float) -> QuadraticFormSpec:
        return QuadraticFormSpec(self.kind, self.Z, None, self.shift + float(lam), self.L)


def dirichlet_energy() -> QuadraticFormSpec:
    return QuadraticFormSpec("dirichlet_energy")


def radial_coulomb(Z: float) -> QuadraticFormSpec:
    return QuadraticFormSpec("radial_coulomb", Z=float(Z))


def position_form() -> QuadraticFormSpec:
    return QuadraticFormSpec("position")


def delta_at_zero() -> QuadraticFormSpec:
    return QuadraticFormSpec("delta_at_zero")


def x2_form() -> QuadraticFormSpec:
    return QuadraticFormSpec("x2")


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _point(fn, x0: float) -> complex:
    with np.errstate(all="ignore"):
        v = complex(np.asarray(fn(np.array([x0])), dtype=complex).reshape(-1)[0])
    if not np.isfinite(v):
        raise ValidationError(f"witness is undefined at x = {x0}")
    return v


def _integral(g: Callable, a: float, b: float, N: int, dg: Callable | None = None,
              label: str = "") -> complex:
    h = (b - a) / N
    x = a + h * np.arange(N + 1)
    vals = evaluate_finite(g, x, label)
    slopes = None
    if dg is not None:
        slopes = (_point(dg, a), _point(dg, b))
    return trapezoid(vals, h, slopes)


def _check_domain(form: QuadraticFormSpec, psi: SymbolicWitness):
    if form.kind in ("dirichlet_energy", "radial_coulomb") and not psi.has_derivative(1):
        raise ValidationError(f"{form.kind} needs the first derivative of {psi.label or 'the witness'}")
    if form.kind == "dirichlet_energy":
        ends = [abs(_point(psi.f, 0.0)), abs(_point(psi.f, 1.0))]
        if max(ends) > 1e-10:
            raise ValidationError(f"witness {psi.label} violates the Dirichlet data (|psi(0)|, |psi(1)|) = {ends}")
    if form.kind == "radial_coulomb" and abs(_point(psi.f, 0.0)) > 1e-12:
        raise ValidationError("RadialCoulomb needs u(0) = 0")


def sesquilinear(form: QuadraticFormSpec, psi, phi, N: int | None = None) -> complex:
    """``E[psi, phi]``, conjugate-linear in ``psi``."""
    if isinstance(psi, ReallySimple) or isinstance(phi, ReallySimple):
        if psi is phi:
            return complex(evaluate(form, psi))
        raise ValidationError("sesquilinear evaluation of step functions is only provided on the diagonal")
    for w in (psi, phi):
        _check_domain(form, w)
    a, b = form.interval
    N = N or form.default_cells()
    shift = form.shift
    if form.kind == "delta_at_zero":
        val = np.conj(_point(psi.f, 0.0)) * _point(phi.f, 0.0)
        if shift:
            val += shift * _integral(lambda x: np.conj(psi.f(x)) * phi.f(x), a, b, N, label=psi.label)
        return complex(val)
    if form.kind == "dirichlet_energy":
        g = lambda x: np.conj(psi.df(x)) * phi.df(x)
        dg = None
        if psi.d2f is not None and phi.d2f is not None:
            dg = lambda x: np.conj(psi.d2f(x)) * phi.df(x) + np.conj(psi.df(x)) * phi.d2f(x)
        val = _integral(g, a, b, N, dg, psi.label)
    elif form.kind == "radial_coulomb":
        Z = form.Z

        def g(r):
            r = np.asarray(r, dtype=float)
            with np.errstate(all="ignore"):
                pot = np.where(r > 0, np.conj(psi.f(r)) * phi.f(r) / np.where(r > 0, r, 1.0), 0.0)
            return np.conj(psi.df(r)) * phi.df(r) - Z * pot

        dg = None
        if psi.d2f is not None and phi.d2f is not None:
            def dg(r):
                r = np.asarray(r, dtype=float)
                kin = np.conj(psi.d2f(r)) * phi.df(r) + np.conj(psi.df(r)) * phi.d2f(r)
                u, v, du, dv = psi.f(r), phi.f(r), psi.df(r), phi.df(r)
                safe = np.where(r > 0, r, 1.0)
                d_pot = np.where(r > 0,
                                 ((np.conj(du) * v + np.conj(u) * dv) * r - np.conj(u) * v) / safe**2,
                                 np.conj(du) * dv)
                return kin - Z * d_pot

        val = _integral(g, a, b, N, dg, psi.label)
    else:
        power = 1 if form.kind == "position" else 2
        g = lambda x: np.asarray(x, dtype=float) ** power * np.conj(psi.f(x)) * phi.f(x)
        val = _integral(g, a, b, N, None, psi.label)
    if shift:
        val += shift * _integral(lambda x: np.conj(psi.f(x)) * phi.f(x), a, b, N, label=psi.label)
    return complex(val)


def l2_norm_sq(form: QuadraticFormSpec, psi, N: int | None = None) -> float:
    """``||psi||^2`` on the form's space."""
    if isinstance(psi, ReallySimple):
        return psi.moment(0)
    a, b = form.interval
    return _integral(lambda x: np.abs(psi.f(x)) ** 2, a, b, N or form.default_cells(), label=psi.label).real


def evaluate(form: QuadraticFormSpec, psi, N: int | None = None) -> float:
    """``E[psi]``; exact for :class:`ReallySimple` step functions."""
    if isinstance(psi, ReallySimple):
        if form.kind == "position":
            val = psi.moment(1)
        elif form.kind == "x2":
            val = psi.moment(2)
        elif form.kind == "delta_at_zero":
            val = abs(complex(psi.f(np.array([0.0]))[0])) ** 2
        else:
            raise ValidationError(f"{form.kind} needs a weak derivative, which step functions lack")
        return float(val + form.shift * psi.moment(0)) if form.shift else float(val)
    val = sesquilinear(form, psi, psi, N)
    scale = max(1.0, abs(val.real))
    if abs(val.imag) > 1e-12 * scale * 10:
        raise ValidationError(f"form value has a non-negligible imaginary part {val.imag:.3g}")
    return float(val.real)


def polarised(form: QuadraticFormSpec, psi: SymbolicWitness, phi: SymbolicWitness, N: int | None = None) -> complex:
    """``E[psi, phi]`` from four quadratic evaluations.

    ``E[psi, phi] = 1/4 sum_k i^(-k) E[psi + i^k phi]``.
    """
    total = 0j
    for k in range(4):
        ik = 1j**k
        total += np.conj(ik) * evaluate(form, psi + ik * phi, N)
    return complex(total / 4)


# ---------------------------------------------------------------------------
# lower bounds and unboundedness
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LowerBoundReport:
    m: float
    passed: tuple[bool, ...]
    quotients: tuple[float, ...]
    margins: tuple[float, ...]
    min_quotient: float
    min_margin: float

    @property
    def all_pass(self) -> bool:
        return all(self.passed)


def lower_bound_check(form: QuadraticFormSpec, trials, m: float, N: int | None = None,
                      thresholds: FormThresholds | None = None) -> LowerBoundReport:
    """Check ``E[psi] >= m ||psi||^2`` on every trial.

    A trial passes when its Rayleigh-quotient margin ``E[psi]/||psi||^2 - m``
    is at least ``-rtol * max(1, |m|)``.
    """
    th = thresholds or DEFAULTS.forms
    trials = list(trials)
    if not trials:
        raise ValidationError("lower_bound_check needs at least one trial")
    quotients, margins, passed = [], [], []
    for psi in trials:
        n2 = l2_norm_sq(form, psi, N)
        if not n2 > 0:
            raise ValidationError(f"trial {getattr(psi, 'label', '')} has zero norm")
        q = evaluate(form, psi, N) / n2
        quotients.append(q)
        margins.append(q - m)
        passed.append(q - m >= -th.lower_bound_rtol * max(1.0, abs(m)))
    return LowerBoundReport(float(m), tuple(passed), tuple(quotients), tuple(margins),
                            min(quotients), min(margins))


def unboundedness_witness(form: QuadraticFormSpec, n: int) -> float:
    """Position-form value of the unit step on ``[-n-1, -n]``: exactly ``-(n + 1/2)``."""
    if form.kind != "position":
        raise ValidationError("unboundedness witnesses are provided for the position form")
    if n < 1:
        raise ValidationError("n must be at least 1")
    psi = ReallySimple.indicator(-n - 1, -n)
    val = evaluate(form, psi)
    assert psi.norm() == 1.0 and val <= -n
    return val


def random_dirichlet_trials(rng: np.random.Generator, count: int, degree: int = 4):
    """Polynomials times ``x(1-x)`` and polynomials times interior bumps, complex coefficients."""
    from saelab.witness import bump, polynomial

    out = []
    base = polynomial([0, 1, -1], label="x(1-x)")
    for k in range(count):
        coeffs = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
        p = polynomial(coeffs, label=f"p{k}")
        if k % 2 == 0:
            out.append(base * p)
        else:
            c = rng.uniform(0.2, 0.8)
            w = rng.uniform(0.05, min(c, 1 - c) - 1e-3)
            out.append(bump(c, w) * p)
    return out


def hydrogenic_trial(alpha: float) -> SymbolicWitness:
    """``u(r) = r exp(-alpha r)``; ``alpha = Z/2`` attains the RadialCoulomb bound."""
    from saelab.witness import polynomial

    e = SymbolicWitness(lambda r: np.exp(-alpha * r) + 0j, lambda r: -alpha * np.exp(-alpha * r) + 0j,
                        lambda r: alpha**2 * np.exp(-alpha * r) + 0j, label=f"exp(-{alpha:g} r)")
    return polynomial([0, 1], label="r") * e


# ---------------------------------------------------------------------------
# sequence probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SequenceScenario:
    label: str
    generator: Callable[[float], SymbolicWitness]
    limit: SymbolicWitness | None = None


@dataclass(frozen=True)
class ClosednessReport:
    verdict: str
    n_list: tuple
    l2_distance: tuple[float, ...]
    energies: tuple[float, ...]
    pair_energies: tuple[float, ...]
    limit_energy: float
    form_cauchy: bool
    l2_convergent: bool
    energy_convergent: bool


def _decays(dist: np.ndarray, ns: np.ndarray, slope_max: float) -> bool:
    tail = dist[-3:]
    if np.all(tail == 0):
        return True
    if np.any(np.diff(tail) > 0):
        return False
    pos = tail > 0
    if pos.sum() < 2:
        return True
    s = np.polyfit(np.log(ns[-3:][pos]), np.log(tail[pos]), 1)[0]
    return bool(s <= slope_max)


def _diff(u: SymbolicWitness, v: SymbolicWitness | None) -> SymbolicWitness:
    return u if v is None else u - v


def closedness_probe(form: QuadraticFormSpec, scenario: SequenceScenario, n_list, N: int | None = None,
                     thresholds: FormThresholds | None = None) -> ClosednessReport:
    """Tabulate L2 distance to the limit, E[psi_n] and E[psi_n - psi_next].

    NOT_CLOSED: form-Cauchy and L2-convergent, but the energies do not tend to
    the energy of the limit. CLOSED_CONSISTENT: all three agree.
    """
    th = thresholds or DEFAULTS.forms
    ns = list(n_list)
    if len(ns) < 4 or any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValidationError("n_list needs at least four ascending entries")
    try:
        seq = [scenario.generator(n) for n in ns]
    except Exception as exc:  # scenario code is user supplied
        raise ValidationError(f"scenario {scenario.label!r} failed to generate: {exc}") from exc
    lim = scenario.limit
    dist = np.array([math.sqrt(max(l2_norm_sq(form, _diff(s, lim), N), 0.0)) for s in seq])
    energies = np.array([evaluate(form, s, N) for s in seq])
    pairs = np.array([evaluate(form, a - b, N) for a, b in zip(seq, seq[1:])])
    lim_e = 0.0 if lim is None else evaluate(form, lim, N)
    cauchy = bool(np.all(np.abs(pairs[-2:]) < th.cauchy_tol))
    l2 = _decays(dist, np.array(ns, dtype=float), th.decay_slope)
    econv = bool(np.all(np.abs(energies[-2:] - lim_e) < th.coherence_tol))
    if cauchy and l2 and not econv:
        verdict = NOT_CLOSED
    elif cauchy and l2 and econv:
        verdict = CLOSED_CONSISTENT
    else:
        verdict = INCONCLUSIVE
    return ClosednessReport(verdict, tuple(ns), tuple(dist.tolist()), tuple(energies.tolist()),
                            tuple(pairs.tolist()), float(lim_e), cauchy, l2, econv)


@dataclass(frozen=True)
class DomainEscapeReport:
    """Graph-limit evidence for the position operator on compactly supported states."""

    n_list: tuple
    l2_distance: tuple[float, ...]
    image_distance: tuple[float, ...]
    limit_compact: bool
    domain_escape: bool
    verdict: str


def operator_closedness_probe(n_list) -> DomainEscapeReport:
    """``psi_n = 1_[-n, n] exp(-x^2)`` against its limit ``exp(-x^2)`` under ``x``.

    Both ``||psi_n - psi||`` and ``||x psi_n - x psi||`` are Gaussian tail
    integrals, evaluated in closed form with ``erfc``.
    """
    ns = np.asarray(list(n_list), dtype=float)
    if ns.size < 2 or np.any(np.diff(ns) <= 0) or np.any(ns <= 0):
        raise ValidationError("n_list must be positive and ascending")
    s2 = math.sqrt(2.0)
    # 2 int_n^inf e^{-2x^2} dx and 2 int_n^inf x^2 e^{-2x^2} dx
    tail0 = math.sqrt(math.pi / 2) * erfc(s2 * ns)
    tail2 = ns * np.exp(-2 * ns**2) / 2 + math.sqrt(math.pi / 2) * erfc(s2 * ns) / 4
    d0, d2 = np.sqrt(tail0), np.sqrt(tail2)
    escape = bool(np.all(np.diff(d0) < 0) and np.all(np.diff(d2) < 0))
    return DomainEscapeReport(tuple(ns.tolist()), tuple(d0.tolist()), tuple(d2.tolist()), False, escape,
                              NOT_CLOSED if escape else INCONCLUSIVE)


@dataclass(frozen=True)
class SemicontinuityReport:
    verdict: str
    n_list: tuple
    energies: tuple[float, ...]
    liminf: float
    limit_energy: float


def semicontinuity_probe(form: QuadraticFormSpec, scenario: SequenceScenario, n_list=None,
                         N: int | None = None, thresholds: FormThresholds | None = None) -> SemicontinuityReport:
    """Compare ``E[lim psi_n]`` with the liminf of the tabulated ``E[psi_n]``.

    The liminf is estimated by the smaller of the last two entries, the
    shortest tail that still catches a two-cycle oscillation.
    """
    th = thresholds or DEFAULTS.forms
    if scenario.limit is None:
        raise ValidationError("semicontinuity probe needs a scenario with a limit witness")
    ns = list(n_list) if n_list is not None else [10.0**k for k in range(7)]
    if len(ns) < 3:
        raise ValidationError("n_list needs at least three entries")
    energies = np.array([evaluate(form, scenario.generator(n), N) for n in ns])
    liminf = float(np.min(energies[-2:]))
    lim_e = evaluate(form, scenario.limit, N)
    verdict = VIOLATED if lim_e > liminf + th.semicontinuity_slack else SATISFIED
    return SemicontinuityReport(verdict, tuple(ns), tuple(energies.tolist()), liminf, float(lim_e))


# ---------------------------------------------------------------------------
# operator associated with the discrete Dirichlet energy
# ---------------------------------------------------------------------------

def difference_matrix(grid: Grid) -> np.ndarray:
    """Forward differences of interior values (zero Dirichlet data), shape (N, N-1)."""
    N = grid.N
    D = np.zeros((N, N - 1))
    k = np.arange(N - 1)
    D[k, k] = 1.0
    D[k + 1, k] = -1.0
    return D


def discrete_energy(grid: Grid, phi: np.ndarray, psi: np.ndarray) -> complex:
    """``sum h conj(D phi) (D psi) / h^2`` over interior-node vectors."""
    D = difference_matrix(grid)
    return complex(grid.h * np.vdot(D @ phi, D @ psi) / grid.h**2)


def operator_from_form(grid: Grid, bc: BoundaryCondition = DIRICHLET) -> OperatorMatrix:
    """Operator represented by the discrete Dirichlet energy under the grid inner product.

    With ``B = h D^T D / h^2`` the form matrix and ``h`` the interior quadrature
    weight, ``<phi, A psi> = E[phi, psi]`` forces ``A = B / h``.
    """
    if bc.kind != "dirichlet" or grid.periodic:
        raise ValidationError("operator_from_form is provided for Dirichlet data on an interval grid")
    D = difference_matrix(grid)
    B = grid.h * (D.T @ D) / grid.h**2
    A = (B / grid.h).astype(complex)
    A.setflags(write=False)
    idx = np.arange(1, grid.N)
    idx.setflags(write=False)
    return OperatorMatrix(grid, LAPLACIAN, DIRICHLET, A, True, idx, "operator of the Dirichlet energy")


def assembled_laplacian(grid: Grid) -> OperatorMatrix:
    return assemble(LAPLACIAN, DIRICHLET, grid)


# ---------------------------------------------------------------------------
# scripted sequences
# ---------------------------------------------------------------------------

def narrowing_gaussians() -> SequenceScenario:
    """``exp(-n x^2)`` with limit 0."""
    from saelab.witness import gaussian

    return SequenceScenario("exp(-n x^2)", lambda n: gaussian(float(n)), None)


def _window(n: float) -> SymbolicWitness:
    # (tanh(x+n) - tanh(x-n))/2: a smooth indicator of [-n, n]
    def f(x):
        return 0.5 * (np.tanh(x + n) - np.tanh(x - n)) + 0j

    def df(x):
        return 0.5 * (1 / np.cosh(x + n) ** 2 - 1 / np.cosh(x - n) ** 2) + 0j

    def d2f(x):
        s1, s2 = 1 / np.cosh(x + n), 1 / np.cosh(x - n)
        return -(s1**2 * np.tanh(x + n) - s2**2 * np.tanh(x - n)) + 0j

    return SymbolicWitness(f, df, d2f, label=f"window({n:g})")


def windowed_gaussians() -> SequenceScenario:
    """``exp(-x^2)`` times a smooth window of ``[-n, n]``; limit ``exp(-x^2)``."""
    from saelab.witness import gaussian

    g = gaussian(1.0)
    return SequenceScenario("smoothed 1_[-n,n] exp(-x^2)", lambda n: g * _window(float(n)), g)


def notched_gaussians() -> SequenceScenario:
    """``exp(-x^2) (1 - exp(-n x^2))``: vanishes at 0 for every n; limit ``exp(-x^2)``."""
    from saelab.witness import constant, gaussian

    g = gaussian(1.0)
    one = constant(1.0)
    return SequenceScenario("exp(-x^2)(1-exp(-n x^2))", lambda n: g * (one - gaussian(float(n))), g)


def constant_sequence(psi: SymbolicWitness) -> SequenceScenario:
    return SequenceScenario(f"constant {psi.label}", lambda n: psi, psi)
