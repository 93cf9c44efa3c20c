"""Unitary dynamics generated by a self-adjoint realization.

Propagators come from the spectral decomposition. The property suite
checks unitarity, the group law, strong continuity, preservation of the
boundary condition, recovery of the generator and commutation with H.
The truncated exponential series is tracked in log space so that rough
data (whose intermediate terms overflow any float) can still be
characterised, and the non-uniqueness demo evolves one initial state under
two different self-adjoint Laplacians.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln, logsumexp

from saelab.config import DEFAULTS, SeriesThresholds
from saelab.errors import ValidationError
from saelab.geometry import Interval
from saelab.grid import GridFunction, evaluate_finite, make_grid
from saelab.operators import OperatorMatrix
from saelab.spectral import SpectralDecomposition, eigendecompose, expand

ANALYTIC_LIKE = "ANALYTIC_LIKE"
ROUGH = "ROUGH"

# largest log-magnitude a partial sum may carry before it is declared overflowed
_LOG_OVERFLOW = math.log(np.finfo(float).max) - 10.0


def _wnorm(weights: np.ndarray, v: np.ndarray) -> float:
    return float(np.sqrt(np.sum(weights * (v.real**2 + v.imag**2))))


def _evolve_coeffs(dec: SpectralDecomposition, c: np.ndarray, t: float) -> np.ndarray:
    return dec.vectors @ (np.exp(-1j * dec.eigenvalues * t) * c)


def propagate(dec: SpectralDecomposition, psi0: GridFunction, t: float) -> GridFunction:
    """``exp(-i t H) psi0`` from the eigenexpansion of ``psi0``."""
    c = expand(dec, psi0).values
    return dec.operator.extend(_evolve_coeffs(dec, c, float(t)))


def bc_violation(op: OperatorMatrix, psi: GridFunction) -> float:
    """How far ``psi`` is from the boundary condition of ``op`` at the grid endpoints."""
    v = psi.values
    if op.bc.kind == "dirichlet":
        return float(max(abs(v[0]), abs(v[-1])))
    if op.bc.wraps and not op.grid.periodic:
        return float(abs(v[-1] - op.bc.phase * v[0]))
    return 0.0


@dataclass(frozen=True)
class PropagatorCheckReport:
    unitarity_defect: float
    group_defect: float
    continuity_profile: tuple[tuple[float, float], ...]
    bc_residual: float
    generator_defect: float
    commutation_defect: float
    generator_norm: float


def check_propagator(dec: SpectralDecomposition, psi0: GridFunction, t1: float, t2: float,
                     t_small_list, tau: float | None = None) -> PropagatorCheckReport:
    """Evaluate the dynamics contract for one initial state.

    Defects are absolute (grid norms). ``generator_norm`` is ``||H psi0||``,
    the scale for ``generator_defect`` whose finite-step error is of order
    ``tau ||H^2 psi0|| / 2``.
    """
    op = dec.operator
    w = dec.weights
    c = expand(dec, psi0).values
    n0 = float(np.sqrt(np.sum(np.abs(c) ** 2)))
    if n0 == 0.0:
        raise ValidationError("check_propagator needs a nonzero initial state")
    tau = DEFAULTS.generator_step if tau is None else float(tau)
    lam = dec.eigenvalues
    V = dec.vectors

    def U(t, coeffs=c):
        return V @ (np.exp(-1j * lam * t) * coeffs)

    times = [t1, t2, t1 + t2, *t_small_list]
    states = {t: U(t) for t in times}
    unit = max(abs(_wnorm(w, s) - n0) for s in states.values())
    c2 = np.exp(-1j * lam * t2) * c
    group = _wnorm(w, U(t1, c2) - states[t1 + t2])
    base = V @ c
    profile = tuple((float(t), _wnorm(w, states[t] - base)) for t in t_small_list)
    bc = max(bc_violation(op, op.extend(s)) for s in states.values())
    Hpsi = op.entries @ base
    diff = V @ (np.expm1(-1j * lam * tau) * c)
    gen = _wnorm(w, 1j * diff / tau - Hpsi)
    # commutation H U(t) = U(t) H on the span of the decomposition
    cH = expand(dec, op.extend(Hpsi)).values
    comm = max(_wnorm(w, op.entries @ states[t] - U(t, cH)) for t in (t1, t2))
    return PropagatorCheckReport(unit, group, profile, bc, gen, comm, _wnorm(w, Hpsi))


@dataclass(frozen=True)
class PropagatorCase:
    bc: str
    theta: float
    t1: float
    t2: float
    report: PropagatorCheckReport


# below 1/lambda_max of the retained modes, so the continuity profile is monotone
SMALL_TIMES = (1e-3, 1e-4, 1e-5, 1e-6)


def propagator_suite(seed: int, count: int, N: int = 200, modes: int = 10) -> list[PropagatorCase]:
    """Seeded random cases for :func:`check_propagator`.

    Each case draws a boundary condition (Dirichlet, periodic or
    quasi-periodic with random phase) for the Laplacian on ``[0, 1]``, an
    initial state with complex normal coefficients on the lowest ``modes``
    eigenvectors, and times ``t1, t2`` uniform in ``[-1, 1]``.
    """
    from saelab.actions import DIRICHLET, LAPLACIAN, PERIODIC, BoundaryCondition
    from saelab.operators import assemble

    if count < 0 or modes < 1:
        raise ValidationError("count must be >= 0 and modes >= 1")
    rng = np.random.default_rng(seed)
    grid = make_grid(Interval(0.0, 1.0), N)
    cache: dict = {}
    out = []
    for _ in range(count):
        kind = ("dirichlet", "periodic", "quasi_periodic")[int(rng.integers(3))]
        theta = float(rng.uniform(0.0, 2.0 * np.pi)) if kind == "quasi_periodic" else 0.0
        key = (kind, theta)
        if key not in cache:
            bc = {"dirichlet": DIRICHLET, "periodic": PERIODIC}.get(kind) or BoundaryCondition.quasi_periodic(theta)
            cache[key] = eigendecompose(assemble(LAPLACIAN, bc, grid))
        dec = cache[key]
        k = min(modes, dec.vectors.shape[1])
        c = rng.normal(size=k) + 1j * rng.normal(size=k)
        psi0 = dec.operator.extend(dec.vectors[:, :k] @ c)
        t1, t2 = (float(v) for v in rng.uniform(-1.0, 1.0, size=2))
        out.append(PropagatorCase(kind, theta, t1, t2, check_propagator(dec, psi0, t1, t2, SMALL_TIMES)))
    return out


def smooth_datum(grid) -> GridFunction:
    """Normalised sum of the three lowest Dirichlet sine modes (exact discrete eigenvectors)."""
    x = grid.nodes
    v = sum(np.sqrt(2.0) * np.sin(np.pi * n * x) for n in (1, 2, 3)) / np.sqrt(3.0)
    return GridFunction(grid, v.astype(complex))


def step_datum(grid, lo: float = 0.25, hi: float = 0.75) -> GridFunction:
    """Unit-norm indicator of ``[lo, hi]`` sampled on the grid."""
    x = grid.nodes
    v = ((x >= lo) & (x <= hi)).astype(complex) / np.sqrt(hi - lo)
    return GridFunction(grid, v)


@dataclass(frozen=True)
class SeriesReport:
    """Truncated exponential series ``sum_n (-i t)^n H^n psi0 / n!``.

    Attributes
    ----------
    terms_used : int
        ``n*``: index of the first term below ``tol * ||psi0||`` (or
        ``max_terms`` if none was).
    partial_norm_profile : tuple of float
        Term norms ``||H^n psi0|| t^n / n!`` up to the first one that no
        longer fits in a float.
    log10_term_norms : ndarray
        Every term norm, in log10, including those past overflow.
    peak_ratio_log10 : float
        log10 of ``max_n term / ||psi0||``.
    final_error : float
        ``||series - exp(-itH) psi0||``; ``inf`` after overflow.
    overflow_index : int or None
    converged : bool
    verdict : str
    """

    terms_used: int
    partial_norm_profile: tuple[float, ...]
    log10_term_norms: np.ndarray
    peak_ratio_log10: float
    final_error: float
    overflow_index: int | None
    converged: bool
    verdict: str

    @property
    def peak_ratio(self) -> float:
        return float(10.0**self.peak_ratio_log10) if self.peak_ratio_log10 < 308 else float("inf")


def series_exponential(op: OperatorMatrix, psi0: GridFunction, t: float, max_terms: int = 2_000_000,
                       tol: float = 1e-14, reference: SpectralDecomposition | None = None,
                       thresholds: SeriesThresholds | None = None) -> SeriesReport:
    """Sum the exponential series term by term and compare with the spectral propagator.

    Terms are evaluated in eigen-coordinates: ``||H^n psi0||^2 =
    sum_k |c_k|^2 lambda_k^(2n)``, accumulated as a log-sum-exp so that term
    norms far beyond the float range remain comparable. Spectral
    coefficients below ``thresholds.noise_floor * ||psi0||`` are treated as
    rounding noise and dropped: every double-precision vector carries
    eps-level content in the stiffest modes, which would otherwise dominate
    ``H^n psi0`` for any datum. Once a term no longer fits in a float the
    partial sum is abandoned (``final_error = inf``, ``overflow_index`` set)
    while the term norms are followed to the stopping index.
    """
    th = thresholds or DEFAULTS.series
    if max_terms < 1:
        raise ValidationError("max_terms must be at least 1")
    dec = reference if reference is not None else eigendecompose(op)
    if dec.operator.grid != op.grid or dec.vectors.shape[0] != op.dim:
        raise ValidationError("reference decomposition belongs to a different operator")
    c = expand(dec, psi0).values
    n0 = float(np.sqrt(np.sum(np.abs(c) ** 2)))
    if n0 == 0.0:
        raise ValidationError("series_exponential needs a nonzero initial state")
    keep = np.abs(c) > th.noise_floor * n0
    ck, lk = c[keep], dec.eigenvalues[keep]
    t = float(t)
    log_c2 = 2.0 * np.log(np.abs(ck))
    nz = lk != 0
    log_lam = np.log(np.abs(lk[nz]))
    logs = [0.5 * float(logsumexp(log_c2))]
    log_stop = math.log(tol) + math.log(n0)
    converged = t == 0.0 or not nz.any()
    n = 0
    if not converged:
        log_t = math.log(abs(t))
        chunk = max(1, min(4096, 4_000_000 // max(1, int(nz.sum()))))
        start = 1
        while start <= max_terms:
            ns = np.arange(start, min(start + chunk, max_terms + 1))
            lse = logsumexp(log_c2[nz][None, :] + 2.0 * ns[:, None] * log_lam[None, :], axis=1)
            lt = 0.5 * lse + ns * log_t - gammaln(ns + 1.0)
            below = np.flatnonzero(lt < log_stop)
            if below.size:
                k = int(below[0])
                logs.extend(lt[: k + 1].tolist())
                n = int(ns[k])
                converged = True
                break
            logs.extend(lt.tolist())
            n = int(ns[-1])
            start = n + 1
    log_arr = np.array(logs)
    over = np.flatnonzero(log_arr > _LOG_OVERFLOW)
    overflow = int(over[0]) if over.size else None
    cut = overflow if overflow is not None else len(logs)
    profile = tuple(float(math.exp(x)) for x in logs[:cut])
    peak = float((log_arr.max() - math.log(n0)) / math.log(10.0))
    if overflow is not None:
        final_error = float("inf")
    else:
        z = -1j * t * lk
        term = np.ones_like(z)
        acc = np.ones_like(z)
        for j in range(1, n + 1):
            term = term * z / j
            acc = acc + term
        series = dec.vectors[:, keep] @ (acc * ck)
        exact = op.restrict(propagate(dec, psi0, t))
        final_error = _wnorm(op.weights, series - exact)
    verdict = ANALYTIC_LIKE if peak <= math.log10(th.analytic_peak_factor) else ROUGH
    log10 = log_arr / math.log(10.0)
    log10.setflags(write=False)
    return SeriesReport(n, profile, log10, peak, final_error, overflow, converged, verdict)


# ---------------------------------------------------------------------------
# two evolutions of one compactly supported state
# ---------------------------------------------------------------------------

def sine_fourier_gram(n_sine: np.ndarray, m_fourier: np.ndarray) -> np.ndarray:
    """``G[n, m] = integral_0^1 sqrt(2) sin(pi n x) exp(2 pi i m x) dx`` in closed form."""
    n = np.asarray(n_sine)[:, None]
    m = np.asarray(m_fourier)[None, :]

    def E(j):
        # integral_0^1 exp(i pi j x) dx for integer j
        jj = np.where(j == 0, 1, j)
        val = (np.where(j % 2 == 0, 1.0, -1.0) - 1.0) / (1j * np.pi * jj)
        return np.where(j == 0, 1.0 + 0j, val)

    return np.sqrt(2.0) / 2j * (E(n + 2 * m) - E(2 * m - n))


def _truncate(coeffs: np.ndarray, floor: float, run: int) -> tuple[int, bool]:
    """Length after which ``run`` consecutive magnitudes stay below ``floor``."""
    small = np.abs(coeffs) < floor
    streak = 0
    for k, s in enumerate(small):
        streak = streak + 1 if s else 0
        if streak >= run:
            return k - run + 1, True
    return len(coeffs), False


@dataclass(frozen=True)
class NonuniquenessResult:
    distance: float
    bc_residuals: dict
    dirichlet_modes: int
    periodic_modes: int
    truncated: bool
    outside_mass: dict
    dirichlet_coefficients: np.ndarray
    periodic_coefficients: np.ndarray
    periodic_indices: np.ndarray


def nonuniqueness_demo(psi0, t: float, N: int = 2000, floor: float | None = None,
                       run: int | None = None) -> NonuniquenessResult:
    """Evolve ``psi0`` under the Dirichlet and the periodic Laplacian on ``[0, 1]``.

    Series coefficients are trapezoid inner products on ``N`` cells with the
    sine modes ``sqrt(2) sin(pi n x)`` and the Fourier modes
    ``exp(2 pi i m x)``; each series stops once ``run`` consecutive
    coefficients fall below ``floor``. The distance between the two
    solutions is computed in coefficient space through the closed-form
    overlap of the two bases.
    """
    floor = DEFAULTS.coefficient_floor if floor is None else floor
    run = DEFAULTS.coefficient_run if run is None else run
    grid = make_grid(Interval(0.0, 1.0), N)
    x, h = grid.nodes, grid.h
    if psi0.support is not None:
        lo, hi = psi0.support
        if not (0.0 < lo and hi < 1.0):
            raise ValidationError(f"initial state must be supported strictly inside (0, 1), got [{lo}, {hi}]")
    vals = evaluate_finite(psi0.f, x, psi0.label)
    scale = max(1.0, float(np.max(np.abs(vals))))
    if abs(vals[0]) > 1e-14 * scale or abs(vals[-1]) > 1e-14 * scale:
        raise ValidationError("initial state does not vanish at the endpoints")
    wts = np.asarray(grid.weights)
    cap = N // 2
    n = np.arange(1, cap + 1)
    S = np.sqrt(2.0) * np.sin(np.pi * np.outer(n, x))
    alpha = S @ (wts * vals)
    nD, okD = _truncate(alpha, floor, run)
    alpha = alpha[:nD]
    m = np.arange(0, cap + 1)
    Fp = np.exp(-2j * np.pi * np.outer(m, x))
    bp = Fp @ (wts * vals)
    bm = Fp.conj() @ (wts * vals)
    nP, okP = _truncate(np.maximum(np.abs(bp), np.abs(bm)), floor, run)
    idx = np.concatenate([-np.arange(nP - 1, 0, -1), np.arange(nP)])
    beta = np.concatenate([bm[1:nP][::-1], bp[:nP]])
    a_t = alpha * np.exp(-1j * np.pi**2 * np.arange(1, nD + 1) ** 2 * t)
    b_t = beta * np.exp(-4j * np.pi**2 * idx**2 * t)
    G = sine_fourier_gram(np.arange(1, nD + 1), idx)
    cross = complex(a_t.conj() @ G @ b_t)
    d2 = float(np.sum(np.abs(a_t) ** 2) + np.sum(np.abs(b_t) ** 2) - 2.0 * cross.real)
    distance = math.sqrt(max(d2, 0.0))
    # pointwise values for boundary residuals and spreading
    ends = np.array([0.0, 1.0])
    psiD_end = (np.sqrt(2.0) * np.sin(np.pi * np.outer(ends, np.arange(1, nD + 1)))) @ a_t
    psiP_end = np.exp(2j * np.pi * np.outer(ends, idx)) @ b_t
    psiD = (a_t @ S[:nD]) if nD else np.zeros_like(vals)
    psiP = np.exp(2j * np.pi * np.outer(x, idx)) @ b_t
    residuals = {
        "dirichlet_left": float(abs(psiD_end[0])),
        "dirichlet_right": float(abs(psiD_end[1])),
        "periodic_jump": float(abs(psiP_end[1] - psiP_end[0])),
    }
    outside = {"dirichlet": float("nan"), "periodic": float("nan")}
    if psi0.support is not None:
        lo, hi = psi0.support
        mask = (x < lo) | (x > hi)
        outside = {
            "dirichlet": float(np.sqrt(np.sum(wts[mask] * np.abs(psiD[mask]) ** 2))),
            "periodic": float(np.sqrt(np.sum(wts[mask] * np.abs(psiP[mask]) ** 2))),
        }
    return NonuniquenessResult(distance, residuals, nD, nP, okD and okP, outside,
                               alpha, beta, idx)
