import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gammaln

from oracles import dirichlet_discrete_levels, nonuniqueness_distance

from saelab.actions import DIRICHLET, LAPLACIAN
from saelab.dynamics import (ANALYTIC_LIKE, ROUGH, SMALL_TIMES, bc_violation, check_propagator, nonuniqueness_demo,
                             propagate, propagator_suite, series_exponential, smooth_datum, step_datum)
from saelab.errors import ValidationError
from saelab.geometry import Interval
from saelab.grid import GridFunction, make_grid, norm, sample
from saelab.operators import assemble
from saelab.spectral import eigendecompose, expand
from saelab.witness import bump, constant, gaussian, standard_bump

UNIT = Interval(0.0, 1.0)
# independent Gauss-Legendre Fourier oracle at t = 0.01 (2500, 4000 and 6000 nodes agree to 3e-14)
GOLDEN_T001 = 0.23351660995810


@pytest.fixture(scope="module")
def dec200():
    return eigendecompose(assemble(LAPLACIAN, DIRICHLET, make_grid(UNIT, 200)))


# --- propagate ---------------------------------------------------------------

def test_time_zero_is_identity(dec200):
    psi = sample(bump(), dec200.operator.grid)
    assert norm(propagate(dec200, psi, 0.0) - psi) <= 1e-10 * norm(psi)


def test_eigenvector_picks_up_phase(dec200):
    v = dec200.eigenvector(4)
    out = propagate(dec200, v, 0.3)
    assert norm(out - v * np.exp(-0.3j * dec200.eigenvalues[4])) <= 1e-10


@given(st.floats(-50, 50, allow_nan=False))
def test_norm_preserved(dec200, t):
    psi = sample(bump(), dec200.operator.grid)
    assert abs(norm(propagate(dec200, psi, t)) - norm(psi)) <= 1e-10 * norm(psi)


def test_propagate_rejects_other_grid(dec200):
    with pytest.raises(ValidationError):
        propagate(dec200, sample(bump(), make_grid(UNIT, 100)), 1.0)


def test_bc_violation_dirichlet(dec200):
    g = dec200.operator.grid
    assert bc_violation(dec200.operator, sample(constant(2.0), g)) == 2.0
    assert bc_violation(dec200.operator, sample(bump(), g)) == 0.0


# --- propagator contract -----------------------------------------------------

def test_check_propagator_smooth_bump(dec200):
    psi = sample(bump(), dec200.operator.grid)
    r = check_propagator(dec200, psi, 0.37, -1.2, SMALL_TIMES)
    for d in (r.unitarity_defect, r.group_defect, r.bc_residual, r.commutation_defect):
        assert 0 <= d <= 1e-8
    assert r.generator_norm == pytest.approx(norm(dec200.operator.apply(psi)))
    # finite-step model tau ||H^2 psi|| / 2, with ||H^2 psi|| from the eigenexpansion
    c = expand(dec200, psi).values
    model = 1e-5 * np.sqrt(np.sum(np.abs(c * dec200.eigenvalues**2) ** 2)) / 2
    assert r.generator_defect == pytest.approx(model, rel=0.02)


def test_generator_defect_three_mode_datum(dec200):
    psi = smooth_datum(dec200.operator.grid)
    r = check_propagator(dec200, psi, 0.37, -1.2, SMALL_TIMES)
    assert r.generator_defect <= 1e-3 * r.generator_norm


def test_inverse_and_continuity(dec200):
    psi = sample(bump(), dec200.operator.grid)
    r = check_propagator(dec200, psi, 0.8, -0.8, [1e-4, 5e-5, 2.5e-5])
    assert r.group_defect <= 1e-10
    d = [v for _, v in r.continuity_profile]
    assert d[1] / d[0] == pytest.approx(0.5, abs=0.05)
    assert d[2] / d[1] == pytest.approx(0.5, abs=0.05)


def test_check_propagator_rejects_zero(dec200):
    g = dec200.operator.grid
    with pytest.raises(ValidationError):
        check_propagator(dec200, GridFunction(g, np.zeros(g.nodes.size)), 1, 1, SMALL_TIMES)


@given(st.floats(-5, 5, allow_nan=False), st.floats(-5, 5, allow_nan=False))
def test_group_law(dec200, t1, t2):
    psi = sample(gaussian(alpha=80.0, center=0.5), dec200.operator.grid)
    U = lambda t, f: propagate(dec200, f, t)
    assert norm(U(t1, U(t2, psi)) - U(t1 + t2, psi)) <= 1e-9 * norm(psi)


def test_propagation_is_deterministic(dec200):
    psi = sample(bump(), dec200.operator.grid)
    a, b = propagate(dec200, psi, 0.7), propagate(dec200, psi, 0.7)
    assert np.array_equal(a.values, b.values)


def test_propagator_suite():
    cases = propagator_suite(seed=7, count=50)
    assert len(cases) == 50
    assert {c.bc for c in cases} == {"dirichlet", "periodic", "quasi_periodic"}
    for c in cases:
        r = c.report
        assert max(r.unitarity_defect, r.group_defect, r.commutation_defect, r.bc_residual) <= 1e-8
        d = [v for _, v in r.continuity_profile]
        assert all(b <= a + 1e-12 for a, b in zip(d, d[1:]))
    again = propagator_suite(seed=7, count=3)
    assert [c.report for c in again] == [c.report for c in cases[:3]]


# --- series exponential ------------------------------------------------------

def _peak_oracle(N, t, kmax=400):
    """max_k sqrt(mean lambda_n^(2k)) t^k / k! over the three sine modes, in log10."""
    lam = dirichlet_discrete_levels(np.arange(1, 4), 1 / N)
    best = -np.inf
    for k in range(kmax):
        e = 2 * k * np.log(lam)
        top = e.max()
        val = 0.5 * (top + np.log(np.mean(np.exp(e - top)))) + k * np.log(t) - gammaln(k + 1)
        best = max(best, val)
    return float(best / np.log(10))


@pytest.fixture(scope="module")
def series_ops():
    out = {}
    for N in (500, 1000, 2000):
        g = make_grid(UNIT, N)
        op = assemble(LAPLACIAN, DIRICHLET, g)
        out[N] = (g, op, eigendecompose(op))
    return out


def test_smooth_series_converges(series_ops):
    stars = []
    for N, (g, op, dec) in series_ops.items():
        r = series_exponential(op, smooth_datum(g), 0.01, reference=dec)
        assert r.final_error <= 1e-8 and r.verdict == ANALYTIC_LIKE and r.converged
        assert all(np.isfinite(p) and p >= 0 for p in r.partial_norm_profile)
        stars.append(r.terms_used)
    assert max(stars) - min(stars) <= 2


def test_smooth_series_at_t01_peak(series_ops):
    # the three-mode datum's intermediate terms reach ~555 at t = 0.1
    g, op, dec = series_ops[2000]
    r = series_exponential(op, smooth_datum(g), 0.1, reference=dec)
    assert r.peak_ratio_log10 == pytest.approx(_peak_oracle(2000, 0.1), abs=1e-9)
    assert r.final_error <= 1e-8
    assert r.verdict == ROUGH


def test_step_series_grows_with_grid(series_ops):
    stars = []
    for N, (g, op, dec) in series_ops.items():
        r = series_exponential(op, step_datum(g), 0.001, reference=dec)
        assert r.verdict == ROUGH
        stars.append(r.terms_used)
    assert stars[0] < stars[1] < stars[2]
    assert r.peak_ratio > 1e3


def test_series_overflow_and_cap(series_ops):
    g, op, dec = series_ops[500]
    r = series_exponential(op, step_datum(g), 0.1, reference=dec, max_terms=1000)
    assert not r.converged and r.terms_used == 1000
    assert r.overflow_index is not None and r.final_error == float("inf")
    assert len(r.partial_norm_profile) == r.overflow_index
    with pytest.raises(ValidationError):
        series_exponential(op, step_datum(g), 0.1, max_terms=0)


# --- non-uniqueness ----------------------------------------------------------

@pytest.fixture(scope="module")
def demo_001():
    return nonuniqueness_demo(standard_bump(), 0.01)


def test_nonuniqueness_golden(demo_001):
    assert demo_001.distance > 0.1
    assert demo_001.distance == pytest.approx(GOLDEN_T001, abs=1e-10)
    assert demo_001.truncated


def test_nonuniqueness_matches_oracle_at_other_time():
    d = nonuniqueness_demo(standard_bump(), 0.005).distance
    assert d == pytest.approx(nonuniqueness_distance(0.005), abs=1e-10)


def test_nonuniqueness_time_zero_and_reversal(demo_001):
    assert nonuniqueness_demo(standard_bump(), 0.0).distance <= 1e-8
    assert nonuniqueness_demo(standard_bump(), -0.01).distance == pytest.approx(demo_001.distance, abs=1e-12)


def test_nonuniqueness_boundary_residuals(demo_001):
    r = demo_001.bc_residuals
    assert r["dirichlet_left"] <= 1e-8 and r["dirichlet_right"] <= 1e-8 and r["periodic_jump"] <= 1e-8
    # both solutions leave the initial support
    assert demo_001.outside_mass["dirichlet"] > 1e-3 and demo_001.outside_mass["periodic"] > 1e-3


@pytest.mark.parametrize("psi0", [standard_bump(), bump(center=0.4, halfwidth=0.1), bump(center=0.7, halfwidth=0.2)])
@pytest.mark.parametrize("t", [0.005, 0.01, 0.02])
def test_nonuniqueness_distances_positive(psi0, t):
    assert nonuniqueness_demo(psi0, t, N=1000).distance > 1e-6


def test_nonuniqueness_support_precondition():
    with pytest.raises(ValidationError):
        nonuniqueness_demo(bump(center=0.1, halfwidth=0.2), 0.01)
    with pytest.raises(ValidationError):
        nonuniqueness_demo(constant(1.0), 0.01)
