import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad

from saelab.actions import (DIRICHLET, LAPLACIAN, MOMENTUM, POSITION, BoundaryCondition, FormalAction,
                            parse_action, parse_bc)
from saelab.errors import ValidationError
from saelab.witness import (ReallySimple, SymbolicWitness, bump, constant, cosine_mode, derivative_check,
                            gaussian, l2_norm, plane_wave, polynomial, power_gaussian, quadratic_12i, sine_mode,
                            standard_bump)

SMOOTH = [
    quadratic_12i(),
    polynomial([1, -2j, 0.5, 3]),
    gaussian(1.0),
    gaussian(3.0, 0.4),
    sine_mode(3),
    cosine_mode(2),
    plane_wave(2 * np.pi * 3 + 0.7),
    standard_bump(),
    gaussian(2.0) * polynomial([0, 1, 1j]),
    gaussian(1.0) + 2j * sine_mode(1),
]


@pytest.mark.parametrize("w", SMOOTH, ids=lambda w: w.label)
def test_derivatives_match_finite_differences(w):
    rng = np.random.default_rng(7)
    lo, hi = (0.27, 0.73) if w.support else (0.05, 0.95)
    pts = rng.uniform(lo, hi, 25)
    # the bump is steep near its edges, so use a step whose O(step^2) error is below 1e-6
    assert derivative_check(w, pts, step=1e-5) < 1e-6


def test_power_gaussian_derivatives_away_from_zero():
    w = power_gaussian(1.5)
    pts = np.array([-2.0, -0.7, -0.3, 0.2, 0.9, 1.8])
    assert derivative_check(w, pts, step=1e-5) < 1e-6
    assert w.singular == (0.0,)
    assert power_gaussian(2.5).singular == ()


def test_bump_support_and_norm():
    b = standard_bump()
    assert b.support == (0.25, 0.75)
    assert np.all(b(np.array([0.0, 0.25, 0.75, 1.0])) == 0)
    # oracle: direct adaptive quadrature of the unnormalised profile
    raw, _ = quad(lambda x: np.exp(-2 / (1 - (4 * (x - 0.5)) ** 2)), 0.25, 0.75, epsabs=1e-15, epsrel=1e-13)
    val = b(np.array([0.5]))[0]
    assert abs(abs(val) ** 2 - np.exp(-2) / raw) < 1e-12
    assert abs(l2_norm(b, 0, 1) - 1) < 1e-12


def test_combinators_track_support_and_labels():
    a, c = bump(0.3, 0.1), bump(0.6, 0.1)
    assert (a + c).support == pytest.approx((0.2, 0.7))
    assert (a * c).support[1] - (a * c).support[0] == 0
    assert (a * gaussian()).support == a.support
    assert (0 * a).support is None
    assert (-a)(np.array([0.3]))[0] == -a(np.array([0.3]))[0]
    x = np.array([0.1, 0.4])
    assert np.allclose(a.conj()(x), np.conj(a(x)))


def test_missing_derivative_reported():
    w = SymbolicWitness(lambda x: x + 0j, label="bare")
    assert not w.has_derivative(1)
    with pytest.raises(ValidationError, match="bare"):
        w.derivative(1)
    with pytest.raises(ValidationError):
        MOMENTUM.apply(w)


@given(st.lists(st.tuples(st.floats(-5, 5), st.floats(0.01, 2), st.complex_numbers(max_magnitude=3,
                                                                                   allow_nan=False)),
                min_size=1, max_size=4), st.integers(0, 3))
def test_really_simple_moments_exact(raw, k):
    # lay the pieces end to end so they are disjoint
    pieces, x = [], -6.0
    for start, width, c in raw:
        lo = max(x, start)
        pieces.append((lo, lo + width, c))
        x = lo + width + 1e-3
    psi = ReallySimple(tuple(pieces))
    oracle = sum(abs(c) ** 2 * quad(lambda t: t**k, lo, hi)[0] for lo, hi, c in pieces)
    assert psi.moment(k) == pytest.approx(oracle, rel=1e-12, abs=1e-12)


def test_really_simple_validation():
    with pytest.raises(ValidationError):
        ReallySimple(((0, 1, 1.0), (0.5, 2, 1.0)))
    with pytest.raises(ValidationError):
        ReallySimple(((1, 1, 1.0),))
    s = ReallySimple.indicator(-3, -2)
    assert s.norm() == 1.0 and s.support == (-3, -2)
    assert s.f(np.array([-2.5, 0.0])).tolist() == [1, 0]


def test_actions():
    psi = gaussian()
    x = np.array([0.3])
    assert POSITION.apply(psi)(x)[0] == pytest.approx(0.3 * np.exp(-0.09))
    assert MOMENTUM.apply(psi)(x)[0] == pytest.approx(-1j * psi.df(x)[0])
    assert LAPLACIAN.apply(psi)(x)[0] == pytest.approx(-psi.d2f(x)[0])
    H = FormalAction.schrodinger(polynomial([0, 0, 1]))
    assert H.apply(psi)(x)[0] == pytest.approx(-psi.d2f(x)[0] + 0.09 * psi.f(x)[0])
    assert H.order == 2 and MOMENTUM.order == 1 and POSITION.order == 0


def test_schrodinger_potential_must_be_real():
    H = FormalAction.schrodinger(polynomial([1j]))
    with pytest.raises(ValidationError):
        H.potential_values(np.linspace(0, 1, 5))
    with pytest.raises(ValidationError):
        FormalAction("laplacian", potential=constant(1.0))
    with pytest.raises(ValidationError):
        parse_action("magnetic")


def test_boundary_condition_phase_reduced():
    bc = BoundaryCondition.quasi_periodic(2 * np.pi + 1.0)
    assert bc.theta == pytest.approx(1.0)
    assert bc.phase == pytest.approx(np.exp(1j))
    assert parse_bc("dirichlet") == DIRICHLET
    assert not DIRICHLET.wraps
    with pytest.raises(ValidationError):
        parse_bc("robin")
