import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import roots_hermite

from saelab import ccr
from saelab.errors import ValidationError


def test_truncated_qp_n2():
    pair = ccr.truncated_qp(2)
    s = 1 / math.sqrt(2)
    assert np.allclose(pair.Q, [[0, s], [s, 0]], atol=1e-15)
    assert pair.hermitian


@pytest.mark.parametrize("n", [2, 3, 7, 20])
def test_commutator_structure(n):
    C = ccr.truncated_qp(n).commutator()
    expected = np.full(n, 1j)
    expected[-1] = 1j * (1 - n)
    assert np.allclose(np.diag(C), expected, atol=1e-12)
    assert np.allclose(C - np.diag(np.diag(C)), 0, atol=1e-12)
    assert abs(np.trace(C)) <= 1e-12 * n


def test_defect_equals_dimension():
    for n in range(2, 201):
        assert abs(ccr.commutator_defect(ccr.truncated_qp(n)) - n) <= 1e-10


def test_zero_pair():
    z = np.zeros((3, 3))
    r = ccr.popa_check(ccr.MatrixPair(z, z))
    assert r.eps == 1.0 and r.bound == 0.0 and r.norm_product == 0.0
    assert r.satisfied and r.regime == ccr.TRIVIAL_REGIME


def test_truncated_qp_50():
    r = ccr.popa_check(ccr.truncated_qp(50))
    assert r.satisfied and r.regime == ccr.TRIVIAL_REGIME
    assert r.eps == pytest.approx(50, abs=1e-10)


def test_q_norm_is_largest_hermite_node():
    # the truncated position matrix is the Jacobi matrix of the Hermite recurrence
    prev = 0.0
    for n in (2, 5, 10, 40, 100):
        nq = ccr.operator_norm(ccr.truncated_qp(n).Q)
        assert nq == pytest.approx(np.max(roots_hermite(n)[0]), rel=1e-12)
        assert nq > prev
        prev = nq


@given(st.integers(0, 2**32 - 1), st.floats(-3, 3))
def test_scaling_invariance(seed, log_c):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    pair = ccr.MatrixPair(ccr.random_hermitian(rng, n), ccr.random_hermitian(rng, n))
    c = 10.0**log_c
    a, b = ccr.popa_check(pair), ccr.popa_check(pair.scaled(c))
    assert b.eps == pytest.approx(a.eps, rel=1e-9, abs=1e-9)
    assert b.norm_product == pytest.approx(a.norm_product, rel=1e-9)
    assert b.satisfied


@given(st.integers(0, 2**32 - 1))
def test_trace_obstruction(seed):
    for pair in ccr.random_pairs(seed, 5):
        eps = ccr.commutator_defect(pair)
        # |tr([Q,P] - iI)| / n = 1 lower-bounds the operator norm
        trace_bound = abs(np.trace(pair.commutator() - 1j * np.eye(pair.n))) / pair.n
        assert trace_bound == pytest.approx(1.0, abs=1e-10)
        assert eps >= trace_bound - 1e-10
        assert ccr.popa_check(pair).satisfied


def test_sweep_10k():
    s = ccr.ccr_sweep(seed=11, count=10_000)
    assert s.min_eps >= 1 - 1e-10
    assert s.all_satisfied and s.trivial_count == 10_000


def test_scaled_sweep():
    s = ccr.ccr_sweep(seed=5, count=500, scaled=True)
    assert s.min_eps >= 1 - 1e-10 and s.all_satisfied


def test_operator_norm_non_hermitian_and_empty():
    M = np.array([[0, 2.0], [0, 0]])
    assert ccr.operator_norm(M) == pytest.approx(2.0)
    assert ccr.operator_norm(np.zeros((0, 0))) == 0.0


def test_pair_validation():
    with pytest.raises(ValidationError):
        ccr.truncated_qp(1)
    with pytest.raises(ValidationError):
        ccr.MatrixPair(np.eye(2), np.eye(3))
    with pytest.raises(ValidationError):
        ccr.MatrixPair(np.array([[0, 1], [0, 0]]), np.eye(2))
    with pytest.raises(ValidationError):
        ccr.MatrixPair(np.array([[np.nan]]), np.eye(1))
    raw = ccr.MatrixPair.raw(np.array([[0, 1], [0, 0]]), np.eye(2))
    assert not raw.hermitian
    assert ccr.popa_check(raw).satisfied
    with pytest.raises(ValidationError):
        ccr.truncated_qp(3).scaled(0)
    with pytest.raises(ValidationError):
        list(ccr.random_pairs(0, -1))
