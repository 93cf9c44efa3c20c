"""Commutation-relation experiments with finite matrices.

No pair of n x n matrices satisfies ``[Q, P] = i I`` (take the trace), so
the defect ``eps = ||[Q, P] - i I||`` is at least 1 in finite dimensions.
This module measures ``eps`` and operator norms by Hermitian eigensolves
and checks the log lower bound on ``||Q|| ||P||``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from saelab.errors import ValidationError

HERMITIAN_TOL = 1e-12
TRIVIAL_REGIME = "TRIVIAL_REGIME"
NONTRIVIAL_REGIME = "NONTRIVIAL_REGIME"


def _hermitian_defect(M: np.ndarray) -> float:
    return float(np.max(np.abs(M - M.conj().T), initial=0.0))


@dataclass(frozen=True, eq=False)
class MatrixPair:
    """Square matrices ``Q``, ``P`` of the same dimension.

    Use :meth:`raw` for arbitrary input; the Hermitian flag is then
    recorded rather than enforced.
    """

    Q: np.ndarray
    P: np.ndarray
    hermitian: bool = True

    def __post_init__(self):
        Q = np.array(self.Q, dtype=complex)
        P = np.array(self.P, dtype=complex)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1] or Q.shape != P.shape:
            raise ValidationError(f"Q and P must be square of equal shape, got {Q.shape} and {P.shape}")
        if not (np.all(np.isfinite(Q)) and np.all(np.isfinite(P))):
            raise ValidationError("Q and P must be finite")
        herm = _hermitian_defect(Q) <= HERMITIAN_TOL and _hermitian_defect(P) <= HERMITIAN_TOL
        if self.hermitian and not herm:
            raise ValidationError("Q and P are not Hermitian within 1e-12; use MatrixPair.raw")
        Q.setflags(write=False)
        P.setflags(write=False)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "P", P)
        object.__setattr__(self, "hermitian", bool(herm))

    @classmethod
    def raw(cls, Q, P) -> MatrixPair:
        return cls(Q, P, hermitian=False)

    @property
    def n(self) -> int:
        return self.Q.shape[0]

    def commutator(self) -> np.ndarray:
        return self.Q @ self.P - self.P @ self.Q

    def scaled(self, c: float) -> MatrixPair:
        """``(Q / c, c P)``: same commutator, same norm product."""
        if not c > 0:
            raise ValidationError("scale must be positive")
        return MatrixPair(self.Q / c, self.P * c, hermitian=self.hermitian)


def lowering(n: int) -> np.ndarray:
    """``a`` with ``a[k-1, k] = sqrt(k)``."""
    a = np.zeros((n, n))
    k = np.arange(1, n)
    a[k - 1, k] = np.sqrt(k)
    return a


def truncated_qp(n: int) -> MatrixPair:
    """Position and momentum of the oscillator truncated to ``n`` levels."""
    if n < 2:
        raise ValidationError("truncated_qp needs n >= 2")
    a = lowering(n).astype(complex)
    ad = a.conj().T
    return MatrixPair((a + ad) / math.sqrt(2), 1j * (ad - a) / math.sqrt(2))


def operator_norm(M: np.ndarray) -> float:
    """Spectral norm; eigensolve for Hermitian input, singular values otherwise."""
    M = np.asarray(M, dtype=complex)
    if M.size == 0:
        return 0.0
    if _hermitian_defect(M) <= HERMITIAN_TOL * max(1.0, float(np.max(np.abs(M)))):
        return float(np.max(np.abs(np.linalg.eigvalsh(0.5 * (M + M.conj().T)))))
    return float(np.linalg.norm(M, 2))


def commutator_defect(pair: MatrixPair) -> float:
    """``eps = ||[Q, P] - i I||``.

    Writing ``[Q, P] = i K`` (``K`` Hermitian when ``Q``, ``P`` are), the
    defect is the largest ``|mu|`` over eigenvalues ``mu`` of ``K - I``.
    """
    K = -1j * pair.commutator()
    return operator_norm(K - np.eye(pair.n))


@dataclass(frozen=True)
class PopaReport:
    eps: float
    norm_q: float
    norm_p: float
    bound: float
    satisfied: bool
    regime: str

    @property
    def norm_product(self) -> float:
        return self.norm_q * self.norm_p


def popa_check(pair: MatrixPair) -> PopaReport:
    """Check ``||Q|| ||P|| >= log(1/eps) / 2``.

    For ``eps >= 1`` the right side is nonpositive, reported as
    ``TRIVIAL_REGIME``.
    """
    eps = commutator_defect(pair)
    nq, np_ = operator_norm(pair.Q), operator_norm(pair.P)
    bound = math.inf if eps == 0 else 0.5 * math.log(1.0 / eps)
    regime = TRIVIAL_REGIME if eps >= 1.0 else NONTRIVIAL_REGIME
    return PopaReport(eps, nq, np_, bound, bool(nq * np_ >= bound), regime)


def random_hermitian(rng: np.random.Generator, n: int, scale: float = 1.0) -> np.ndarray:
    """Gaussian Hermitian matrix ``(A + A^H)/2`` with complex normal ``A``."""
    A = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    return scale * 0.5 * (A + A.conj().T)


def random_pairs(seed: int, count: int, max_dim: int = 8, scaled: bool = False):
    """Seeded Hermitian pairs with dimensions drawn uniformly from ``1..max_dim``.

    With ``scaled`` each pair becomes ``(c Q, P / c)`` for a log-uniform ``c``
    in ``[1e-3, 1e3]``.
    """
    if count < 0 or max_dim < 1:
        raise ValidationError("count must be >= 0 and max_dim >= 1")
    rng = np.random.default_rng(seed)
    for _ in range(count):
        n = int(rng.integers(1, max_dim + 1))
        Q, P = random_hermitian(rng, n), random_hermitian(rng, n)
        if scaled:
            c = 10.0 ** rng.uniform(-3, 3)
            Q, P = c * Q, P / c
        yield MatrixPair(Q, P)


@dataclass(frozen=True)
class SweepSummary:
    count: int
    min_eps: float
    all_satisfied: bool
    trivial_count: int


def ccr_sweep(seed: int, count: int, max_dim: int = 8, scaled: bool = False) -> SweepSummary:
    """Run :func:`popa_check` on a seeded random ensemble."""
    min_eps, ok, trivial = math.inf, True, 0
    for pair in random_pairs(seed, count, max_dim, scaled):
        r = popa_check(pair)
        min_eps = min(min_eps, r.eps)
        ok &= r.satisfied
        trivial += r.regime == TRIVIAL_REGIME
    return SweepSummary(count, min_eps, bool(ok), trivial)
