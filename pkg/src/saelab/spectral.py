"""Eigendecomposition of assembled operators and what it buys.

Eigenvectors are orthonormal under the grid inner product (not the
Euclidean one), so expansion coefficients, functional calculus and
propagators all carry the quadrature weights.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from saelab.config import DEFAULTS
from saelab.eigen import eigh_hermitian, eigh_real
from saelab.errors import NumericalError, ValidationError
from saelab.grid import GridFunction
from saelab.operators import OperatorMatrix

BACKENDS = ("lapack", "ql")


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """Eigenvalues (ascending) and grid-orthonormal eigenvectors of ``operator``.

    ``vectors`` holds the active-node values column-wise;
    :attr:`eigenvectors` exposes them as grid functions.
    """

    operator: OperatorMatrix
    eigenvalues: np.ndarray
    vectors: np.ndarray

    @cached_property
    def eigenvectors(self) -> tuple[GridFunction, ...]:
        return tuple(self.operator.extend(self.vectors[:, k]) for k in range(self.vectors.shape[1]))

    def eigenvector(self, k: int) -> GridFunction:
        return self.operator.extend(self.vectors[:, k])

    @property
    def weights(self) -> np.ndarray:
        return self.operator.weights

    def gram_defect(self) -> float:
        """``max |<v_i, v_j> - delta_ij|``."""
        V = self.vectors
        G = V.conj().T @ (self.weights[:, None] * V)
        return float(np.max(np.abs(G - np.eye(G.shape[0]))))

    def residuals(self) -> np.ndarray:
        """``||H v_k - lambda_k v_k||`` (grid norm) for every k."""
        V = self.vectors
        E = self.operator.entries
        if np.count_nonzero(E) <= 8 * E.shape[0]:
            E = sp.csr_matrix(E)
        R = E @ V - V * self.eigenvalues
        return np.sqrt(np.sum(self.weights[:, None] * np.abs(R) ** 2, axis=0))


def _orthonormalize_clusters(lam: np.ndarray, U: np.ndarray, rtol: float) -> np.ndarray:
    n = lam.size
    i = 0
    while i < n:
        j = i + 1
        while j < n and lam[j] - lam[j - 1] < rtol * max(1.0, abs(lam[j])):
            j += 1
        if j - i > 1:
            Qc, _ = np.linalg.qr(U[:, i:j])
            U[:, i:j] = Qc
        i = j
    return U


RESIDUAL_RTOL = 1e-8
# dense LU per flagged vector is O(n^3); beyond this many, leave them alone
MAX_DENSE_POLISH = 8


def _polish(S: np.ndarray, lam: np.ndarray, U: np.ndarray, rtol: float):
    """Inverse-iteration clean-up of eigenpairs whose residual sits near the rounding floor.

    Dense solvers leave residuals of order ``eps * ||S||``, which for stiff
    finite-difference matrices can exceed ``rtol * max(1, |lambda|)`` for the
    lowest modes. Flagged vectors get two shifted inverse-iteration steps
    (sparse LU when ``S`` is sparse), then a Rayleigh-Ritz pass per cluster.
    """
    n = S.shape[0]
    S = np.asarray(S, dtype=complex)
    sparse = np.count_nonzero(S) <= 8 * n
    Smat = sp.csc_matrix(S) if sparse else S
    R = Smat @ U - U * lam
    res = np.linalg.norm(R, axis=0)
    bad = np.flatnonzero(res > 0.25 * rtol * np.maximum(1.0, np.abs(lam)))
    if bad.size == 0:
        return lam, U
    if not sparse and bad.size > MAX_DENSE_POLISH:
        return lam, U
    eye = sp.identity(n, dtype=S.dtype, format="csc")
    for k in bad:
        mu = lam[k] + 1e-7 * max(1.0, abs(lam[k]))
        if sparse:
            solve = spla.splu((Smat - mu * eye).tocsc()).solve
        else:
            fac = sla.lu_factor(S - mu * np.eye(n))
            solve = lambda b, fac=fac: sla.lu_solve(fac, b)
        u = U[:, k]
        for _ in range(2):
            x = solve(u)
            u = x / np.linalg.norm(x)
        U[:, k] = u
    # Rayleigh-Ritz inside each cluster touched by the polish
    i = 0
    touched = set(int(k) for k in bad)
    while i < n:
        j = i + 1
        while j < n and lam[j] - lam[j - 1] < DEFAULTS.degeneracy_rtol * max(1.0, abs(lam[j])):
            j += 1
        if touched.intersection(range(i, j)):
            Q, _ = np.linalg.qr(U[:, i:j])
            C = Q.conj().T @ (Smat @ Q)
            mu, Y = np.linalg.eigh(0.5 * (C + C.conj().T))
            U[:, i:j] = Q @ Y
            lam[i:j] = mu
        i = j
    return lam, U


def _fix_phases(V: np.ndarray) -> np.ndarray:
    idx = np.argmax(np.abs(V), axis=0)
    lead = V[idx, np.arange(V.shape[1])]
    return V * (np.abs(lead) / lead)[None, :]


def eigendecompose(op: OperatorMatrix, backend: str = "lapack") -> SpectralDecomposition:
    """Full Hermitian eigendecomposition under the grid inner product.

    Parameters
    ----------
    op : OperatorMatrix
        Must carry ``hermitian_flag``.
    backend : {"lapack", "ql"}
        ``"ql"`` uses the package's own Householder/QL solver (and the real
        embedding for complex input); practical up to a few hundred nodes.

    Raises
    ------
    ValidationError
        Non-Hermitian input or unknown backend.
    NumericalError
        Eigensolver failure.
    """
    if not op.hermitian_flag:
        raise ValidationError(f"{op.name} is not flagged Hermitian; refusing to eigendecompose")
    if backend not in BACKENDS:
        raise ValidationError(f"backend must be one of {BACKENDS}")
    w = op.weights
    sw = np.sqrt(w)
    S = (sw[:, None] * op.entries) / sw[None, :]
    S = 0.5 * (S + S.conj().T)
    real = not np.any(S.imag)
    try:
        if backend == "lapack":
            lam, U = np.linalg.eigh(S.real if real else S)
        elif real:
            lam, U = eigh_real(S.real)
        else:
            lam, U = eigh_hermitian(S)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    U = np.asarray(U, dtype=complex)
    lam = np.array(lam, dtype=float)
    U = _orthonormalize_clusters(lam, U, DEFAULTS.degeneracy_rtol)
    lam, U = _polish(S, lam, U, RESIDUAL_RTOL)
    order = np.argsort(lam, kind="stable")
    lam, U = lam[order], U[:, order]
    V = _fix_phases(U / sw[:, None])
    lam.setflags(write=False)
    V.setflags(write=False)
    return SpectralDecomposition(op, lam, V)


def functional_calculus(dec: SpectralDecomposition, f, label: str | None = None) -> OperatorMatrix:
    """Matrix of ``f(H) = sum_k f(lambda_k) v_k <v_k, .>`` over the active nodes."""
    with np.errstate(all="ignore"):
        fl = np.asarray(f(dec.eigenvalues), dtype=complex)
    fl = np.broadcast_to(fl, dec.eigenvalues.shape)
    if not np.all(np.isfinite(fl)):
        k = int(np.flatnonzero(~np.isfinite(fl))[0])
        raise ValidationError(f"f is not finite at eigenvalue {dec.eigenvalues[k]!r}")
    V = dec.vectors
    M = (V * fl[None, :]) @ (V.conj().T * dec.weights[None, :])
    real_f = bool(np.max(np.abs(fl.imag), initial=0.0) <= 1e-12 * max(1.0, float(np.max(np.abs(fl)))))
    if real_f:
        M = 0.5 * (M + M.conj().T)
    M.setflags(write=False)
    op = dec.operator
    name = label or f"f({op.name})"
    return OperatorMatrix(op.grid, op.action, op.bc, M, real_f, op.active, name)


@dataclass(frozen=True, eq=False)
class ExpansionCoefficients:
    values: np.ndarray
    basis: SpectralDecomposition

    def parseval_defect(self, psi: GridFunction) -> float:
        """``|sum |c_n|^2 - ||psi||^2|`` with the norm taken over active nodes."""
        v = self.basis.operator.restrict(psi)
        n2 = float(np.sum(self.basis.weights * np.abs(v) ** 2))
        return abs(float(np.sum(np.abs(self.values) ** 2)) - n2)


def expand(dec: SpectralDecomposition, psi: GridFunction) -> ExpansionCoefficients:
    """Coefficients ``c_n = <v_n, psi>``."""
    v = dec.operator.restrict(psi)
    c = dec.vectors.conj().T @ (dec.weights * v)
    c.setflags(write=False)
    return ExpansionCoefficients(c, dec)


def reconstruct(dec: SpectralDecomposition, coeffs) -> GridFunction:
    c = coeffs.values if isinstance(coeffs, ExpansionCoefficients) else np.asarray(coeffs, dtype=complex)
    if c.shape != (dec.vectors.shape[1],):
        raise ValidationError("coefficient vector does not match the basis size")
    return dec.operator.extend(dec.vectors @ c)


@dataclass(frozen=True, eq=False)
class PlaneWaveExpansion:
    """Coefficients against ``exp(i p x)/sqrt(L)`` for ``p = 2 pi n / L``.

    ``indices`` (and ``momenta``) run over ``-N//2 .. N - 1 - N//2``.
    """

    indices: np.ndarray
    momenta: np.ndarray
    coefficients: np.ndarray
    reconstruction: GridFunction

    def coefficient(self, n: int) -> complex:
        pos = np.flatnonzero(self.indices == n)
        if pos.size == 0:
            raise ValidationError(f"index {n} is outside the resolved band")
        return complex(self.coefficients[pos[0]])


def planewave_expansion(psi: GridFunction) -> PlaneWaveExpansion:
    """Expand a periodic grid function in normalised discrete plane waves."""
    grid = psi.grid
    if not grid.periodic:
        raise ValidationError("plane-wave expansion needs a periodic grid")
    N, h, a = grid.N, grid.h, grid.a
    L = N * h
    n = np.fft.fftfreq(N, d=1.0 / N).round().astype(int)
    p = 2 * np.pi * n / L
    c = (h / np.sqrt(L)) * np.exp(-1j * p * a) * np.fft.fft(psi.values)
    order = np.argsort(n, kind="stable")
    n, p, c = n[order], p[order], c[order]
    # inverse: psi_j = sum_n c_n exp(i p_n x_j)/sqrt(L)
    back = np.zeros(N, dtype=complex)
    back[n % N] = c * np.exp(1j * p * a)
    rec = np.fft.ifft(back) * N / np.sqrt(L)
    for arr in (n, p, c):
        arr.setflags(write=False)
    return PlaneWaveExpansion(n, p, c, GridFunction(grid, rec))
