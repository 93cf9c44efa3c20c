"""Self-contained symmetric eigensolver.

Householder reduction to tridiagonal form followed by implicit QL
iterations with Wilkinson-type shifts. Complex Hermitian input goes through
the real symmetric embedding ``[[Re, -Im], [Im, Re]]``; its doubled
eigenvalues are paired and the complex eigenvectors recovered.

Everything here is O(n^3) in interpreted loops over vectorised updates,
so it is meant for moderate sizes (a few hundred).
"""

from __future__ import annotations

import math

import numpy as np

from saelab.errors import ConvergenceError, NumericalError

MAX_SWEEPS = 50
NEGLIGIBLE = 1e-200


def _norm(x: np.ndarray) -> float:
    # numpy's norm squares entries, which underflows below ~1e-154
    top = float(np.max(np.abs(x), initial=0.0))
    return 0.0 if top == 0.0 else top * float(np.linalg.norm(x / top))


def tridiagonalize(A: np.ndarray):
    """Householder reduction ``A = Q T Q^T``.

    Returns
    -------
    d : ndarray, diagonal of ``T``
    e : ndarray, sub-diagonal of ``T`` (length n-1)
    Q : ndarray, orthogonal
    """
    A = np.array(A, dtype=float)
    n = A.shape[0]
    Q = np.eye(n)
    for k in range(n - 2):
        x = A[k + 1:, k]
        alpha = _norm(x)
        if alpha == 0.0:
            continue
        if x[0] > 0:
            alpha = -alpha
        v = x.copy()
        v[0] -= alpha
        # unit reflector: squaring tiny entries would underflow
        vnorm = _norm(v)
        if vnorm == 0.0:
            continue
        v /= vnorm
        beta = 2.0
        sub = A[k + 1:, k + 1:]
        p = beta * (sub @ v)
        q = p - 0.5 * beta * (v @ p) * v
        sub -= np.outer(v, q) + np.outer(q, v)
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0
        A[k + 1, k] = A[k, k + 1] = alpha
        Q[:, k + 1:] -= beta * np.outer(Q[:, k + 1:] @ v, v)
    d = np.diag(A).copy()
    e = np.diag(A, -1).copy()
    return d, e, Q


def tridiagonal_ql(d, e, Z=None, max_sweeps: int = MAX_SWEEPS):
    """Implicit QL on the symmetric tridiagonal matrix ``(d, e)``.

    ``Z`` (default identity) is right-multiplied by the accumulated rotations,
    so passing the Householder ``Q`` yields eigenvectors of the original
    matrix. Eigenvalues come back ascending.
    """
    d = np.array(d, dtype=float)
    n = d.size
    ee = np.zeros(n)
    ee[: n - 1] = e
    Z = np.eye(n) if Z is None else np.array(Z, dtype=float)
    eps = np.finfo(float).eps
    # absolute floor: off-diagonals below eps * ||T|| are negligible even when
    # the neighbouring diagonal entries are zero
    floor = eps * float(np.max(np.abs(d) + np.abs(ee) + np.abs(np.roll(ee, 1)), initial=0.0))
    floor = max(floor, np.finfo(float).tiny)
    for l in range(n):
        sweeps = 0
        while True:
            m = l
            while m < n - 1:
                dd = abs(d[m]) + abs(d[m + 1])
                if abs(ee[m]) <= eps * dd or abs(ee[m]) <= floor:
                    break
                m += 1
            if m == l:
                break
            sweeps += 1
            if sweeps > max_sweeps:
                raise ConvergenceError(f"QL iteration did not converge for eigenvalue {l} after {max_sweeps} sweeps")
            g = (d[l + 1] - d[l]) / (2.0 * ee[l])
            r = math.hypot(g, 1.0)
            g = d[m] - d[l] + ee[l] / (g + math.copysign(r, g))
            s = c = 1.0
            p = 0.0
            deflated = False
            for i in range(m - 1, l - 1, -1):
                f = s * ee[i]
                b = c * ee[i]
                r = math.hypot(f, g)
                ee[i + 1] = r
                if r == 0.0:
                    d[i + 1] -= p
                    ee[m] = 0.0
                    deflated = True
                    break
                s, c = f / r, g / r
                g = d[i + 1] - p
                r = (d[i] - g) * s + 2.0 * c * b
                p = s * r
                d[i + 1] = g + p
                g = c * r - b
                zi = Z[:, i].copy()
                Z[:, i] = c * zi - s * Z[:, i + 1]
                Z[:, i + 1] = s * zi + c * Z[:, i + 1]
            if deflated:
                continue
            d[l] -= p
            ee[l] = g
            ee[m] = 0.0
    order = np.argsort(d, kind="stable")
    return d[order], Z[:, order]


def eigh_real(A: np.ndarray):
    """Eigenpairs of a real symmetric matrix, ascending."""
    A = np.asarray(A, dtype=float)
    if A.shape[0] == 1:
        return A[0].copy(), np.ones((1, 1))
    # power-of-two scaling to unit size keeps the rotations clear of underflow
    top = float(np.max(np.abs(A)))
    if top == 0.0:
        return np.zeros(A.shape[0]), np.eye(A.shape[0])
    shift = -math.frexp(top)[1]
    As = np.ldexp(A, shift)
    # entries this far below the unit scale are far inside rounding error;
    # dropping them keeps the reduction out of subnormal arithmetic
    As[np.abs(As) < NEGLIGIBLE] = 0.0
    d, e, Q = tridiagonalize(As)
    lam, Z = tridiagonal_ql(d, e, Q)
    return np.ldexp(lam, -shift), Z


def eigh_hermitian(H: np.ndarray, pair_tol: float = 1e-10):
    """Eigenpairs of a complex Hermitian matrix via the real embedding."""
    H = np.asarray(H, dtype=complex)
    n = H.shape[0]
    R, I = H.real, H.imag
    M = np.block([[R, -I], [I, R]])
    lam, V = eigh_real(M)
    Zc = V[:n, :] + 1j * V[n:, :]
    vals, vecs = [], []
    scale = max(1.0, float(np.max(np.abs(lam))))
    i = 0
    while i < 2 * n:
        j = i + 1
        while j < 2 * n and lam[j] - lam[j - 1] <= pair_tol * scale:
            j += 1
        size = j - i
        if size % 2:
            raise NumericalError(
                f"embedded eigenvalues near {lam[i]:.6g} do not pair up (cluster of size {size})"
            )
        k = size // 2
        U, sv, _ = np.linalg.svd(Zc[:, i:j], full_matrices=False)
        vecs.append(U[:, :k])
        vals.extend([float(np.mean(lam[i:j]))] * k)
        i = j
    return np.array(vals), np.hstack(vecs)
