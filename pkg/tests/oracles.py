"""Reference computations that share no code path with the package."""

import numpy as np
from scipy.special import eval_hermite, factorial


def dirichlet_discrete_levels(n, h):
    """Exact eigenvalues of the second-difference matrix with zero end values."""
    n = np.asarray(n, dtype=float)
    return 4.0 / h**2 * np.sin(n * np.pi * h / 2) ** 2


def hermite_function(n, x):
    """Normalised eigenfunctions of -d^2/dx^2 + x^2."""
    c = 1.0 / np.sqrt(2.0**n * factorial(n) * np.sqrt(np.pi))
    return c * eval_hermite(n, x) * np.exp(-x**2 / 2)


def bump_values(x):
    """exp(-1/(1-u^2)) on |u| < 1 with u = (x - 1/2)/(1/4), normalised separately."""
    u = (np.asarray(x) - 0.5) / 0.25
    out = np.zeros_like(u)
    inside = np.abs(u) < 1
    out[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    return out


def nonuniqueness_distance(t, nmax=800, mmax=400, nodes=2500):
    """Dirichlet vs periodic evolution of the unit bump by Gauss-Legendre quadrature.

    Coefficients are integrated over the bump support, both series are
    summed pointwise and the distance integrated over [0, 1].
    """
    xs, ws = np.polynomial.legendre.leggauss(nodes)
    xc, wc = 0.5 + 0.25 * xs, 0.25 * ws
    f = bump_values(xc)
    f = f / np.sqrt(np.sum(wc * f**2))
    n = np.arange(1, nmax + 1)
    m = np.arange(-mmax, mmax + 1)
    a = (np.sqrt(2) * np.sin(np.pi * np.outer(n, xc))) @ (wc * f)
    b = np.exp(-2j * np.pi * np.outer(m, xc)) @ (wc * f)
    a = a * np.exp(-1j * np.pi**2 * n**2 * t)
    b = b * np.exp(-4j * np.pi**2 * m**2 * t)
    x, w = 0.5 + 0.5 * xs, 0.5 * ws
    psi_d = a @ (np.sqrt(2) * np.sin(np.pi * np.outer(n, x)))
    psi_p = b @ np.exp(2j * np.pi * np.outer(m, x))
    return float(np.sqrt(np.sum(w * np.abs(psi_d - psi_p) ** 2)))
