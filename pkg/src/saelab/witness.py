"""Closed-form test functions with exact first and second derivatives.

Witnesses are the explicit functions used to probe domains: smooth
states, singular states that leave an operator or form domain, compactly
supported bumps, Fourier modes. Evaluators are vectorised NumPy callables.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad

from saelab.errors import ValidationError

Evaluator = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SymbolicWitness:
    """A function together with (optionally) its analytic derivatives.

    ``support`` is ``None`` for functions supported on the whole domain, or a
    closed interval ``(lo, hi)`` outside of which the function vanishes.
    """

    f: Evaluator
    df: Evaluator | None = None
    d2f: Evaluator | None = None
    support: tuple[float, float] | None = None
    label: str = ""
    # points where f or a derivative blows up; grids should straddle them
    singular: tuple[float, ...] = ()

    def __call__(self, x):
        return self.f(np.asarray(x, dtype=float))

    def derivative(self, order: int) -> Evaluator:
        if order == 0:
            return self.f
        fn = {1: self.df, 2: self.d2f}.get(order)
        if fn is None:
            raise ValidationError(
                f"witness {self.label or '<anonymous>'} has no derivative of order {order}"
            )
        return fn

    def has_derivative(self, order: int) -> bool:
        return order == 0 or {1: self.df, 2: self.d2f}.get(order) is not None

    @property
    def compact(self) -> bool:
        return self.support is not None

    # -- linear structure -------------------------------------------------
    def __add__(self, other: SymbolicWitness) -> SymbolicWitness:
        return _combine(self, other, 1.0, 1.0)

    def __sub__(self, other: SymbolicWitness) -> SymbolicWitness:
        return _combine(self, other, 1.0, -1.0)

    def __mul__(self, other) -> SymbolicWitness:
        if isinstance(other, SymbolicWitness):
            return _product(self, other)
        return scale(self, complex(other))

    def __rmul__(self, alpha) -> SymbolicWitness:
        return scale(self, complex(alpha))

    def __neg__(self) -> SymbolicWitness:
        return scale(self, -1.0)

    def conj(self) -> SymbolicWitness:
        def lift(fn):
            return None if fn is None else (lambda x: np.conj(fn(x)))

        return SymbolicWitness(lift(self.f), lift(self.df), lift(self.d2f), self.support,
                               f"conj({self.label})", self.singular)


def scale(w: SymbolicWitness, alpha: complex) -> SymbolicWitness:
    def lift(fn):
        return None if fn is None else (lambda x: alpha * fn(x))

    return SymbolicWitness(lift(w.f), lift(w.df), lift(w.d2f), None if alpha == 0 else w.support,
                           f"{alpha:g}*{w.label}", w.singular)


def _hull(s, t):
    if s is None or t is None:
        return None
    return (min(s[0], t[0]), max(s[1], t[1]))


def _overlap(s, t):
    if s is None:
        return t
    if t is None:
        return s
    lo, hi = max(s[0], t[0]), min(s[1], t[1])
    return (lo, max(lo, hi))


def _combine(u: SymbolicWitness, w: SymbolicWitness, a: complex, b: complex) -> SymbolicWitness:
    def lift(p, q):
        if p is None or q is None:
            return None
        return lambda x: a * p(x) + b * q(x)

    return SymbolicWitness(lift(u.f, w.f), lift(u.df, w.df), lift(u.d2f, w.d2f),
                           _hull(u.support, w.support), f"({u.label}{'+' if b == 1 else '-'}{w.label})",
                           tuple(sorted(set(u.singular) | set(w.singular))))


def _product(u: SymbolicWitness, w: SymbolicWitness) -> SymbolicWitness:
    df = d2f = None
    if u.df is not None and w.df is not None:
        def df(x):
            return u.df(x) * w.f(x) + u.f(x) * w.df(x)

        if u.d2f is not None and w.d2f is not None:
            def d2f(x):
                return u.d2f(x) * w.f(x) + 2 * u.df(x) * w.df(x) + u.f(x) * w.d2f(x)

    return SymbolicWitness(lambda x: u.f(x) * w.f(x), df, d2f, _overlap(u.support, w.support),
                           f"{u.label}*{w.label}", tuple(sorted(set(u.singular) | set(w.singular))))


def derivative_check(w: SymbolicWitness, points, step: float = 1e-4) -> float:
    """Largest relative discrepancy between ``df``/``d2f`` and centred differences.

    The scale is max(1, |f'|) resp. max(1, |f''|) so that zeros of the
    derivative do not blow the ratio up.
    """
    x = np.asarray(points, dtype=float)
    worst = 0.0
    if w.df is not None:
        fd = (w.f(x + step) - w.f(x - step)) / (2 * step)
        ex = w.df(x)
        worst = max(worst, float(np.max(np.abs(fd - ex) / np.maximum(1.0, np.abs(ex)))))
    if w.d2f is not None:
        fd = (w.df(x + step) - w.df(x - step)) / (2 * step) if w.df is not None else (
            (w.f(x + step) - 2 * w.f(x) + w.f(x - step)) / step**2)
        ex = w.d2f(x)
        worst = max(worst, float(np.max(np.abs(fd - ex) / np.maximum(1.0, np.abs(ex)))))
    return worst


# ---------------------------------------------------------------------------
# catalogue
# ---------------------------------------------------------------------------

def constant(c: complex = 1.0, label: str | None = None) -> SymbolicWitness:
    c = complex(c)
    return SymbolicWitness(
        lambda x: np.full(np.shape(x), c),
        lambda x: np.zeros(np.shape(x), dtype=complex),
        lambda x: np.zeros(np.shape(x), dtype=complex),
        label=label or f"{c:g}",
    )


def polynomial(coeffs, label: str | None = None) -> SymbolicWitness:
    """``sum_k coeffs[k] x**k`` with complex coefficients, lowest order first."""
    p = np.polynomial.Polynomial(np.asarray(coeffs, dtype=complex))
    d1, d2 = p.deriv(1), p.deriv(2)
    return SymbolicWitness(
        lambda x: p(np.asarray(x, dtype=float)),
        lambda x: d1(np.asarray(x, dtype=float)),
        lambda x: d2(np.asarray(x, dtype=float)),
        label=label or f"poly{tuple(np.round(p.coef, 6))}",
    )


def quadratic_12i() -> SymbolicWitness:
    """``6 x^2 + (i - 2)``: in H^2(0,1) but with non-real kinetic expectation."""
    return polynomial([-2 + 1j, 0, 6], label="6x^2+(i-2)")


def power_gaussian(p: float, alpha: float = 1.0) -> SymbolicWitness:
    """``|x|^p exp(-alpha x^2)`` with derivatives valid away from x = 0."""
    a = float(alpha)

    def f(x):
        return np.abs(x) ** p * np.exp(-a * x * x) + 0j

    def df(x):
        return np.sign(x) * np.abs(x) ** (p - 1) * (p - 2 * a * x * x) * np.exp(-a * x * x) + 0j

    def d2f(x):
        x2 = x * x
        poly = p * (p - 1) - (4 * p + 2) * a * x2 + 4 * a * a * x2 * x2
        return np.abs(x) ** (p - 2) * poly * np.exp(-a * x2) + 0j

    if p == 0:
        return gaussian(alpha)
    sing = (0.0,) if p < 2 else ()
    return SymbolicWitness(f, df, d2f, label=f"|x|^{p:g} exp(-{a:g}x^2)", singular=sing)


def gaussian(alpha: float = 1.0, center: float = 0.0) -> SymbolicWitness:
    a, c = float(alpha), float(center)

    def f(x):
        return np.exp(-a * (x - c) ** 2) + 0j

    def df(x):
        return -2 * a * (x - c) * np.exp(-a * (x - c) ** 2) + 0j

    def d2f(x):
        u = x - c
        return (4 * a * a * u * u - 2 * a) * np.exp(-a * u * u) + 0j

    return SymbolicWitness(f, df, d2f, label=f"exp(-{a:g}(x-{c:g})^2)")


def sine_mode(n: int, a: float = 0.0, b: float = 1.0) -> SymbolicWitness:
    """Normalised Dirichlet mode ``sqrt(2/L) sin(n pi (x-a)/L)``."""
    L = b - a
    k = n * np.pi / L
    c = np.sqrt(2.0 / L)
    return SymbolicWitness(
        lambda x: c * np.sin(k * (x - a)) + 0j,
        lambda x: c * k * np.cos(k * (x - a)) + 0j,
        lambda x: -c * k * k * np.sin(k * (x - a)) + 0j,
        label=f"sqrt(2/L)sin({n}pi x/L)",
    )


def cosine_mode(n: int, amplitude: float = np.sqrt(2.0), a: float = 0.0, b: float = 1.0) -> SymbolicWitness:
    L = b - a
    k = n * np.pi / L
    return SymbolicWitness(
        lambda x: amplitude * np.cos(k * (x - a)) + 0j,
        lambda x: -amplitude * k * np.sin(k * (x - a)) + 0j,
        lambda x: -amplitude * k * k * np.cos(k * (x - a)) + 0j,
        label=f"{amplitude:g}cos({n}pi x/L)",
    )


def plane_wave(k: float, a: float = 0.0, b: float = 1.0) -> SymbolicWitness:
    """``exp(i k (x - a)) / sqrt(L)``, normalised on [a, b]."""
    c = 1.0 / np.sqrt(b - a)
    return SymbolicWitness(
        lambda x: c * np.exp(1j * k * (x - a)),
        lambda x: 1j * k * c * np.exp(1j * k * (x - a)),
        lambda x: -k * k * c * np.exp(1j * k * (x - a)),
        label=f"exp(i{k:g}x)",
    )


def bump(center: float = 0.5, halfwidth: float = 0.25, amplitude: float = 1.0) -> SymbolicWitness:
    """``exp(-1/(1-u^2))`` with ``u = (x - center)/halfwidth``, zero for |u| >= 1."""
    c, w, A = float(center), float(halfwidth), float(amplitude)

    def parts(x):
        u = (np.asarray(x, dtype=float) - c) / w
        inside = np.abs(u) < 1
        s = np.where(inside, 1 - u * u, 1.0)
        phi = np.where(inside, np.exp(-1.0 / s), 0.0)
        return u, s, phi

    def f(x):
        return A * parts(x)[2] + 0j

    def df(x):
        u, s, phi = parts(x)
        return A * phi * (-2 * u / s**2) / w + 0j

    def d2f(x):
        u, s, phi = parts(x)
        q1 = -2 * u / s**2
        q2 = -(2 + 6 * u * u) / s**3
        return A * phi * (q2 + q1 * q1) / w**2 + 0j

    return SymbolicWitness(f, df, d2f, support=(c - w, c + w), label=f"bump({c:g},{w:g})")


def l2_norm(w: SymbolicWitness, a: float, b: float) -> float:
    """Adaptive-quadrature ``||w||`` on ``[a, b]`` (restricted to the support if declared)."""
    lo, hi = (a, b) if w.support is None else (max(a, w.support[0]), min(b, w.support[1]))
    if hi <= lo:
        return 0.0
    val, _ = quad(lambda x: float(np.abs(w.f(np.array([x]))[0]) ** 2), lo, hi,
                  limit=200, epsabs=1e-15, epsrel=1e-13)
    return float(np.sqrt(val))


def normalized(w: SymbolicWitness, a: float, b: float) -> SymbolicWitness:
    n = l2_norm(w, a, b)
    if n == 0:
        raise ValidationError("cannot normalise the zero function")
    out = scale(w, 1.0 / n)
    return SymbolicWitness(out.f, out.df, out.d2f, w.support, f"{w.label}/||.||", w.singular)


def standard_bump() -> SymbolicWitness:
    """Unit-norm ``exp(-1/(1-u^2))``, ``u = 4(x - 1/2)``: supported on [1/4, 3/4]."""
    return normalized(bump(0.5, 0.25), 0.0, 1.0)


@dataclass(frozen=True)
class ReallySimple:
    """Finite combination of constants on disjoint bounded intervals.

    Integrals of ``|psi|^2 x^k`` are exact; no grid is involved.
    """

    pieces: tuple[tuple[float, float, complex], ...]
    label: str = ""

    def __post_init__(self):
        spans = sorted((lo, hi) for lo, hi, _ in self.pieces)
        for lo, hi in spans:
            if not lo < hi:
                raise ValidationError(f"empty piece [{lo}, {hi}]")
        for (_, h1), (l2, _) in zip(spans, spans[1:]):
            if l2 < h1:
                raise ValidationError("pieces of a really simple function must be disjoint")

    @classmethod
    def indicator(cls, lo: float, hi: float) -> ReallySimple:
        return cls(((float(lo), float(hi), 1.0),), label=f"1_[{lo:g},{hi:g}]")

    def moment(self, k: int) -> float:
        """``integral x^k |psi(x)|^2 dx``."""
        return float(sum(abs(c) ** 2 * (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)
                         for lo, hi, c in self.pieces))

    def norm(self) -> float:
        return float(np.sqrt(self.moment(0)))

    @property
    def support(self):
        return (min(p[0] for p in self.pieces), max(p[1] for p in self.pieces))

    def f(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=complex)
        for lo, hi, c in self.pieces:
            out[(x >= lo) & (x <= hi)] = c
        return out
