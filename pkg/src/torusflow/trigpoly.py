"""Trigonometric polynomials with exact derivatives of every order.

Two flavours are used by the model builders:

* :class:`TrigPoly1` -- c0 + q*x + sum_j (a_j cos(j x) + b_j sin(j x)),
  the graph function ``phi`` of graph models.  ``q`` integer keeps
  phi(x + 2pi) = phi(x) + 2pi*q.
* :class:`TrigPoly2` -- a finite sum of ``coef * cos(px + qy)`` /
  ``coef * sin(px + qy)`` terms, the user-supplied model components.

Derivatives are computed by coefficient manipulation, never finite
differences, so high-order contact analysis stays exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TrigPoly1:
    """c0 + q*x + sum_j a_j cos(j x) + b_j sin(j x), with integer q."""

    q: int = 0
    c0: float = 0.0
    cos: tuple[float, ...] = ()
    sin: tuple[float, ...] = ()

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = self.c0 + self.q * x
        for j, a in enumerate(self.cos, start=1):
            if a:
                out = out + a * np.cos(j * x)
        for j, b in enumerate(self.sin, start=1):
            if b:
                out = out + b * np.sin(j * x)
        return out if out.ndim else float(out)

    def derivative(self, n: int = 1) -> "TrigPoly1":
        """Exact n-th derivative (again a TrigPoly1; q survives only n=0,1)."""
        if n < 0:
            raise ValueError("derivative order must be >= 0")
        p = self
        for _ in range(n):
            # d/dx [a cos(jx)] = -a j sin(jx); d/dx [b sin(jx)] = b j cos(jx)
            deg = max(len(p.cos), len(p.sin))
            cos = [0.0] * deg
            sin = [0.0] * deg
            for j, a in enumerate(p.cos, start=1):
                sin[j - 1] += -a * j
            for j, b in enumerate(p.sin, start=1):
                cos[j - 1] += b * j
            p = TrigPoly1(q=0, c0=float(p.q), cos=tuple(cos), sin=tuple(sin))
        return p

    def taylor(self, x0: float, nmax: int) -> np.ndarray:
        """Taylor coefficients c[0..nmax] of phi(x0 + t) about t = 0."""
        return np.array(
            [self.derivative(n)(x0) / math.factorial(n) for n in range(nmax + 1)]
        )


@dataclass(frozen=True)
class TrigTerm:
    """coef * {cos|sin}(p x + q y)."""

    kind: str  # "cos" or "sin"
    p: int
    q: int
    coef: float

    def __post_init__(self):
        if self.kind not in ("cos", "sin"):
            raise ValueError(f"unknown term kind {self.kind!r}")


@dataclass(frozen=True)
class TrigPoly2:
    """Finite bivariate trig polynomial: sum of TrigTerm."""

    terms: tuple[TrigTerm, ...] = ()

    def __call__(self, x, y):
        out = 0.0
        for t in self.terms:
            arg = t.p * x + t.q * y
            out += t.coef * (math.cos(arg) if t.kind == "cos" else math.sin(arg))
        return out

    def partial(self, wrt: str) -> "TrigPoly2":
        """Exact partial derivative with respect to "x" or "y"."""
        out = []
        for t in self.terms:
            k = t.p if wrt == "x" else t.q
            if k == 0 or t.coef == 0.0:
                continue
            if t.kind == "cos":
                out.append(TrigTerm("sin", t.p, t.q, -t.coef * k))
            else:
                out.append(TrigTerm("cos", t.p, t.q, t.coef * k))
        return TrigPoly2(tuple(out))

    def fiber_taylor(self, x0: float, y0: float, nmax: int) -> np.ndarray:
        """Taylor coefficients of t -> f(x0 + t, y0) up to order nmax."""
        coefs = np.zeros(nmax + 1)
        p = self
        for n in range(nmax + 1):
            coefs[n] = p(x0, y0) / math.factorial(n)
            p = p.partial("x")
        return coefs


def compose_sin(inner: np.ndarray) -> np.ndarray:
    """Truncated power series of sin(w(t)) for w with w[0] arbitrary.

    ``inner`` holds Taylor coefficients of w(t); the result has the same
    truncation order.  Uses sin(w0 + u) = sin w0 cos u + cos w0 sin u and
    plain polynomial arithmetic on the zero-constant part u(t).
    """
    n = len(inner)
    w0 = inner[0]
    u = np.array(inner, dtype=float)
    u[0] = 0.0
    # powers of u, truncated to n coefficients
    cos_u = np.zeros(n)
    sin_u = np.zeros(n)
    cos_u[0] = 1.0
    term = np.zeros(n)
    term[0] = 1.0  # u^0
    for j in range(1, n):
        term = _poly_mul_trunc(term, u, n)
        if j % 2 == 1:
            sin_u += term * ((-1.0) ** ((j - 1) // 2) / math.factorial(j))
        else:
            cos_u += term * ((-1.0) ** (j // 2) / math.factorial(j))
    return math.sin(w0) * cos_u + math.cos(w0) * sin_u


def _poly_mul_trunc(a: np.ndarray, b: np.ndarray, n: int) -> np.ndarray:
    out = np.convolve(a, b)[:n]
    if len(out) < n:
        out = np.pad(out, (0, n - len(out)))
    return out
