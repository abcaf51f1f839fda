"""Slow divergence integral along critical curves.

In slow time s the drift along a critical curve is dy/ds = g, so the
divergence integral of the frozen fast field becomes

    I = integral over one loop of  f_x / g  dy,

traversed in the direction of the slow flow.  Attracting loops give
negative values, repelling loops positive ones; the magnitude controls
the Floquet multiplier exp(I / eps) of the bifurcating limit cycle.

Two routes are provided: a closed form for the sine-link family and
adaptive quadrature for everything else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from .geometry import TAU
from .models import CriticalCurve, SlowFastModel

QUAD_REL_TOL = 1e-8
QUAD_ABS_TOL = 1e-12


class SlowFlowError(ValueError):
    """Slow drift vanishes on the curve: the integral is undefined."""


class UnsupportedContactError(ValueError):
    """Curve carries contacts the integral cannot pass through."""


@dataclass(frozen=True)
class SdiValue:
    value: float
    curve_index: int
    method: str  # "analytic" | "quadrature"
    est_error: float

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "curve_index": self.curve_index,
            "method": self.method,
            "est_error": self.est_error,
        }


def _check_preconditions(model: SlowFastModel, curve: CriticalCurve):
    s = curve.samples
    g_min = min(abs(model.g(x, y, 0.0)) for x, y in s[:: max(1, len(s) // 800)])
    if g_min < 1e-9:
        raise SlowFlowError(
            f"slow drift vanishes on curve {curve.index} (min |g| = {g_min:.3g})"
        )
    for cp in curve.contacts:
        if not (cp.regular and cp.odd and cp.order is not None):
            raise UnsupportedContactError(
                f"curve {curve.index} has a non-odd or irregular contact at "
                f"({cp.location.x:.4f}, {cp.location.y:.4f})"
            )
    if curve.stability == 0:
        raise UnsupportedContactError(
            f"curve {curve.index} has mixed stability; integral sign undefined"
        )


def _analytic_value(model: SlowFastModel, curve: CriticalCurve) -> float | None:
    if model.kind != "sine":
        return None
    m, k = model.params["m"], model.params["k"]
    # on the curve f_x = -+ m k and the loop spans 2 pi k in y, so
    # I = stability * 2 pi m k^2 for both the unit and the cosine drift
    return curve.stability * TAU * m * k * k


def _integrand_and_span(model: SlowFastModel, curve: CriticalCurve):
    """Return (integrand(sigma), span, orientation) in the curve's natural
    parameter, such that I = orientation * integral(span) integrand."""
    p = curve.param
    if p.kind == "sine":
        k, l = model.params["k"], model.params["l"]
        x0, y0 = p.x0, p.y0

        def integrand(s):
            x, y = x0 + l * s, y0 + k * s
            return model.f_x(x, y) / model.g(x, y, 0.0) * k

        eta = 1.0 if model.g(x0, y0, 0.0) > 0 else -1.0
        return integrand, (0.0, TAU), eta

    axis, other = p.axis_vals, p.other_vals
    if p.kind == "x":

        def solve_other(x):
            y = float(np.interp(x, axis, other))
            for _ in range(20):
                v = model.f(x, y)
                d = model.f_y(x, y)
                step = v / d
                y -= step
                if abs(step) < 1e-14:
                    break
            return y

        def integrand(x):
            y = solve_other(x)
            fx = model.f_x(x, y)
            yp = -fx / model.f_y(x, y)
            return fx * yp / model.g(x, y, 0.0)

        # orientation: slow flow has dx/ds = g / y'(x); sample at max |y'|
        yp_s = np.gradient(other, axis)
        i_ref = int(np.argmax(np.abs(yp_s)))
        g_ref = model.g(axis[i_ref], other[i_ref], 0.0)
        eta = 1.0 if g_ref * yp_s[i_ref] > 0 else -1.0
        return integrand, (float(axis[0]), float(axis[-1])), eta

    if p.kind == "y":

        def solve_other_y(y):
            x = float(np.interp(y, axis, other))
            for _ in range(20):
                v = model.f(x, y)
                d = model.f_x(x, y)
                step = v / d
                x -= step
                if abs(step) < 1e-14:
                    break
            return x

        def integrand(y):
            x = solve_other_y(y)
            return model.f_x(x, y) / model.g(x, y, 0.0)

        i_ref = len(axis) // 2
        g_ref = model.g(other[i_ref], axis[i_ref], 0.0)
        eta = 1.0 if g_ref > 0 else -1.0  # axis is stored increasing in y
        return integrand, (float(axis[0]), float(axis[-1])), eta

    raise ValueError(f"unknown curve parametrization {p.kind!r}")


def slow_divergence_integral(
    model: SlowFastModel, curve: CriticalCurve, method: str = "auto"
) -> SdiValue:
    """Slow divergence integral of one critical curve.

    ``method`` "auto" uses the closed form where one exists (sine-link
    family) and adaptive quadrature otherwise; "analytic" and
    "quadrature" force the route.
    """
    _check_preconditions(model, curve)
    if method not in ("auto", "analytic", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    if method in ("auto", "analytic"):
        value = _analytic_value(model, curve)
        if value is not None:
            return SdiValue(value, curve.index, "analytic", 0.0)
        if method == "analytic":
            raise ValueError(f"no closed form for model kind {model.kind!r}")
    integrand, (lo, hi), eta = _integrand_and_span(model, curve)
    val, err = quad(
        integrand, lo, hi, epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, limit=300
    )
    return SdiValue(eta * val, curve.index, "quadrature", abs(err))


def sdi_by_segments(
    model: SlowFastModel, curve: CriticalCurve, breakpoints
) -> SdiValue:
    """Sum of per-segment integrals over a partition of the loop.

    ``breakpoints`` are values of the curve's natural parameter ordered
    along the slow-flow direction; the closing segment (last back to
    first plus one loop) is implicit.  Partition choice cannot change the
    value beyond quadrature error.
    """
    _check_preconditions(model, curve)
    integrand, (lo, hi), eta = _integrand_and_span(model, curve)
    span = hi - lo
    b = np.asarray(list(breakpoints), dtype=float)
    if len(b) < 1:
        raise ValueError("need at least one breakpoint")
    # orientation along slow flow: ascending parameter when eta > 0
    diffs = np.diff(b)
    if eta > 0:
        if np.any(diffs <= 0):
            raise ValueError("breakpoints not ordered along the slow flow")
    else:
        if np.any(diffs >= 0):
            raise ValueError("breakpoints not ordered along the slow flow")
        b = b[::-1]
    if b[-1] - b[0] >= span:
        raise ValueError("breakpoints span more than one loop")
    total = 0.0
    err_total = 0.0
    edges = list(b) + [b[0] + span]
    for a, c in zip(edges[:-1], edges[1:]):
        # reduce into the base interval [lo, hi] allowing one wrap
        val, err = _quad_wrapped(integrand, a, c, lo, hi)
        total += val
        err_total += err
    return SdiValue(eta * total, curve.index, "quadrature", err_total)


def _quad_wrapped(integrand, a, c, lo, hi):
    """Integrate over [a, c] treating the parameter as periodic on [lo, hi]."""
    span = hi - lo
    shift = math.floor((a - lo) / span) * span
    a, c = a - shift, c - shift
    if c <= hi + 1e-15:
        return quad(integrand, a, min(c, hi), epsabs=QUAD_ABS_TOL,
                    epsrel=QUAD_REL_TOL, limit=300)
    v1, e1 = quad(integrand, a, hi, epsabs=QUAD_ABS_TOL, epsrel=QUAD_REL_TOL, limit=300)
    v2, e2 = quad(integrand, lo, c - span, epsabs=QUAD_ABS_TOL,
                  epsrel=QUAD_REL_TOL, limit=300)
    return v1 + v2, e1 + e2
