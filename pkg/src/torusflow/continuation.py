"""Predictor-corrector tracing of implicit zero curves f(x, y) = 0 on the torus.

Generic machinery for models whose critical set has no exact closed-form
parametrization: tangent predictor, Newton corrector along the gradient
(orthogonal to the tangent), adaptive step in [1e-3, 1e-1], termination on
torus closure of the lift.
"""

from __future__ import annotations

import math

import numpy as np
from scipy.optimize import brentq

from .geometry import TAU

STEP_MIN = 1e-3
STEP_MAX = 1e-1


class ContinuationError(RuntimeError):
    """Step collapse or a curve that refuses to close."""


def newton_project(f, fx, fy, p, tol=1e-12, max_iter=12):
    """Project a point onto {f = 0} by Newton steps along the gradient."""
    x, y = float(p[0]), float(p[1])
    for _ in range(max_iter):
        v = f(x, y)
        if abs(v) < tol:
            return np.array([x, y]), True
        gx, gy = fx(x, y), fy(x, y)
        n2 = gx * gx + gy * gy
        if n2 < 1e-14:
            return np.array([x, y]), False
        x -= v * gx / n2
        y -= v * gy / n2
    return np.array([x, y]), abs(f(x, y)) < 10 * tol


def _tangent(fx, fy, p, prev=None):
    gx, gy = fx(p[0], p[1]), fy(p[0], p[1])
    t = np.array([-gy, gx])
    n = float(np.hypot(*t))
    if n < 1e-14:
        raise ContinuationError(f"singular gradient at {p}")
    t /= n
    if prev is not None and float(t @ prev) < 0.0:
        t = -t
    return t


def trace_zero_curve(f, fx, fy, start, max_length=500.0):
    """Trace the closed zero curve of ``f`` through ``start``.

    Returns lift samples (n, 2) whose last row is the first shifted by the
    integer lattice displacement accumulated over one torus loop.
    """
    p0, ok = newton_project(f, fx, fy, np.asarray(start, dtype=float))
    if not ok:
        raise ContinuationError(f"seed {start} does not converge onto the curve")
    pts = [p0]
    t_prev = _tangent(fx, fy, p0)
    t0 = t_prev.copy()
    h = 1e-2
    length = 0.0
    p = p0
    while length < max_length:
        t_hat = _tangent(fx, fy, p, prev=t_prev)
        accepted = False
        while h >= STEP_MIN * 0.999:
            q, ok = newton_project(f, fx, fy, p + h * t_hat)
            if ok and float(np.hypot(*(q - p))) < 2.0 * h:
                accepted = True
                break
            h = max(STEP_MIN, h / 2.0)
            if h <= STEP_MIN * 1.001 and not accepted:
                q, ok = newton_project(f, fx, fy, p + h * t_hat)
                accepted = ok
                break
        if not accepted:
            raise ContinuationError("corrector failed at minimal step")
        step = float(np.hypot(*(q - p)))
        length += step
        pts.append(q)
        p = q
        t_prev = _tangent(fx, fy, q, prev=t_hat)
        # closure test against every lattice translate of the start point
        rel = q - p0
        lattice = TAU * np.round(rel / TAU)
        gap = float(np.hypot(*(rel - lattice)))
        if length > 2.0 and gap < 1.2 * h and float(t_prev @ t0) > 0.8:
            end = p0 + lattice
            # drop samples that already stepped past the closing point
            while len(pts) > 1 and float((pts[-1] - end) @ t0) > -1e-12:
                pts.pop()
            pts.append(end)
            return np.asarray(pts)
        h = min(STEP_MAX, h * 1.3)
    raise ContinuationError(f"curve did not close within lift length {max_length}")


def refine_to_resolution(f, fx, fy, samples, max_gap):
    """Subdivide polyline samples and re-project so every gap <= max_gap
    and every sample satisfies |f| < ~1e-12."""
    out = [samples[0]]
    for a, b in zip(samples[:-1], samples[1:]):
        gap = float(np.hypot(*(b - a)))
        n = max(1, int(math.ceil(gap / max_gap)))
        for i in range(1, n + 1):
            guess = a + (b - a) * (i / n)
            q, ok = newton_project(f, fx, fy, guess)
            if not ok:
                raise ContinuationError("refinement lost the curve")
            out.append(q)
    return np.asarray(out)


def fiber_roots(h, lo=0.0, hi=TAU, n_scan=720):
    """Roots of a smooth scalar function on [lo, hi) found by sign scanning."""
    xs = np.linspace(lo, hi, n_scan, endpoint=False)
    vals = np.array([h(x) for x in xs])
    roots = []
    for i in range(n_scan):
        a, b = xs[i], xs[(i + 1) % n_scan] if i + 1 < n_scan else hi
        va, vb = vals[i], vals[(i + 1) % n_scan]
        if va == 0.0:
            roots.append(float(a))
        elif va * vb < 0.0:
            roots.append(float(brentq(h, a, a + (hi - lo) / n_scan)))
    # dedupe near-equal roots (mod period)
    out = []
    for r in sorted(roots):
        if not out or (r - out[-1]) > 1e-9:
            out.append(r)
    if len(out) >= 2 and (out[0] + (hi - lo) - out[-1]) < 1e-9:
        out.pop()
    return out
