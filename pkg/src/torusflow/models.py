"""Slow-fast model families on the torus and their critical curves.

Every model is a skew product

    dx/dt = f(x, y; rho),   dy/dt = eps * g(x, y, eps; rho)

with f, g 2pi-periodic in both angles, so the fast foliation is horizontal
and the critical set {f = 0} is a disjoint union of closed curves.  Three
families are built in:

* ``sine_link_model(m, k, l)`` -- f = sin(m(l*y - k*x)), whose 2m critical
  curves are (k, l)-torus knots with alternating stability;
* ``graph_model(phi)``        -- f = sin(y - phi(x)), two critical curves
  y = phi(x) + j*pi that may carry nilpotent contact points;
* ``trig_model(f, g)``        -- arbitrary bivariate trig polynomials,
  loaded from JSON coefficient matrices.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from . import continuation
from .geometry import (
    TAU,
    ClosedCurve,
    CURVE_RESOLUTION,
    TorusPoint,
    WindingPair,
    winding,
    wrap_point,
    wrap_to_pi,
)
from .trigpoly import TrigPoly1, TrigPoly2, TrigTerm, compose_sin

MAX_CONTACT_ORDER = 7
CONTACT_DERIV_TOL = 1e-7
HYPERBOLICITY_TOL = 1e-6
SLOW_REGULARITY_TOL = 1e-6
ON_CURVE_TOL = 1e-9


class ModelError(ValueError):
    """Invalid model parameters or malformed model input."""


@dataclass
class ContactPoint:
    """A nilpotent tangency of a critical curve with the fast foliation."""

    location: TorusPoint
    order: int | None  # None: undetermined beyond MAX_CONTACT_ORDER
    regular: bool
    odd: bool

    def to_dict(self) -> dict:
        return {
            "x": self.location.x,
            "y": self.location.y,
            "order": self.order,
            "regular": self.regular,
            "odd": self.odd,
        }


@dataclass
class CurveParam:
    """How a critical curve is parametrized for exact re-evaluation.

    kind "sine":  (x, y)(s) = (x0 + l s, y0 + k s), s in [0, 2pi]
    kind "x":     parametrized by lifted x over [x_lo, x_hi], y solved
                  from f(x, .) = 0 near an interpolated guess
    kind "y":     parametrized by lifted y likewise (normally hyperbolic)
    """

    kind: str
    x0: float = 0.0
    y0: float = 0.0
    span: tuple[float, float] = (0.0, TAU)
    axis_vals: np.ndarray | None = None  # monotone lift of the parameter axis
    other_vals: np.ndarray | None = None


@dataclass
class CriticalCurve:
    curve: ClosedCurve
    winding: WindingPair
    stability: int  # -1 attracting, +1 repelling, 0 mixed
    contacts: list[ContactPoint]
    index: int
    param: CurveParam

    @property
    def samples(self) -> np.ndarray:
        return self.curve.samples


@dataclass
class SlowFastModel:
    """A slow-fast skew-product family with exact first partials."""

    label: str
    f: Callable[[float, float], float]
    g: Callable[[float, float, float], float]
    f_x: Callable[[float, float], float]
    f_y: Callable[[float, float], float]
    g_x: Callable[[float, float, float], float]
    g_y: Callable[[float, float, float], float]
    kind: str  # "sine" | "graph" | "trig"
    params: dict = field(default_factory=dict)
    f_xx: Callable[[float, float], float] | None = None
    f_xy: Callable[[float, float], float] | None = None

    def __post_init__(self):
        self._check_periodicity()

    def divergence(self, x: float, y: float, eps: float) -> float:
        return self.f_x(x, y) + eps * self.g_y(x, y, eps)

    def rhs(self, eps: float, direction: int = 1):
        """Augmented right-hand side (x, y, accumulated divergence)."""
        f, g, fx, gy = self.f, self.g, self.f_x, self.g_y
        s = float(direction)

        def fun(t, state):
            x, y = state[0], state[1]
            return (
                s * f(x, y),
                s * eps * g(x, y, eps),
                s * (fx(x, y) + eps * gy(x, y, eps)),
            )

        return fun

    def fiber_taylor(self, x0: float, y0: float, nmax: int) -> np.ndarray:
        """Taylor coefficients of t -> f(x0 + t, y0), exact per family."""
        if self.kind == "sine":
            m, k, l = self.params["m"], self.params["k"], self.params["l"]
            w = np.zeros(nmax + 1)
            w[0] = m * (l * y0 - k * x0)
            w[1] = -m * k
            return compose_sin(w)
        if self.kind == "graph":
            phi: TrigPoly1 = self.params["phi"]
            pt = phi.taylor(x0, nmax)
            w = -pt
            w[0] = y0 - pt[0]
            return compose_sin(w)
        if self.kind == "trig":
            fpoly: TrigPoly2 = self.params["f_poly"]
            return fpoly.fiber_taylor(x0, y0, nmax)
        raise ModelError(f"unknown model kind {self.kind!r}")

    def _check_periodicity(self, n: int = 100, tol: float = 1e-12):
        rng = np.random.default_rng(0)
        pts = rng.uniform(0.0, TAU, size=(n, 2))
        worst = 0.0
        for x, y in pts:
            worst = max(
                worst,
                abs(self.f(x, y) - self.f(x + TAU, y)),
                abs(self.f(x, y) - self.f(x, y + TAU)),
                abs(self.g(x, y, 0.0) - self.g(x + TAU, y, 0.0)),
                abs(self.g(x, y, 0.0) - self.g(x, y + TAU, 0.0)),
            )
        if worst >= tol:
            raise ModelError(f"model {self.label!r} is not 2pi-periodic (residue {worst:.3g})")


# ---------------------------------------------------------------------------
# built-in families


def sine_link_model(m: int, k: int, l: int, slow_variant: str = "unit") -> SlowFastModel:
    """f = sin(m(l*y - k*x)) with unit or cos(y - x) slow drift.

    Produces 2m critical curves of winding (k, l); requires gcd(k, l) = 1.
    The cosine variant is rejected whenever the slow drift would vanish
    somewhere on a critical curve.
    """
    if m < 1 or k < 1 or l < 0:
        raise ModelError("need m >= 1, k >= 1, l >= 0")
    if math.gcd(k, l) != 1:
        raise ModelError(f"(k, l) = ({k}, {l}) must be coprime")
    if slow_variant not in ("unit", "cosine"):
        raise ModelError(f"unknown slow variant {slow_variant!r}")

    mf, kf, lf = float(m), float(k), float(l)

    def f(x, y):
        return math.sin(mf * (lf * y - kf * x))

    def f_x(x, y):
        return -mf * kf * math.cos(mf * (lf * y - kf * x))

    def f_y(x, y):
        return mf * lf * math.cos(mf * (lf * y - kf * x))

    def f_xx(x, y):
        return -(mf * kf) ** 2 * math.sin(mf * (lf * y - kf * x))

    def f_xy(x, y):
        return mf * mf * kf * lf * math.sin(mf * (lf * y - kf * x))

    if slow_variant == "unit":
        g = lambda x, y, eps: 1.0
        g_x = lambda x, y, eps: 0.0
        g_y = lambda x, y, eps: 0.0
    else:
        g = lambda x, y, eps: math.cos(y - x)
        g_x = lambda x, y, eps: math.sin(y - x)
        g_y = lambda x, y, eps: -math.sin(y - x)
        _reject_vanishing_slow(m, k, l, g)

    suffix = "-cos" if slow_variant == "cosine" else ""
    return SlowFastModel(
        label=f"sine-m{m}-k{k}-l{l}{suffix}",
        f=f, g=g, f_x=f_x, f_y=f_y, g_x=g_x, g_y=g_y,
        f_xx=f_xx, f_xy=f_xy,
        kind="sine",
        params={"m": m, "k": k, "l": l, "slow_variant": slow_variant},
    )


def _reject_vanishing_slow(m, k, l, g, n=2048):
    s = np.linspace(0.0, TAU, n, endpoint=False)
    for j in range(2 * m):
        x0, y0 = _sine_curve_base(m, k, l, j)
        vals = np.abs(np.cos((y0 + k * s) - (x0 + l * s)))
        if float(vals.min()) < 1e-3:
            raise ModelError(
                "cosine slow variant: slow drift vanishes on critical curve "
                f"j={j} of sine-link({m},{k},{l})"
            )


def _sine_curve_base(m: int, k: int, l: int, j: int) -> tuple[float, float]:
    """A point on the j-th critical curve l*y - k*x = j*pi/m (mod 2pi)."""
    c = j * math.pi / m
    if l >= 1:
        return 0.0, c / l
    return (-c / k) % TAU, 0.0


def graph_model(phi, g: TrigPoly2 | None = None, label: str | None = None) -> SlowFastModel:
    """f = sin(y - phi(x)) whose critical curves are the graphs
    y = phi(x) + j*pi, j = 0, 1.

    ``phi`` is a :class:`TrigPoly1` (or a dict of its fields) with integer
    linear coefficient q, so phi(x + 2pi) = phi(x) + 2pi*q and both curves
    wind (q, 1).  Contact points sit at the zeros of phi'.
    """
    if isinstance(phi, dict):
        phi = TrigPoly1(
            q=int(phi.get("q", 0)),
            c0=float(phi.get("const", 0.0)),
            cos=tuple(float(a) for a in phi.get("cos", ())),
            sin=tuple(float(b) for b in phi.get("sin", ())),
        )
    if not isinstance(phi, TrigPoly1):
        raise ModelError("phi must be a TrigPoly1 or a coefficient dict")
    if not all(map(math.isfinite, (phi.c0, *phi.cos, *phi.sin))):
        raise ModelError("phi has non-finite coefficients")
    dphi = phi.derivative()

    def f(x, y):
        return math.sin(y - phi(x))

    def f_x(x, y):
        return -dphi(x) * math.cos(y - phi(x))

    def f_y(x, y):
        return math.cos(y - phi(x))

    d2phi = phi.derivative(2)

    def f_xx(x, y):
        c, s = math.cos(y - phi(x)), math.sin(y - phi(x))
        return -d2phi(x) * c - dphi(x) ** 2 * s

    def f_xy(x, y):
        return dphi(x) * math.sin(y - phi(x))

    if g is None:
        gf = lambda x, y, eps: 1.0
        g_x = lambda x, y, eps: 0.0
        g_y = lambda x, y, eps: 0.0
    else:
        gpx, gpy = g.partial("x"), g.partial("y")
        gf = lambda x, y, eps: g(x, y)
        g_x = lambda x, y, eps: gpx(x, y)
        g_y = lambda x, y, eps: gpy(x, y)

    return SlowFastModel(
        label=label or f"graph-q{phi.q}",
        f=f, g=gf, f_x=f_x, f_y=f_y, g_x=g_x, g_y=g_y,
        f_xx=f_xx, f_xy=f_xy,
        kind="graph",
        params={"phi": phi, "g_poly": g},
    )


def trig_model(f_poly: TrigPoly2, g_poly: TrigPoly2, label: str = "user") -> SlowFastModel:
    """Model from explicit bivariate trig polynomials f and g."""
    fx_p, fy_p = f_poly.partial("x"), f_poly.partial("y")
    fxx_p, fxy_p = fx_p.partial("x"), fx_p.partial("y")
    gx_p, gy_p = g_poly.partial("x"), g_poly.partial("y")
    return SlowFastModel(
        label=label,
        f=lambda x, y: f_poly(x, y),
        g=lambda x, y, eps: g_poly(x, y),
        f_x=lambda x, y: fx_p(x, y),
        f_y=lambda x, y: fy_p(x, y),
        g_x=lambda x, y, eps: gx_p(x, y),
        g_y=lambda x, y, eps: gy_p(x, y),
        f_xx=lambda x, y: fxx_p(x, y),
        f_xy=lambda x, y: fxy_p(x, y),
        kind="trig",
        params={"f_poly": f_poly, "g_poly": g_poly},
    )


def _poly_from_matrices(doc: dict) -> TrigPoly2:
    terms = []
    p_min = int(doc.get("p_min", 0))
    q_min = int(doc.get("q_min", 0))
    for kind in ("cos", "sin"):
        mat = doc.get(kind)
        if mat is None:
            continue
        for i, row in enumerate(mat):
            for j, coef in enumerate(row):
                if coef:
                    terms.append(TrigTerm(kind, p_min + i, q_min + j, float(coef)))
    if not terms:
        raise ModelError("trig polynomial has no nonzero coefficients")
    return TrigPoly2(tuple(terms))


def model_from_json(path_or_doc) -> SlowFastModel:
    """Load a user model from a JSON document.

    Schema: {"label": str, "f": {"cos": [[...]], "sin": [[...]],
    "p_min": int, "q_min": int}, "g": {...}} where matrix entry [i][j]
    multiplies cos/sin((p_min+i) x + (q_min+j) y).
    """
    if isinstance(path_or_doc, dict):
        doc = path_or_doc
    else:
        with open(path_or_doc) as fh:
            doc = json.load(fh)
    try:
        f_poly = _poly_from_matrices(doc["f"])
        g_poly = _poly_from_matrices(doc["g"])
    except KeyError as exc:
        raise ModelError(f"model document missing key {exc}") from exc
    return trig_model(f_poly, g_poly, label=doc.get("label", "user"))


# ---------------------------------------------------------------------------
# critical-curve extraction


def critical_curves(model: SlowFastModel, resolution: float = CURVE_RESOLUTION) -> list[CriticalCurve]:
    """All zero curves of the fast component, closed, with winding,
    stability and contact points attached."""
    if model.kind == "sine":
        return _sine_critical_curves(model, resolution)
    return _traced_critical_curves(model, resolution)


def _sine_critical_curves(model, resolution):
    m, k, l = model.params["m"], model.params["k"], model.params["l"]
    length = TAU * math.hypot(k, l)
    n = max(32, int(math.ceil(length / resolution)))
    s = np.linspace(0.0, TAU, n + 1)
    out = []
    for j in range(2 * m):
        x0, y0 = _sine_curve_base(m, k, l, j)
        pts = np.column_stack([x0 + l * s, y0 + k * s])
        curve = ClosedCurve(pts)
        stability = -1 if j % 2 == 0 else +1
        param = CurveParam(kind="sine", x0=x0, y0=y0, span=(0.0, TAU))
        out.append(
            CriticalCurve(
                curve=curve,
                winding=WindingPair(k, l),
                stability=stability,
                contacts=[],
                index=j,
                param=param,
            )
        )
    return out


def _traced_critical_curves(model, resolution):
    f, fx, fy = model.f, model.f_x, model.f_y
    seeds = []
    for x_scan in (0.37, 2.11):
        seeds += [(x_scan, y) for y in continuation.fiber_roots(lambda y: f(x_scan, y))]
    for y_scan in (0.53, 3.07):
        seeds += [(x, y_scan) for x in continuation.fiber_roots(lambda x: f(x, y_scan))]
    curves = []
    for seed in seeds:
        p = np.array(seed)
        if any(_near_curve(p, c) for c in curves):
            continue
        raw = continuation.trace_zero_curve(f, fx, fy, p)
        samples = continuation.refine_to_resolution(f, fx, fy, raw, resolution)
        curves.append(ClosedCurve(samples))
    curves.sort(key=_fiber_sort_key)
    out = []
    for idx, curve in enumerate(curves):
        contacts = _find_contacts(model, curve)
        stability = _curve_stability(model, curve, contacts)
        param = _monotone_param(model, curve)
        out.append(
            CriticalCurve(
                curve=curve,
                winding=winding(curve),
                stability=stability,
                contacts=contacts,
                index=idx,
                param=param,
            )
        )
    return out


def _near_curve(p, curve: ClosedCurve, tol: float = 2e-2) -> bool:
    d = wrap_to_pi(curve.samples - np.asarray(p))
    return bool(np.min(np.hypot(d[:, 0], d[:, 1])) < tol)


def _fiber_sort_key(curve: ClosedCurve, x_ref: float = 0.37) -> float:
    """Smallest wrapped y where the curve crosses the fiber x = x_ref.

    Stable ordering for curve indexing, independent of trace direction.
    """
    w = curve.wrapped
    near = np.abs(wrap_to_pi(w[:, 0] - x_ref)) < 0.05
    ys = w[near, 1] if np.any(near) else w[:, 1]
    return float(np.min(ys))


def _monotone_param(model, curve: ClosedCurve) -> CurveParam:
    """Pick the lift coordinate that is monotone along the curve.

    x works whenever f_y never vanishes on the curve (graph-like curves,
    contacts included); otherwise y works for normally hyperbolic curves.
    """
    s = curve.samples
    fy_vals = np.array([model.f_y(x, y) for x, y in s])
    fx_vals = np.array([model.f_x(x, y) for x, y in s])
    if np.min(np.abs(fy_vals)) > 1e-6:
        axis, other = s[:, 0], s[:, 1]
        kind = "x"
    elif np.min(np.abs(fx_vals)) > 1e-6:
        axis, other = s[:, 1], s[:, 0]
        kind = "y"
    else:
        raise ModelError(
            "curve admits neither an x- nor a y-graph parametrization; "
            "unsupported geometry"
        )
    if axis[-1] < axis[0]:
        axis, other = axis[::-1], other[::-1]
    if np.any(np.diff(axis) <= 0.0):
        raise ModelError("curve parameter axis is not monotone")
    return CurveParam(
        kind=kind,
        span=(float(axis[0]), float(axis[-1])),
        axis_vals=axis,
        other_vals=other,
    )


# ---------------------------------------------------------------------------
# contact points


def contact_points(model: SlowFastModel, curve) -> list[ContactPoint]:
    """All tangencies of a critical curve with the fast foliation
    (zeros of f_x along the curve), with order, regularity and parity."""
    cc = curve.curve if isinstance(curve, CriticalCurve) else curve
    return _find_contacts(model, cc)


def _find_contacts(model, curve: ClosedCurve) -> list[ContactPoint]:
    s = curve.samples
    F = np.array([model.f_x(x, y) for x, y in s])
    scale = float(np.max(np.abs(F))) or 1.0
    n = len(s) - 1
    cand = []
    for i in range(n):
        if F[i] == 0.0:
            cand.append(i)
        elif F[i] * F[i + 1] < 0.0:
            cand.append(i)
        elif 0 < i and abs(F[i]) < abs(F[i - 1]) and abs(F[i]) <= abs(F[i + 1]):
            if abs(F[i]) < 1e-3 * scale:
                cand.append(i)
    locs = []
    for i in cand:
        p = _refine_contact(model, s, i)
        if p is None:
            continue
        if abs(model.f_x(p[0], p[1])) > 1e-8 * scale:
            continue
        if not any(
            np.hypot(*wrap_to_pi(p - q)) < 1e-4 for q in locs
        ):
            locs.append(p)
    out = []
    for p in locs:
        out.append(_classify_contact(model, p))
    out.sort(key=lambda c: (c.location.x, c.location.y))
    return out


def _refine_contact(model, samples, i):
    """Polish a contact candidate near sample i by solving for the zero of
    f_x along the curve, parametrized by x with y solved from f = 0."""
    if model.f_xx is None or model.f_xy is None:
        return None
    window = samples[max(0, i - 4): i + 5]
    x_lo, x_hi = float(window[:, 0].min()), float(window[:, 0].max())
    if x_hi - x_lo < 1e-12:
        return None  # curve locally vertical in x; no graph chart here
    y_guess_lo = float(window[np.argmin(np.abs(window[:, 0] - x_lo)), 1])

    def y_on_curve(x, y_guess):
        y = y_guess
        for _ in range(30):
            v = model.f(x, y)
            d = model.f_y(x, y)
            if abs(d) < 1e-9:
                return None
            step = v / d
            y -= step
            if abs(step) < 1e-13:
                return y
        return y if abs(model.f(x, y)) < 1e-10 else None

    state = {"y": y_guess_lo}

    def F(x):
        y = y_on_curve(x, state["y"])
        if y is None:
            raise continuation.ContinuationError("lost the curve near a contact")
        state["y"] = y
        return model.f_x(x, y)

    def dF(x):
        y = y_on_curve(x, state["y"])
        state["y"] = y
        yp = -model.f_x(x, y) / model.f_y(x, y)
        return model.f_xx(x, y) + model.f_xy(x, y) * yp

    try:
        fa, fb = F(x_lo), F(x_hi)
        if fa * fb < 0.0:
            x_star = brentq(F, x_lo, x_hi, xtol=1e-13)
        else:
            da, db = dF(x_lo), dF(x_hi)
            if da * db < 0.0:
                x_star = brentq(dF, x_lo, x_hi, xtol=1e-13)
            else:
                res = minimize_scalar(
                    lambda x: abs(F(x)), bounds=(x_lo, x_hi), method="bounded",
                    options={"xatol": 1e-12},
                )
                x_star = float(res.x)
    except (ValueError, continuation.ContinuationError):
        return None
    y_star = y_on_curve(x_star, state["y"])
    if y_star is None:
        return None
    return np.array([x_star, y_star])


def _classify_contact(model, p) -> ContactPoint:
    x0, y0 = float(p[0]), float(p[1])
    coefs = model.fiber_taylor(x0, y0, MAX_CONTACT_ORDER)
    order = None
    for nn in range(2, MAX_CONTACT_ORDER + 1):
        if abs(coefs[nn]) * math.factorial(nn) > CONTACT_DERIV_TOL:
            order = nn
            break
    regular = abs(model.g(x0, y0, 0.0)) > SLOW_REGULARITY_TOL
    return ContactPoint(
        location=wrap_point((x0, y0)),
        order=order,
        regular=regular,
        odd=(order is not None and order % 2 == 1),
    )


def _curve_stability(model, curve: ClosedCurve, contacts) -> int:
    s = curve.samples
    fx_vals = np.array([model.f_x(x, y) for x, y in s])
    mask = np.ones(len(s), dtype=bool)
    for c in contacts:
        loc = np.array([c.location.x, c.location.y])
        d = wrap_to_pi(s - loc)
        mask &= np.hypot(d[:, 0], d[:, 1]) > 0.15
    signs = np.sign(fx_vals[mask])
    signs = signs[signs != 0.0]
    if len(signs) == 0:
        return 0
    if np.all(signs < 0):
        return -1
    if np.all(signs > 0):
        return +1
    return 0


# ---------------------------------------------------------------------------
# assumption validation


@dataclass
class CurveReport:
    index: int
    winding: WindingPair
    stability: int
    hyperbolicity_margin: float  # min |f_x| over the curve
    slow_margin: float  # min |g(., ., 0)| over the curve
    slow_sign: int  # sign of g on the curve (0 if it changes sign)
    contacts: list[ContactPoint]

    def to_dict(self) -> dict:
        return {
            "index": self.index,
            "winding": [self.winding.k, self.winding.l],
            "stability": self.stability,
            "hyperbolicity_margin": self.hyperbolicity_margin,
            "slow_margin": self.slow_margin,
            "slow_sign": self.slow_sign,
            "contacts": [c.to_dict() for c in self.contacts],
        }


@dataclass
class AssumptionReport:
    model_label: str
    curves: list[CurveReport]
    normally_hyperbolic: bool  # strict: every curve contact-free
    relaxed_ok: bool  # contacts allowed if regular, finite order
    slow_regular: bool  # slow drift nonzero on every curve
    windings_equal: bool  # disjoint-knot lemma check

    @property
    def strict_pass(self) -> bool:
        return self.normally_hyperbolic and self.slow_regular and self.windings_equal

    @property
    def relaxed_pass(self) -> bool:
        return self.relaxed_ok and self.slow_regular and self.windings_equal

    def to_dict(self) -> dict:
        return {
            "model": self.model_label,
            "curves": [c.to_dict() for c in self.curves],
            "normally_hyperbolic": self.normally_hyperbolic,
            "relaxed_ok": self.relaxed_ok,
            "slow_regular": self.slow_regular,
            "windings_equal": self.windings_equal,
            "strict_pass": self.strict_pass,
            "relaxed_pass": self.relaxed_pass,
        }


def validate_assumptions(model: SlowFastModel, curves: list[CriticalCurve] | None = None) -> AssumptionReport:
    """Check normal hyperbolicity (strict and relaxed-contact modes), slow
    regularity, and winding agreement across the critical curves."""
    if curves is None:
        curves = critical_curves(model)
    reports = []
    for c in curves:
        s = c.curve.samples
        fx_vals = np.abs([model.f_x(x, y) for x, y in s])
        g_vals = np.array([model.g(x, y, 0.0) for x, y in s])
        sign = 0
        if np.all(g_vals > 0):
            sign = 1
        elif np.all(g_vals < 0):
            sign = -1
        reports.append(
            CurveReport(
                index=c.index,
                winding=c.winding,
                stability=c.stability,
                hyperbolicity_margin=float(np.min(fx_vals)),
                slow_margin=float(np.min(np.abs(g_vals))),
                slow_sign=sign,
                contacts=c.contacts,
            )
        )
    strict = all(
        (not r.contacts) and r.hyperbolicity_margin > HYPERBOLICITY_TOL for r in reports
    )
    relaxed = all(
        all(cp.regular and cp.order is not None for cp in r.contacts) for r in reports
    )
    slow_ok = all(r.slow_margin > SLOW_REGULARITY_TOL for r in reports)
    pairs = {(c.winding.k, c.winding.l) for c in curves}
    return AssumptionReport(
        model_label=model.label,
        curves=reports,
        normally_hyperbolic=strict,
        relaxed_ok=relaxed,
        slow_regular=slow_ok,
        windings_equal=(len(pairs) == 1),
    )


# ---------------------------------------------------------------------------
# catalog

_ALIASES = {
    "eq1": ("sine", 1, 1, 1, "unit"),
    "eq1-cosine": ("sine", 1, 1, 1, "cosine"),
    "trefoil": ("sine", 1, 3, 2, "unit"),
    "solomon": ("sine", 1, 5, 2, "unit"),
}

ODD_CONTACT_PHI = TrigPoly1(q=1, sin=(1.0,))  # phi(x) = x + sin x


def catalog_labels() -> list[str]:
    return sorted(_ALIASES) + ["odd-contact", "sine-m{m}-k{k}-l{l}[-cos]"]


def catalog_model(label: str) -> SlowFastModel:
    """Resolve a catalog label ("eq1", "trefoil", "sine-m2-k1-l1", ...)."""
    if label in _ALIASES:
        _, m, k, l, variant = _ALIASES[label]
        return sine_link_model(m, k, l, slow_variant=variant)
    if label == "odd-contact":
        return graph_model(ODD_CONTACT_PHI, label="odd-contact")
    if label.startswith("sine-"):
        body = label[5:]
        variant = "unit"
        if body.endswith("-cos"):
            variant, body = "cosine", body[:-4]
        try:
            parts = {p[0]: p[1:] for p in body.split("-")}
            m, k, l = int(parts["m"]), int(parts["k"]), int(parts["l"])
        except (KeyError, ValueError, IndexError) as exc:
            raise ModelError(f"cannot parse sine-link label {label!r}") from exc
        return sine_link_model(m, k, l, slow_variant=variant)
    raise ModelError(f"unknown model label {label!r}")
