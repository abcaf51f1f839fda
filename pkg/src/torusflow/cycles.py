"""Limit-cycle detection, refinement, and classification.

Detection runs in the stable direction: forward time near attracting
critical curves, reversed time near repelling ones, so every search is a
contraction.  Returns are registered on a local transverse section (a
short segment normal to the flow) rather than a global one, which stays
well defined even when the slow flow changes direction between curves.
One return = one full knot loop, confirmed by a lift displacement of
(2 pi l, 2 pi k).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .geometry import (
    TAU,
    ClosedCurve,
    CURVE_RESOLUTION,
    WindingPair,
    _replicated_tree,
    curve_proximity,
    hausdorff_dist,
    pairwise_torus_dist,
    wrap_to_pi,
)
from .integrate import DEFAULT_OPTIONS, SolverOptions, Trajectory, flow
from .models import CriticalCurve, SlowFastModel, critical_curves, validate_assumptions
from .sdi import SdiValue

EPS_MAX = 0.25
SECTION_TOL = 1e-10
SECANT_MAX_ITER = 50
TRANSIENT_TIME = 40.0

#: Detection needs the section coordinate resolved to SECTION_TOL, which
#: requires tighter error control than the plain-flow defaults.
DETECT_OPTIONS = SolverOptions(rel_tol=1e-11, abs_tol=1e-13)


class CycleDetectionError(RuntimeError):
    """No cycle found: non-convergence, budget exhaustion, or a seed the
    detector cannot handle."""


class SectionDegenerateError(CycleDetectionError):
    """Flow tangent to the local section at a crossing."""


@dataclass
class LimitCycle:
    orbit: ClosedCurve
    period: float
    winding: WindingPair
    div_integral: float
    stability: str  # "attracting" | "repelling"
    canard: bool
    eps: float
    near_curve_index: int
    fixed_point: np.ndarray
    model_label: str
    _final_traj: Trajectory | None = field(default=None, repr=False)

    @property
    def multiplier(self) -> float:
        """Floquet multiplier exp(div integral); underflows to 0.0 (and
        overflows to inf) for the extreme contraction rates at small eps."""
        with np.errstate(over="ignore", under="ignore"):
            return float(np.exp(self.div_integral))

    def orbit_resampled(self, max_gap: float) -> ClosedCurve:
        if self._final_traj is None or self._final_traj.dense is None:
            raise ValueError("cycle carries no dense trajectory")
        length = float(np.hypot(*(self.orbit.samples[-1] - self.orbit.samples[0])))
        n = max(64, int(math.ceil(length / max_gap)))
        return ClosedCurve(self._final_traj.resample_positions(n + 1))

    def to_record(self) -> dict:
        return {
            "near_curve_index": self.near_curve_index,
            "stability": self.stability,
            "canard": self.canard,
            "eps": self.eps,
            "period": self.period,
            "winding": [self.winding.k, self.winding.l],
            "div_integral": self.div_integral,
            "eps_times_div_integral": self.eps * self.div_integral,
            "multiplier": self.multiplier,
            "rotation_number": (
                str(rotation_number(self)) if self.winding.k >= 1 else None
            ),
            "fixed_point": [float(self.fixed_point[0]), float(self.fixed_point[1])],
            "model": self.model_label,
            "n_orbit_samples": len(self.orbit.samples),
        }


@dataclass
class CycleCensus:
    model_label: str
    eps: float
    cycles: list[LimitCycle]
    attracting_count: int
    repelling_count: int
    min_pairwise_dist: float
    restart_max_deviation: float | None = None

    @property
    def winding(self) -> WindingPair:
        return self.cycles[0].winding

    def to_dict(self) -> dict:
        return {
            "model": self.model_label,
            "eps": self.eps,
            "attracting_count": self.attracting_count,
            "repelling_count": self.repelling_count,
            "winding": [self.winding.k, self.winding.l],
            "min_pairwise_dist": self.min_pairwise_dist,
            "restart_max_deviation": self.restart_max_deviation,
            "cycles": [c.to_record() for c in self.cycles],
        }


# ---------------------------------------------------------------------------
# section machinery


def _flow_direction(model, eps, sigma, p):
    v = np.array(
        [model.f(p[0], p[1]), eps * model.g(p[0], p[1], eps)], dtype=float
    ) * sigma
    n = float(np.hypot(*v))
    if n < 1e-12:
        raise SectionDegenerateError(f"vanishing flow speed at {p}")
    return v / n


def _section_halfwidth(model, seed: CriticalCurve) -> float:
    m = model.params.get("m", 1)
    gap = math.pi / (m * math.hypot(seed.winding.k, seed.winding.l))
    return min(0.1, 0.3 * gap)


def _loop_time(seed: CriticalCurve, eps: float, g_min: float) -> float:
    k = max(1, abs(seed.winding.k) + abs(seed.winding.l))
    return TAU * k / (eps * g_min)


@dataclass
class _Section:
    anchor: np.ndarray  # lift point on the converged orbit
    w: np.ndarray  # unit flow direction at the anchor
    u: np.ndarray  # unit section direction (normal to the flow)
    halfwidth: float


@dataclass
class _Crossing:
    t: float
    state: np.ndarray  # (x, y, z) at the crossing
    coord: float  # section coordinate


def _scan_crossings(traj: Trajectory, section: _Section, t_offset: float):
    """All transversal crossings of the local section within a dense chunk."""
    arc = float(np.sum(np.hypot(*np.diff(traj.points, axis=0).T)))
    n = max(16, int(math.ceil(arc / (section.halfwidth / 4.0))) + 1)
    ts = np.linspace(traj.times[0], traj.times[-1], n)
    pts = traj.sample(ts)[:, :2]
    rel = wrap_to_pi(pts - section.anchor)
    d = rel @ section.w
    c = rel @ section.u
    hits = []
    for i in range(n - 1):
        if not (d[i] < 0.0 <= d[i + 1]):
            continue
        if abs(d[i + 1] - d[i]) > 0.5:
            continue  # wrap jump, not a crossing
        if max(abs(c[i]), abs(c[i + 1])) > section.halfwidth:
            continue

        def phi(t):
            p = traj.sample(t)[0, :2]
            return float(wrap_to_pi(p - section.anchor) @ section.w)

        t_star = brentq(phi, ts[i], ts[i + 1], xtol=1e-13)
        state = traj.sample(t_star)[0]
        hits.append(
            _Crossing(
                t=t_offset + t_star,
                state=state,
                coord=float(wrap_to_pi(state[:2] - section.anchor) @ section.u),
            )
        )
    return hits


def _check_transversal(model, eps, sigma, section, state):
    v = _flow_direction(model, eps, sigma, state[:2])
    if abs(float(v @ section.w)) < 1e-3:
        raise SectionDegenerateError("flow tangent to the local section")


def _returns_from(model, eps, sigma, opts, section, state0, t_chunk, t_budget):
    """Generate successive section returns starting from a lift state.

    Between chunks the position is reduced by exact lattice translations
    (the field is 2pi-periodic, so this changes nothing dynamically) to
    keep coordinates small; solver error would otherwise swamp the
    SECTION_TOL convergence test.  Crossings are reported in the original
    lift frame via the accumulated shift.
    """
    state = np.array(state0, dtype=float)
    shift = TAU * np.round((state[:2] - section.anchor) / TAU)
    state[:2] -= shift
    t_used = 0.0
    while t_used < t_budget:
        traj = flow(
            model, eps, state[:2], t_chunk, opts=opts,
            direction="forward" if sigma > 0 else "backward",
            dense=True, z0=state[2],
        )
        for hit in _scan_crossings(traj, section, t_used):
            if hit.t > 1e-9:  # skip a start sitting exactly on the section
                _check_transversal(model, eps, sigma, section, hit.state)
                hit.state = hit.state + np.append(shift, 0.0)
                yield hit
        state = traj.end_state
        red = TAU * np.round((state[:2] - section.anchor) / TAU)
        state[:2] -= red
        shift += red
        t_used += t_chunk
    raise CycleDetectionError(
        f"no cycle found: section return did not converge within budget "
        f"t = {t_budget:.1f}"
    )


# ---------------------------------------------------------------------------
# detection


def find_limit_cycle(
    model: SlowFastModel,
    eps: float,
    seed: CriticalCurve,
    opts: SolverOptions | None = None,
    offset: float = 0.1,
    start_fraction: float = 0.0,
    side: int = 1,
    resolution: float = CURVE_RESOLUTION,
    max_loops: int = 60,
) -> LimitCycle:
    """Detect the limit cycle generated by one critical curve.

    Starts at torus distance ``offset`` from the seed, integrates in the
    seed's stable direction until successive section returns agree to
    ``SECTION_TOL``, then polishes the fixed point of the one-loop return
    displacement with secant steps.
    """
    if not (0.0 < eps <= EPS_MAX):
        raise ValueError(f"eps must lie in (0, {EPS_MAX}], got {eps}")
    if seed.stability == 0:
        raise CycleDetectionError(
            f"seed curve {seed.index} has mixed stability; detection direction undefined"
        )
    opts = opts or DETECT_OPTIONS
    sigma = 1 if seed.stability == -1 else -1
    direction = "forward" if sigma > 0 else "backward"

    samples = seed.curve.samples
    idx = int(round(start_fraction * (len(samples) - 1))) % len(samples)
    base = samples[idx]
    grad = np.array([model.f_x(base[0], base[1]), model.f_y(base[0], base[1])])
    gn = float(np.hypot(*grad))
    if gn < 1e-12:
        grad, gn = np.array([1.0, 0.0]), 1.0  # seed at a contact: offset in x
    p0 = base + offset * (side / gn) * grad

    g_abs = [abs(model.g(x, y, 0.0)) for x, y in samples[:: max(1, len(samples) // 400)]]
    g_min = max(min(g_abs), 1e-6)
    t_loop = _loop_time(seed, eps, g_min)

    # transient: collapse onto the slow manifold, then pick the most
    # normally hyperbolic point of one loop as the section anchor
    warm = flow(model, eps, p0, TRANSIENT_TIME, opts=opts, direction=direction)
    scout = flow(
        model, eps, warm.end_point, 1.05 * t_loop, opts=opts,
        direction=direction, dense=True,
    )
    probe = scout.resample_positions(600)
    fx_abs = np.abs([model.f_x(x, y) for x, y in probe])
    anchor = np.mod(probe[int(np.argmax(fx_abs))], TAU)
    w = _flow_direction(model, eps, sigma, anchor)
    section = _Section(
        anchor=anchor, w=w, u=np.array([-w[1], w[0]]),
        halfwidth=_section_halfwidth(model, seed),
    )

    # successive returns until the section coordinate settles
    returns: list[_Crossing] = []
    start_state = np.append(scout.end_point, 0.0)
    for hit in _returns_from(
        model, eps, sigma, opts, section, start_state,
        t_chunk=t_loop / 3.0, t_budget=max_loops * t_loop,
    ):
        if returns:
            _check_loop_displacement(returns[-1].state, hit.state, seed.winding)
        returns.append(hit)
        if len(returns) >= 2 and abs(returns[-1].coord - returns[-2].coord) < SECTION_TOL:
            break

    def displacement(c: float) -> tuple[float, _Crossing]:
        q = section.anchor + c * section.u
        for hit in _returns_from(
            model, eps, sigma, opts, section, np.append(q, 0.0),
            t_chunk=t_loop / 3.0, t_budget=3.0 * t_loop,
        ):
            return hit.coord - c, hit
        raise CycleDetectionError("return map evaluation failed")

    c_prev = returns[-2].coord
    c_cur = returns[-1].coord
    d_cur, _ = displacement(c_cur)
    if abs(d_cur) >= SECTION_TOL:
        d_prev, _ = displacement(c_prev)
        for _ in range(SECANT_MAX_ITER):
            denom = d_cur - d_prev
            if denom == 0.0:
                break
            c_next = c_cur - d_cur * (c_cur - c_prev) / denom
            d_next, _ = displacement(c_next)
            c_prev, d_prev, c_cur, d_cur = c_cur, d_cur, c_next, d_next
            if abs(d_cur) < SECTION_TOL:
                break
        else:
            raise CycleDetectionError(
                f"secant refinement stalled at |displacement| = {abs(d_cur):.3g}"
            )

    # final full loop from the refined fixed point
    q_star = section.anchor + c_cur * section.u
    period, final_hit, traj = _final_loop(
        model, eps, sigma, opts, section, q_star, t_loop
    )
    disp = final_hit.state[:2] - q_star
    w_pair = _winding_from_displacement(disp)
    div_integral = sigma * float(final_hit.state[2])
    stability = "attracting" if div_integral < 0 else "repelling"
    expected = "attracting" if seed.stability == -1 else "repelling"
    if stability != expected:
        raise CycleDetectionError(
            f"cycle stability {stability} contradicts seed stability {expected}"
        )
    if _min_dist_to_curve(q_star, seed) > 0.3:
        raise CycleDetectionError("detected cycle is not near the seed curve")

    length = float(np.hypot(*disp))
    n_orbit = max(64, int(math.ceil(length / resolution)))
    orb_t = np.linspace(0.0, period, n_orbit + 1)
    orbit = ClosedCurve(traj.sample(orb_t)[:, :2])
    return LimitCycle(
        orbit=orbit,
        period=period,
        winding=w_pair,
        div_integral=div_integral,
        stability=stability,
        canard=(stability == "repelling"),
        eps=eps,
        near_curve_index=seed.index,
        fixed_point=q_star,
        model_label=model.label,
        _final_traj=traj,
    )


def _final_loop(model, eps, sigma, opts, section, q_star, t_loop):
    state = np.append(q_star, 0.0)
    t_used = 0.0
    direction = "forward" if sigma > 0 else "backward"
    for _ in range(6):
        traj = flow(
            model, eps, state[:2], 0.45 * t_loop, opts=opts,
            direction=direction, dense=True, z0=state[2],
        )
        hits = [h for h in _scan_crossings(traj, section, t_used) if h.t > 1e-9]
        if hits:
            if t_used > 0.0:
                # stitch: rerun the whole loop in one dense call so the
                # interpolant covers [0, period] for orbit sampling
                period = hits[0].t
                whole = flow(
                    model, eps, q_star, period * (1 + 1e-12), opts=opts,
                    direction=direction, dense=True,
                )
                end_state = whole.sample(period)[0]
                return period, _Crossing(period, end_state, hits[0].coord), whole
            period = hits[0].t
            return period, hits[0], traj
        state = traj.end_state
        t_used += 0.45 * t_loop
    raise CycleDetectionError("final loop did not return to the section")


def _check_loop_displacement(prev_state, state, winding_pair):
    disp = state[:2] - prev_state[:2]
    turns = disp / TAU
    rounded = np.round(turns)
    if np.max(np.abs(turns - rounded)) > 0.1:
        raise CycleDetectionError(
            f"section return displacement {disp} is not a lattice translation"
        )
    got = WindingPair.from_raw(int(rounded[1]), int(rounded[0]))
    if (got.k, got.l) != (winding_pair.k, winding_pair.l):
        raise CycleDetectionError(
            f"return displacement winding {got} differs from seed {winding_pair}"
        )


def _winding_from_displacement(disp) -> WindingPair:
    turns = np.asarray(disp) / TAU
    rounded = np.round(turns)
    if np.max(np.abs(turns - rounded)) > 0.1:
        raise CycleDetectionError(f"orbit displacement {disp} has no integer winding")
    return WindingPair.from_raw(int(rounded[1]), int(rounded[0]))


def _min_dist_to_curve(p, seed: CriticalCurve) -> float:
    d = wrap_to_pi(seed.curve.samples - np.asarray(p))
    return float(np.min(np.hypot(d[:, 0], d[:, 1])))


# ---------------------------------------------------------------------------
# census


def cycle_census(
    model: SlowFastModel,
    eps: float,
    opts: SolverOptions | None = None,
    curves: list[CriticalCurve] | None = None,
    restarts: int = 0,
    seed: int = 0,
    resolution: float = CURVE_RESOLUTION,
) -> CycleCensus:
    """One detected cycle per critical curve, with disjointness and
    winding-consistency bookkeeping.

    ``restarts`` re-runs each detection from randomly perturbed seeds
    (seeded RNG) and records the worst orbit deviation observed.
    """
    if curves is None:
        curves = critical_curves(model)
    report = validate_assumptions(model, curves)
    if not report.relaxed_pass:
        raise CycleDetectionError(
            f"model {model.label!r} fails assumption validation; census undefined"
        )
    cycles = [
        find_limit_cycle(model, eps, c, opts=opts, resolution=resolution)
        for c in curves
    ]
    attracting = sum(1 for c in cycles if c.stability == "attracting")
    repelling = len(cycles) - attracting

    windings = {(c.winding.k, c.winding.l) for c in cycles}
    if len(windings) != 1:
        raise CycleDetectionError(f"census windings disagree: {windings}")

    min_pair = math.inf
    for i in range(len(cycles)):
        for j in range(i + 1, len(cycles)):
            a = cycles[i].orbit.wrapped[::5]
            b = cycles[j].orbit.wrapped[::5]
            min_pair = min(min_pair, float(pairwise_torus_dist(a, b).min()))

    restart_dev = None
    if restarts > 0:
        rng = np.random.default_rng(seed)
        restart_dev = 0.0
        for base_cycle, curve in zip(cycles, curves):
            fine_base = base_cycle.orbit_resampled(5e-4)
            for _ in range(restarts):
                alt = find_limit_cycle(
                    model, eps, curve, opts=opts,
                    offset=float(rng.uniform(0.05, 0.15)),
                    start_fraction=float(rng.uniform()),
                    side=int(rng.choice([-1, 1])),
                    resolution=resolution,
                )
                dev = curve_proximity(fine_base, alt.orbit_resampled(5e-4))
                restart_dev = max(restart_dev, dev)

    return CycleCensus(
        model_label=model.label,
        eps=eps,
        cycles=cycles,
        attracting_count=attracting,
        repelling_count=repelling,
        min_pairwise_dist=min_pair if math.isfinite(min_pair) else 0.0,
        restart_max_deviation=restart_dev,
    )


# ---------------------------------------------------------------------------
# quantitative checks


def verify_divergence_bracket(cycle: LimitCycle, sdi: SdiValue, kappa: float) -> bool:
    """Check eps * (divergence integral) in [I - kappa, I + kappa]."""
    if kappa <= 0:
        raise ValueError("kappa must be positive")
    if cycle.near_curve_index != sdi.curve_index:
        raise ValueError(
            f"cycle is near curve {cycle.near_curve_index} but the integral "
            f"belongs to curve {sdi.curve_index}"
        )
    scaled = cycle.eps * cycle.div_integral
    return sdi.value - kappa <= scaled <= sdi.value + kappa


def rotation_number(cycle: LimitCycle) -> Fraction:
    """Longitudinal advance per meridional loop, as an exact rational."""
    if cycle.winding.k < 1:
        raise ValueError("rotation number undefined for k = 0")
    return Fraction(cycle.winding.l, cycle.winding.k)


def return_map_log_derivative(
    model: SlowFastModel,
    eps: float,
    cycle: LimitCycle,
    h: float = 1e-6,
    n_segments: int | None = None,
    opts: SolverOptions | None = None,
) -> float:
    """Finite-difference log-derivative of the section return map.

    Two nearby trajectories run in lockstep over one period, renormalized
    every segment with the along-flow component projected out; the summed
    log factors estimate ln of the Floquet multiplier independently of the
    accumulated divergence integral.
    """
    opts = opts or SolverOptions(rel_tol=1e-10, abs_tol=1e-12)
    sigma = 1 if cycle.stability == "attracting" else -1
    if n_segments is None:
        n_segments = int(min(512, max(32, math.ceil(abs(cycle.div_integral) / 8.0))))
    f, g = model.f, model.g

    def pair_rhs(t, s):
        return (
            sigma * f(s[0], s[1]),
            sigma * eps * g(s[0], s[1], eps),
            sigma * f(s[2], s[3]),
            sigma * eps * g(s[2], s[3], eps),
        )

    ref = np.array(cycle.fixed_point, dtype=float)
    w = _flow_direction(model, eps, sigma, ref)
    u = np.array([-w[1], w[0]])
    pert = ref + h * u
    dt = cycle.period / n_segments
    log_sum = 0.0
    for _ in range(n_segments):
        sol = solve_ivp(
            pair_rhs, (0.0, dt), np.concatenate([ref, pert]),
            method="RK45", rtol=opts.rel_tol, atol=opts.abs_tol,
        )
        if not sol.success:
            raise CycleDetectionError(f"pair integration failed: {sol.message}")
        ref, pert = sol.y[:2, -1], sol.y[2:, -1]
        w = _flow_direction(model, eps, sigma, ref)
        delta = pert - ref
        d_perp = delta - float(delta @ w) * w
        nrm = float(np.hypot(*d_perp))
        if nrm < 1e-300:
            raise CycleDetectionError("separation underflow; raise n_segments")
        log_sum += math.log(nrm / h)
        pert = ref + (h / nrm) * d_perp
    return sigma * log_sum


def hausdorff_convergence(
    model: SlowFastModel,
    seed: CriticalCurve,
    eps_list,
    opts: SolverOptions | None = None,
) -> list[tuple[float, float]]:
    """Hausdorff distance between the detected cycle and its critical
    curve for each eps in a decreasing list."""
    eps_arr = list(eps_list)
    if any(e2 >= e1 for e1, e2 in zip(eps_arr, eps_arr[1:])):
        raise ValueError("eps_list must be strictly decreasing")
    if any(not (0.0 < e <= EPS_MAX) for e in eps_arr):
        raise ValueError(f"all eps must lie in (0, {EPS_MAX}]")
    out = []
    for e in eps_arr:
        cyc = find_limit_cycle(model, e, seed, opts=opts)
        out.append((e, hausdorff_dist(cyc.orbit, seed.curve)))
    return out


# ---------------------------------------------------------------------------
# basins


@dataclass
class BasinEntry:
    i: int
    j: int
    x: float
    y: float
    status: str  # "classified" | "excluded" | "unresolved"
    omega_index: int | None
    alpha_index: int | None


@dataclass
class BasinCensus:
    model_label: str
    eps: float
    grid_n: int
    entries: list[BasinEntry]

    @property
    def classified_fraction(self) -> float:
        considered = [e for e in self.entries if e.status != "excluded"]
        if not considered:
            return 1.0
        done = sum(1 for e in considered if e.status == "classified")
        return done / len(considered)


def basin_census(
    model: SlowFastModel,
    eps: float,
    grid_n: int,
    census: CycleCensus | None = None,
    opts: SolverOptions | None = None,
    guard_radius: float = 0.05,
    hit_radius: float = 0.02,
    t_chunk: float = 15.0,
    max_time: float = 600.0,
) -> BasinCensus:
    """Classify omega- and alpha-limits of a uniform grid of initial points.

    Grid points within ``guard_radius`` of any cycle are excluded; the rest
    are integrated forward until within ``hit_radius`` of an attracting
    cycle and backward until within ``hit_radius`` of a repelling one.
    """
    if grid_n < 4:
        raise ValueError("grid_n must be at least 4")
    if census is None:
        census = cycle_census(model, eps)
    opts = opts or SolverOptions(rel_tol=1e-6, abs_tol=1e-9)
    trees = [_replicated_tree(c.orbit.wrapped)[0] for c in census.cycles]
    att = [i for i, c in enumerate(census.cycles) if c.stability == "attracting"]
    rep = [i for i, c in enumerate(census.cycles) if c.stability == "repelling"]

    def dist_to(idx, pts):
        d, _ = trees[idx].query(np.atleast_2d(np.mod(pts, TAU)), k=1)
        return float(np.min(d))

    def classify(p, targets, direction):
        state = np.array(p, dtype=float)
        t_used = 0.0
        while t_used < max_time:
            traj = flow(model, eps, state, t_chunk, opts=opts, direction=direction)
            probes = traj.points[:: max(1, len(traj.points) // 8)]
            for idx in targets:
                if dist_to(idx, probes) < hit_radius:
                    return idx
            state = traj.end_point
            t_used += t_chunk
        return None

    entries = []
    for i in range(grid_n):
        for j in range(grid_n):
            p = np.array([TAU * i / grid_n, TAU * j / grid_n])
            if min(dist_to(idx, p) for idx in range(len(trees))) < guard_radius:
                entries.append(BasinEntry(i, j, p[0], p[1], "excluded", None, None))
                continue
            omega = classify(p, att, "forward")
            alpha = classify(p, rep, "backward")
            status = "classified" if omega is not None and alpha is not None else "unresolved"
            entries.append(BasinEntry(i, j, p[0], p[1], status, omega, alpha))
    return BasinCensus(model.label, eps, grid_n, entries)
