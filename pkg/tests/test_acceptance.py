"""Acceptance suite: one test per criterion, one printed pass/fail line each.

Run with `pytest tests/test_acceptance.py -v -s` to see the lines as the
criteria complete.  Censuses are cached per (model label, eps) and shared
across criteria.
"""

import math
import time
from fractions import Fraction
from itertools import product

import numpy as np
import pytest

from oracles import odd_contact_oracle, sine_link_oracle
from torusflow.cycles import (
    basin_census,
    cycle_census,
    return_map_log_derivative,
    rotation_number,
    verify_divergence_bracket,
)
from torusflow.geometry import TAU, ClosedCurve, hausdorff_dist, torus_dist, winding
from torusflow.integrate import SolverOptions, flow
from torusflow.knots import homeo_class, is_ambient_isotopic, link_consistent
from torusflow.models import catalog_model, critical_curves, sine_link_model, validate_assumptions
from torusflow.sdi import sdi_by_segments, slow_divergence_integral

CATALOG_MKL = [(1, 1, 1), (1, 1, 0), (2, 1, 1), (1, 3, 2), (1, 2, 3), (2, 3, 2), (1, 5, 2)]
SWEEP_EPS = [0.2, 0.1, 0.05, 0.025]
RUNTIME_BUDGET = 60.0


class Lab:
    """Shared model/census cache for the whole acceptance session."""

    def __init__(self):
        self.models = {}
        self.curves = {}
        self.censuses = {}

    def model(self, label):
        if label not in self.models:
            self.models[label] = catalog_model(label)
        return self.models[label]

    def curve_list(self, label):
        if label not in self.curves:
            self.curves[label] = critical_curves(self.model(label))
        return self.curves[label]

    def census(self, label, eps):
        key = (label, eps)
        if key not in self.censuses:
            self.censuses[key] = cycle_census(
                self.model(label), eps, curves=self.curve_list(label)
            )
        return self.censuses[key]


@pytest.fixture(scope="module")
def lab():
    return Lab()


def report(num, ok, text):
    print(f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} - {text}")
    assert ok, f"criterion {num} failed: {text}"


def sine_label(m, k, l):
    return f"sine-m{m}-k{k}-l{l}"


def test_criterion_01_cycle_counts(lab):
    worst = 0.0
    for m, k, l in CATALOG_MKL:
        label = sine_label(m, k, l)
        t0 = time.time()
        for eps in (0.1, 0.05):
            census = lab.census(label, eps)
            assert len(census.cycles) == 2 * m, f"{label} eps={eps}"
            assert census.attracting_count == m
            assert census.repelling_count == m
            for cyc in census.cycles:
                assert (cyc.winding.k, cyc.winding.l) == (k, l)
                assert cyc.canard == (cyc.stability == "repelling")
        worst = max(worst, time.time() - t0)
        assert time.time() - t0 < RUNTIME_BUDGET, f"{label} exceeded 60 s"
    report(1, True,
           f"2m cycles (m attracting + m canard) of winding (k,l) for all 7 "
           f"models at eps 0.1/0.05; slowest model {worst:.1f}s < 60s")


def test_criterion_02_sdi_oracle_match(lab):
    for m, k, l in CATALOG_MKL:
        label = sine_label(m, k, l)
        model = lab.model(label)
        for c in lab.curve_list(label):
            closed_form = c.stability * TAU * m * k * k
            analytic = slow_divergence_integral(model, c, method="analytic").value
            quadrature = slow_divergence_integral(model, c, method="quadrature").value
            oracle = sine_link_oracle(m, k, l, c.index)
            assert abs(analytic - closed_form) <= 1e-7 * abs(closed_form)
            assert abs(quadrature - oracle) <= 1e-7 * abs(closed_form)
    eq1 = lab.model(sine_label(1, 1, 1))
    vals = [slow_divergence_integral(eq1, c).value
            for c in lab.curve_list(sine_label(1, 1, 1))]
    assert vals == pytest.approx([-TAU, TAU])
    cos_model = catalog_model("eq1-cosine")
    cos_vals = [slow_divergence_integral(cos_model, c, method="quadrature").value
                for c in critical_curves(cos_model)]
    assert cos_vals == pytest.approx([-TAU, TAU], abs=1e-7)
    oc = catalog_model("odd-contact")
    oc_vals = [slow_divergence_integral(oc, c).value for c in critical_curves(oc)]
    assert oc_vals == pytest.approx([-3 * math.pi, 3 * math.pi], rel=1e-7)
    assert oc_vals[0] == pytest.approx(odd_contact_oracle(0), rel=1e-7)
    report(2, True,
           "SDI = -+2pi*m*k^2 on every sine-link curve (analytic + quadrature "
           "vs 1e6-node oracle, 1e-7 rel); eq1 -+2pi, cosine -+2pi, "
           "odd-contact -+3pi")


def test_criterion_03_divergence_bracket(lab):
    for m, k, l in [(1, 1, 1), (1, 3, 2)]:
        label = sine_label(m, k, l)
        model = lab.model(label)
        for curve in lab.curve_list(label):
            sdi = slow_divergence_integral(model, curve)
            kappa = 0.1 * abs(sdi.value)
            gaps = []
            for eps in SWEEP_EPS:
                cyc = lab.census(label, eps).cycles[curve.index]
                gaps.append(abs(eps * cyc.div_integral - sdi.value))
                if eps <= 0.05:
                    assert verify_divergence_bracket(cyc, sdi, kappa), (
                        f"{label} curve {curve.index} eps={eps}"
                    )
            assert all(a > b for a, b in zip(gaps, gaps[1:])), (
                f"{label} curve {curve.index}: gaps {gaps} not decreasing"
            )
    report(3, True,
           "bracket |eps*div - I| <= 0.1|I| holds for eps <= 0.05 and the "
           "gap decreases along eps = 0.2, 0.1, 0.05, 0.025 (eq1 + trefoil)")


def test_criterion_04_poincare_formula(lab):
    worst = 0.0
    for m, k, l in CATALOG_MKL:
        label = sine_label(m, k, l)
        model = lab.model(label)
        for cyc in lab.census(label, 0.05).cycles:
            fd = return_map_log_derivative(model, 0.05, cyc)
            rel = abs(fd - cyc.div_integral) / abs(cyc.div_integral)
            worst = max(worst, rel)
            assert rel <= 0.05, f"{label} curve {cyc.near_curve_index}: {rel:.3%}"
    report(4, True,
           f"ln(multiplier) matches the finite-difference return-map "
           f"log-derivative for all 18 cycles at eps=0.05 "
           f"(worst {worst:.2%} <= 5%)")


def test_criterion_05_hausdorff_convergence(lab):
    for m, k, l in [(1, 1, 1), (1, 3, 2)]:
        label = sine_label(m, k, l)
        for curve in lab.curve_list(label):
            dists = [
                hausdorff_dist(lab.census(label, eps).cycles[curve.index].orbit,
                               curve.curve)
                for eps in SWEEP_EPS
            ]
            assert all(a > b for a, b in zip(dists, dists[1:])), (
                f"{label} curve {curve.index}: {dists}"
            )
            assert dists[-1] < 0.1
    report(5, True,
           "cycle-to-curve Hausdorff distance strictly decreases over "
           "eps = 0.2, 0.1, 0.05, 0.025 and ends below 0.1 (eq1 + trefoil)")


def test_criterion_06_rotation_numbers(lab):
    for m, k, l in CATALOG_MKL:
        label = sine_label(m, k, l)
        for eps in (0.1, 0.05):
            for cyc in lab.census(label, eps).cycles:
                assert rotation_number(cyc) == Fraction(l, k)
    report(6, True,
           "every detected sine-link cycle reports rotation number l/k "
           "as an exact rational")


def test_criterion_07_global_dynamics(lab):
    for m, k, l in [(1, 1, 1), (2, 1, 1)]:
        label = sine_label(m, k, l)
        census = lab.census(label, 0.05)
        basin = basin_census(lab.model(label), 0.05, 20, census=census)
        assert basin.classified_fraction >= 0.99, (
            f"{label}: {basin.classified_fraction:.1%} classified"
        )
        omegas, alphas = set(), set()
        for e in basin.entries:
            if e.status != "classified":
                continue
            omegas.add(e.omega_index)
            alphas.add(e.alpha_index)
            assert census.cycles[e.omega_index].stability == "attracting"
            assert census.cycles[e.alpha_index].stability == "repelling"
        if m == 2:
            attracting_indices = {
                i for i, c in enumerate(census.cycles) if c.stability == "attracting"
            }
            assert omegas == attracting_indices, "an attracting cycle has empty basin"
    report(7, True,
           ">= 99% of a 20x20 grid classified at eps=0.05; omega-limits are "
           "attracting and alpha-limits repelling cycles; both attracting "
           "cycles of the m=2 model receive nonempty basins")


def test_criterion_08_relaxed_contact_mode(lab):
    model = catalog_model("odd-contact")
    curves = critical_curves(model)
    rep = validate_assumptions(model, curves)
    assert not rep.strict_pass
    assert rep.relaxed_pass
    for r in rep.curves:
        assert len(r.contacts) == 1
        cp = r.contacts[0]
        assert cp.order == 3 and cp.regular and cp.odd
    census = cycle_census(model, 0.01, curves=curves)
    assert len(census.cycles) == 2
    assert census.attracting_count == 1 and census.repelling_count == 1
    canards = [c for c in census.cycles if c.canard]
    assert len(canards) == 1 and canards[0].stability == "repelling"
    for cyc in census.cycles:
        assert (cyc.winding.k, cyc.winding.l) == (1, 1)
    report(8, True,
           "odd-contact model fails strict validation, passes relaxed with "
           "one order-3 regular odd contact per curve, and yields 2 cycles "
           "(1 attracting + 1 repelling canard) of winding (1,1) at eps=0.01")


def test_criterion_09_knot_calculus(lab):
    pairs = [
        (k, l)
        for k, l in product(range(-7, 8), repeat=2)
        if (k, l) == (0, 0) or math.gcd(abs(k), abs(l)) == 1
    ]
    for a in pairs:
        orbit = {a, (-a[0], -a[1]), (a[1], a[0]), (-a[1], -a[0])}
        for b in pairs:
            assert is_ambient_isotopic(a, b) == (b in orbit), (a, b)
    assert homeo_class((0, 0)).essential is False
    for p in pairs:
        if p != (0, 0):
            assert homeo_class(p).essential
    checked = 0
    for (label, eps), census in list(lab.censuses.items()):
        assert link_consistent([c.orbit for c in census.cycles]), (label, eps)
        checked += 1
    assert checked > 0
    report(9, True,
           f"ambient-isotopy theorem reproduced on the exhaustive signed "
           f"coprime table (entries <= 7, sign + swap rules); homeo_class "
           f"separates (0,0); link_consistent on {checked} computed censuses")


def test_criterion_10_invariant_suites(lab):
    # torus metric axioms and winding invariance
    rng = np.random.default_rng(0)
    for _ in range(200):
        a, b, c = rng.uniform(0, TAU, size=(3, 2))
        assert torus_dist(a, b) == pytest.approx(torus_dist(b, a))
        assert torus_dist(a, b) <= torus_dist(a, c) + torus_dist(c, b) + 1e-12
    s = np.linspace(0, 1, 400)
    base = ClosedCurve(np.column_stack([TAU * 2 * s, TAU * 3 * s]))
    w0 = winding(base)
    assert (w0.k, w0.l) == (3, 2)
    shifted = ClosedCurve(base.samples + np.array([6 * TAU, -4 * TAU]))
    assert winding(shifted) == w0

    # sdi partition invariance: 17 random partitions within 1e-7
    model = lab.model(sine_label(1, 1, 1))
    curve = lab.curve_list(sine_label(1, 1, 1))[0]
    ref = slow_divergence_integral(model, curve).value
    for _ in range(17):
        r = rng.integers(2, 18)
        bp = np.sort(rng.uniform(0.0, TAU, size=r))
        bp = bp[np.append(True, np.diff(bp) > 1e-6)]
        assert abs(sdi_by_segments(model, curve, bp).value - ref) < 1e-7

    # integrator tolerance-halving convergence
    T, p0 = 120.0, (0.3, 2.0)
    base_opts = SolverOptions(rel_tol=2e-9, abs_tol=1e-11)
    tight_opts = SolverOptions(rel_tol=1e-9, abs_tol=1e-11)
    e1 = flow(model, 0.05, p0, T, opts=base_opts).end_point
    e2 = flow(model, 0.05, p0, T, opts=tight_opts).end_point
    assert float(np.max(np.abs(e1 - e2))) < 10 * base_opts.rel_tol * T
    report(10, True,
           "metric/winding invariants, 17-partition SDI invariance (1e-7), "
           "and tolerance-halving integrator convergence all hold")
