import math

import numpy as np
import pytest

from torusflow.geometry import TAU, wrap_to_pi
from torusflow.models import (
    ModelError,
    catalog_model,
    contact_points,
    critical_curves,
    graph_model,
    model_from_json,
    sine_link_model,
    validate_assumptions,
)
from torusflow.trigpoly import TrigPoly1

CATALOG_MKL = [(1, 1, 1), (1, 1, 0), (2, 1, 1), (1, 3, 2), (1, 2, 3), (2, 3, 2), (1, 5, 2)]


class TestSineLinkModel:
    def test_eq1_matches_reference_field(self):
        m = sine_link_model(1, 1, 1)
        rng = np.random.default_rng(0)
        for x, y in rng.uniform(0, TAU, (50, 2)):
            assert m.f(x, y) == pytest.approx(math.sin(y - x), abs=1e-15)
            assert m.g(x, y, 0.1) == 1.0

    def test_noncoprime_rejected(self):
        with pytest.raises(ModelError):
            sine_link_model(1, 2, 4)

    def test_bad_ranges_rejected(self):
        with pytest.raises(ModelError):
            sine_link_model(0, 1, 1)
        with pytest.raises(ModelError):
            sine_link_model(1, 0, 1)

    def test_cosine_variant_only_where_slow_never_vanishes(self):
        m = sine_link_model(1, 1, 1, slow_variant="cosine")
        assert m.g(0.0, 0.0, 0.0) == pytest.approx(1.0)
        for bad in [(2, 1, 1), (1, 3, 2), (1, 1, 0)]:
            with pytest.raises(ModelError):
                sine_link_model(*bad, slow_variant="cosine")

    def test_exact_partials(self):
        m = sine_link_model(2, 3, 2)
        rng = np.random.default_rng(5)
        h = 1e-6
        for x, y in rng.uniform(0, TAU, (20, 2)):
            fd_x = (m.f(x + h, y) - m.f(x - h, y)) / (2 * h)
            fd_y = (m.f(x, y + h) - m.f(x, y - h)) / (2 * h)
            assert m.f_x(x, y) == pytest.approx(fd_x, abs=1e-8)
            assert m.f_y(x, y) == pytest.approx(fd_y, abs=1e-8)

    @pytest.mark.parametrize("mkl", CATALOG_MKL)
    def test_periodicity_residue(self, mkl):
        m = sine_link_model(*mkl)
        rng = np.random.default_rng(2)
        for x, y in rng.uniform(0, TAU, (100, 2)):
            assert abs(m.f(x, y) - m.f(x + TAU, y)) < 1e-12
            assert abs(m.f(x, y) - m.f(x, y + TAU)) < 1e-12
            assert abs(m.g(x, y, 0.0) - m.g(x + TAU, y, 0.0)) < 1e-12
            assert abs(m.g(x, y, 0.0) - m.g(x, y + TAU, 0.0)) < 1e-12


class TestCriticalCurves:
    def test_eq1_two_curves(self):
        m = catalog_model("eq1")
        curves = critical_curves(m)
        assert len(curves) == 2
        att, rep = curves
        assert att.stability == -1 and rep.stability == +1
        # C_- is {y = x}: offset y - x vanishes on the attracting curve
        off_att = wrap_to_pi(att.samples[:, 1] - att.samples[:, 0])
        off_rep = wrap_to_pi(rep.samples[:, 1] - rep.samples[:, 0] - math.pi)
        assert np.max(np.abs(off_att)) < 1e-12
        assert np.max(np.abs(off_rep)) < 1e-12

    @pytest.mark.parametrize("mkl", CATALOG_MKL)
    def test_counts_windings_stability_alternation(self, mkl):
        m_, k, l = mkl
        model = sine_link_model(m_, k, l)
        curves = critical_curves(model)
        assert len(curves) == 2 * m_
        for c in curves:
            assert (c.winding.k, c.winding.l) == (k, l)
        assert [c.stability for c in curves] == [-1, +1] * m_

    @pytest.mark.parametrize("mkl", CATALOG_MKL)
    def test_samples_lie_on_zero_set(self, mkl):
        model = sine_link_model(*mkl)
        for c in critical_curves(model):
            vals = np.abs([model.f(x, y) for x, y in c.samples[::25]])
            assert vals.max() < 1e-9

    def test_m2_zero_set_offsets(self):
        # sin(2(y - x)) vanishes on y - x in {0, pi/2, pi, 3pi/2}
        model = sine_link_model(2, 1, 1)
        curves = critical_curves(model)
        offsets = sorted(
            float(np.mod(c.samples[0, 1] - c.samples[0, 0], TAU)) for c in curves
        )
        assert offsets == pytest.approx([0.0, math.pi / 2, math.pi, 3 * math.pi / 2])
        # stability pattern (-, +, -, +) along a fast fiber, from f_x sign
        fx_signs = [np.sign(model.f_x(-off, 0.0)) for off in offsets]
        assert fx_signs == [-1, 1, -1, 1]

    def test_stability_equals_fx_sign_at_samples(self):
        for label in ("eq1", "trefoil"):
            model = catalog_model(label)
            for c in critical_curves(model):
                signs = {np.sign(model.f_x(x, y)) for x, y in c.samples[::40]}
                assert signs == {c.stability}

    def test_disjointness_lemma_shared_winding(self):
        for mkl in CATALOG_MKL:
            pairs = {c.winding for c in critical_curves(sine_link_model(*mkl))}
            assert len(pairs) == 1

    def test_traced_graph_curve_matches_analytic(self):
        phi = TrigPoly1(q=1, sin=(1.0,))
        model = graph_model(phi)
        curves = critical_curves(model)
        assert len(curves) == 2
        for j, c in enumerate(curves):
            resid = [
                abs(math.sin(y - phi(x) - j * math.pi)) for x, y in c.samples[::20]
            ]
            assert max(resid) < 1e-9
            assert (c.winding.k, c.winding.l) == (1, 1)

    def test_graph_phi_2x_winding(self):
        model = graph_model(TrigPoly1(q=2))
        assert [(c.winding.k, c.winding.l) for c in critical_curves(model)] == [(2, 1)] * 2


class TestContactPoints:
    def test_eq1_no_contacts(self):
        model = catalog_model("eq1")
        for c in critical_curves(model):
            assert c.contacts == []

    def test_odd_contact_model(self):
        # phi = x + sin x: phi(pi + u) - phi(pi) = u - sin u = u^3/6 - ...
        model = catalog_model("odd-contact")
        curves = critical_curves(model)
        for c in curves:
            assert len(c.contacts) == 1
            cp = c.contacts[0]
            assert cp.location.x == pytest.approx(math.pi, abs=1e-8)
            assert cp.order == 3
            assert cp.regular and cp.odd

    def test_two_contact_model(self):
        # phi = x + sin(2x)/2: phi' = 1 + cos 2x vanishes at pi/2, 3pi/2;
        # series: phi(pi/2 + u) - phi(pi/2) = u - sin(2u)/2 = (2/3)u^3 - ...
        model = graph_model(TrigPoly1(q=1, sin=(0.0, 0.5)))
        for c in critical_curves(model):
            xs = sorted(cp.location.x for cp in c.contacts)
            assert xs == pytest.approx([math.pi / 2, 3 * math.pi / 2], abs=1e-8)
            assert all(cp.order == 3 and cp.regular and cp.odd for cp in c.contacts)

    def test_contact_points_op_matches_curve_field(self):
        model = catalog_model("odd-contact")
        c = critical_curves(model)[0]
        standalone = contact_points(model, c)
        assert len(standalone) == len(c.contacts) == 1
        assert standalone[0].location.x == pytest.approx(c.contacts[0].location.x)


class TestValidateAssumptions:
    def test_eq1_margins(self):
        report = validate_assumptions(catalog_model("eq1"))
        assert report.strict_pass
        for r in report.curves:
            assert r.hyperbolicity_margin == pytest.approx(1.0, abs=1e-9)
            assert r.slow_margin == pytest.approx(1.0)
            assert not r.contacts

    def test_odd_contact_strict_fails_relaxed_passes(self):
        report = validate_assumptions(catalog_model("odd-contact"))
        assert not report.strict_pass
        assert report.relaxed_pass
        assert report.slow_regular
        for r in report.curves:
            assert len(r.contacts) == 1
            assert r.contacts[0].order == 3 and r.contacts[0].regular

    def test_cosine_slow_directions(self):
        report = validate_assumptions(catalog_model("eq1-cosine"))
        assert report.strict_pass
        by_stab = {r.stability: r for r in report.curves}
        # slow flow points up on the attracting curve, down on the repelling
        assert by_stab[-1].slow_sign == +1
        assert by_stab[+1].slow_sign == -1
        for r in report.curves:
            assert r.slow_margin == pytest.approx(1.0, abs=1e-9)

    def test_windings_equal_flag(self):
        report = validate_assumptions(catalog_model("trefoil"))
        assert report.windings_equal


class TestUserModels:
    def test_json_model_roundtrip(self):
        # sin(y - x) encoded as a coefficient matrix: term sin(-x + y)
        doc = {
            "label": "eq1-json",
            "f": {"sin": [[0.0, 1.0]], "p_min": -1, "q_min": 0},
            "g": {"cos": [[1.0]]},
        }
        model = model_from_json(doc)
        rng = np.random.default_rng(4)
        for x, y in rng.uniform(0, TAU, (30, 2)):
            assert model.f(x, y) == pytest.approx(math.sin(y - x), abs=1e-14)
            assert model.g(x, y, 0.0) == pytest.approx(1.0)
        curves = critical_curves(model)
        assert len(curves) == 2
        assert {c.stability for c in curves} == {-1, +1}
        assert all((c.winding.k, c.winding.l) == (1, 1) for c in curves)

    def test_malformed_rejected(self):
        with pytest.raises(ModelError):
            model_from_json({"f": {"cos": [[0.0]]}, "g": {"cos": [[1.0]]}})
        with pytest.raises(ModelError):
            model_from_json({"g": {"cos": [[1.0]]}})

    def test_catalog_label_parsing(self):
        m = catalog_model("sine-m2-k3-l2")
        assert m.params["m"] == 2 and m.params["k"] == 3 and m.params["l"] == 2
        with pytest.raises(ModelError):
            catalog_model("nonsense")
