import math

import numpy as np
import pytest

from oracles import odd_contact_oracle, sine_link_oracle
from torusflow.geometry import TAU
from torusflow.models import (
    catalog_model,
    critical_curves,
    graph_model,
    sine_link_model,
)
from torusflow.sdi import (
    SlowFlowError,
    UnsupportedContactError,
    sdi_by_segments,
    slow_divergence_integral,
)
from torusflow.trigpoly import TrigPoly1, TrigPoly2, TrigTerm

CATALOG_MKL = [(1, 1, 1), (1, 1, 0), (2, 1, 1), (1, 3, 2), (1, 2, 3), (2, 3, 2), (1, 5, 2)]


class TestAnalyticValues:
    @pytest.mark.parametrize("mkl", CATALOG_MKL)
    def test_closed_form_matches_bruteforce(self, mkl):
        m_, k, l = mkl
        model = sine_link_model(m_, k, l)
        for c in critical_curves(model):
            sdi = slow_divergence_integral(model, c)
            assert sdi.method == "analytic"
            expected = c.stability * TAU * m_ * k * k
            oracle = sine_link_oracle(m_, k, l, c.index)
            assert sdi.value == pytest.approx(expected, rel=1e-12)
            assert sdi.value == pytest.approx(oracle, rel=1e-7)

    def test_eq1_values(self):
        model = catalog_model("eq1")
        vals = [slow_divergence_integral(model, c).value for c in critical_curves(model)]
        assert vals[0] == pytest.approx(-TAU)
        assert vals[1] == pytest.approx(TAU)

    def test_trefoil_values(self):
        model = catalog_model("trefoil")
        vals = [slow_divergence_integral(model, c).value for c in critical_curves(model)]
        assert vals == pytest.approx([-18 * math.pi, 18 * math.pi])

    def test_cosine_variant_signs_unchanged(self):
        # slow flow reverses on C_+ but the integral keeps its sign
        model = catalog_model("eq1-cosine")
        curves = critical_curves(model)
        for c, expected in zip(curves, [-TAU, TAU]):
            sdi = slow_divergence_integral(model, c)
            oracle = sine_link_oracle(1, 1, 1, c.index, cosine=True)
            assert sdi.value == pytest.approx(expected, rel=1e-9)
            assert oracle == pytest.approx(expected, rel=1e-7)


class TestQuadratureRoute:
    @pytest.mark.parametrize("mkl", CATALOG_MKL)
    def test_quadrature_agrees_with_analytic(self, mkl):
        model = sine_link_model(*mkl)
        for c in critical_curves(model):
            a = slow_divergence_integral(model, c, method="analytic")
            q = slow_divergence_integral(model, c, method="quadrature")
            assert q.method == "quadrature"
            assert abs(a.value - q.value) < 1e-7

    def test_cosine_variant_quadrature(self):
        model = catalog_model("eq1-cosine")
        for c, expected in zip(critical_curves(model), [-TAU, TAU]):
            q = slow_divergence_integral(model, c, method="quadrature")
            assert q.value == pytest.approx(expected, abs=1e-7)

    def test_odd_contact_model(self):
        # closed form: -int_0^2pi (1 + cos x)^2 dx = -3 pi on the
        # attracting curve, +3 pi on the repelling one
        model = catalog_model("odd-contact")
        curves = critical_curves(model)
        for c, expected in zip(curves, [-3 * math.pi, 3 * math.pi]):
            sdi = slow_divergence_integral(model, c)
            assert sdi.method == "quadrature"
            assert sdi.value == pytest.approx(expected, rel=1e-7)
            assert sdi.value == pytest.approx(odd_contact_oracle(c.index), rel=1e-7)

    def test_sign_law_across_catalog(self):
        for mkl in CATALOG_MKL:
            model = sine_link_model(*mkl)
            for c in critical_curves(model):
                v = slow_divergence_integral(model, c, method="quadrature").value
                assert math.copysign(1, v) == c.stability


class TestSegments:
    def test_single_segment_equals_whole(self):
        model = catalog_model("eq1")
        c = critical_curves(model)[0]
        whole = slow_divergence_integral(model, c, method="quadrature")
        seg = sdi_by_segments(model, c, [0.0])
        assert seg.value == pytest.approx(whole.value, abs=1e-9)

    def test_two_segments(self):
        model = catalog_model("eq1")
        c = critical_curves(model)[0]
        seg = sdi_by_segments(model, c, [0.5, 3.7])
        assert seg.value == pytest.approx(-TAU, abs=1e-8)

    def test_seventeen_random_partitions(self):
        model = catalog_model("eq1")
        c = critical_curves(model)[0]
        rng = np.random.default_rng(0)
        ref = slow_divergence_integral(model, c).value
        for _ in range(17):
            r = rng.integers(2, 18)
            bp = np.sort(rng.uniform(0.0, TAU, size=r))
            bp = bp[np.append(True, np.diff(bp) > 1e-6)]
            val = sdi_by_segments(model, c, bp).value
            assert abs(val - ref) < 1e-7

    def test_partition_invariance_on_contact_curve(self):
        model = catalog_model("odd-contact")
        c = critical_curves(model)[0]
        ref = slow_divergence_integral(model, c).value
        rng = np.random.default_rng(1)
        for _ in range(5):
            lo, hi = c.param.span
            bp = np.sort(rng.uniform(lo, hi, size=6))
            assert sdi_by_segments(model, c, bp).value == pytest.approx(ref, abs=1e-7)

    def test_unordered_breakpoints_rejected(self):
        model = catalog_model("eq1")
        c = critical_curves(model)[0]
        with pytest.raises(ValueError):
            sdi_by_segments(model, c, [3.0, 1.0, 2.0])

    def test_descending_order_required_against_slow_flow(self):
        # cosine variant, repelling curve: slow flow runs downward, so
        # breakpoints must descend in the curve parameter
        model = catalog_model("eq1-cosine")
        c = critical_curves(model)[1]
        val = sdi_by_segments(model, c, [5.0, 3.0, 1.0]).value
        assert val == pytest.approx(TAU, abs=1e-8)
        with pytest.raises(ValueError):
            sdi_by_segments(model, c, [1.0, 3.0, 5.0])


class TestPreconditions:
    def test_slow_flow_zero_rejected(self):
        # g = sin(y - x) vanishes identically on the curve y = x
        g = TrigPoly2((TrigTerm("sin", -1, 1, 1.0),))
        model = graph_model(TrigPoly1(q=1), g=g, label="bad-slow")
        c = critical_curves(model)[0]
        with pytest.raises(SlowFlowError):
            slow_divergence_integral(model, c)

    def test_even_contact_rejected(self):
        # phi = sin x has order-2 (jump) contacts at pi/2, 3pi/2
        model = graph_model(TrigPoly1(q=0, sin=(1.0,)), label="jump")
        curves = critical_curves(model)
        orders = {cp.order for c in curves for cp in c.contacts}
        assert orders == {2}
        with pytest.raises(UnsupportedContactError):
            slow_divergence_integral(model, curves[0])
