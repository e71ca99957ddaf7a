from __future__ import annotations

import dataclasses
import json
import math

import pytest

from isospec.bounds import (
    CertifiedReport,
    bound_constants,
    certify_exponent,
    check_embedded_upper,
    check_foldbound,
    check_region_inequalities,
    check_slab_lemmas,
    closed_form_slope,
    fit_slope,
)
from isospec.errors import PreconditionViolated, RegressionIllConditioned, VerdictFail
from isospec.geometry import build_geometry
from isospec.exponents import companion_matrix


def with_boundary(stack, **changes):
    b = dataclasses.replace(stack.boundary, **changes)
    return dataclasses.replace(stack, boundary=b)


class TestConstants:
    def test_values(self, geom):
        c = bound_constants(geom)
        lam, mu, w = geom.lam, geom.mu, geom.w
        assert c.upper_coeff_embedded == pytest.approx(20.37, abs=0.01)
        assert c.upper_coeff_embedded == pytest.approx((2 * lam * (mu + 1) + 1) / math.log(2))
        assert c.upper_coeff_general == pytest.approx((1 + lam * (mu + 1)) / math.log(2))
        assert c.C_lemma == pytest.approx(max(2**c.kappa, 3 / geom.J))
        assert c.D_lemma == pytest.approx(2 * w * (1 / lam + lam / (mu * (lam - 1))) + 4 * w * w / math.log(lam))
        assert c.delta2_coeff == pytest.approx(c.upper_coeff_general / geom.cellV * geom.area_max**geom.eigen.alpha)

    def test_positive(self, geom):
        with pytest.raises(ValueError):
            bound_constants(geom, E_const=0.0)


class TestRegionInequalities:
    @pytest.mark.parametrize("n", list(range(1, 31)))
    def test_hold(self, geom, n):
        assert all(v.passed for v in check_region_inequalities(geom, n))

    def test_equality_case(self, geom):
        v = check_region_inequalities(geom, 1)[0]
        assert v.lhs == pytest.approx(v.rhs, rel=1e-12)
        assert v.lhs == pytest.approx(6.58, abs=0.01)

    def test_strict_at_five(self, geom):
        v = check_region_inequalities(geom, 5)[0]
        assert v.lhs < v.rhs * (1 - 1e-3)

    def test_precondition(self, geom):
        with pytest.raises(PreconditionViolated):
            check_region_inequalities(geom, 0)


class TestSlabLemmas:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_hold(self, geom, ball, n):
        for st in (ball(n).stack0, ball(n).stack1):
            vs = check_slab_lemmas(geom, st, k=3)
            assert all(v.passed for v in vs if v.enforced)

    def test_fault_injection_horizontal(self, geom, ball):
        st = ball(3).stack0
        bad = with_boundary(st, horizontal=st.boundary.horizontal * 1e6)
        with pytest.raises(VerdictFail) as info:
            check_slab_lemmas(geom, bad, k=3)
        assert info.value.lhs > info.value.rhs

    def test_fault_injection_vertical(self, geom, ball):
        st = ball(3).stack0
        bad = with_boundary(st, vertical=st.boundary.vertical * 1e6)
        with pytest.raises(VerdictFail):
            check_slab_lemmas(geom, bad, k=3)

    def test_non_strict_reports(self, geom, ball):
        st = ball(2).stack0
        bad = with_boundary(st, horizontal=st.boundary.horizontal * 1e6)
        vs = check_slab_lemmas(geom, bad, k=3, strict=False)
        assert any(not v.passed for v in vs)


class TestBallChecks:
    @pytest.mark.parametrize("n", range(1, 7))
    def test_fold_and_embedded(self, geom, ball, n):
        assert all(v.passed for v in check_foldbound(geom, ball(n)))
        assert all(v.passed for v in check_embedded_upper(geom, ball(n)))

    def test_fold_removed_fails(self, geom, ball):
        b = dataclasses.replace(ball(6), fold_area=0.0)
        with pytest.raises(VerdictFail):
            check_foldbound(geom, b)

    def test_inflated_volume_fails_embedded(self, geom, ball):
        b = dataclasses.replace(ball(4), y_n=ball(4).y_n * 1e6)
        with pytest.raises(VerdictFail):
            check_embedded_upper(geom, b)


class TestCertify:
    def test_small_window(self, geom, ball):
        balls = {n: ball(n) for n in range(3, 7)}
        r = certify_exponent(geom, (3, 6), balls=balls)
        assert r.status == "pass"
        assert abs(r.slope - geom.eigen.alpha) < 0.1
        assert r.constants["E_const"] > 0 and r.constants["K_const"] > 0
        assert r.max_ratio <= r.ratio_bound
        assert len(r.rows) == 4
        assert len(r.to_csv().strip().splitlines()) == 5

    def test_monotone_constants(self, geom, ball):
        balls = {n: ball(n) for n in range(2, 6)}
        small = certify_exponent(geom, (2, 4), balls=balls)
        big = certify_exponent(geom, (2, 5), balls=balls)
        assert big.constants["E_const"] <= small.constants["E_const"]
        assert big.constants["K_const"] <= small.constants["K_const"]
        for key in ("C_lemma", "D_lemma", "upper_coeff_embedded", "upper_coeff_general", "delta2_coeff"):
            assert big.constants[key] == small.constants[key]

    def test_json_round_trip(self, geom, ball):
        balls = {n: ball(n) for n in range(1, 4)}
        r = certify_exponent(geom, (1, 3), balls=balls)
        back = CertifiedReport.from_dict(json.loads(r.to_json()))
        assert back == r
        assert back.to_json() == r.to_json()

    def test_ill_conditioned(self, geom):
        with pytest.raises(RegressionIllConditioned):
            certify_exponent(geom, (3, 3))

    def test_loose_tolerance_failure_status(self, geom, ball):
        balls = {n: ball(n) for n in range(1, 4)}
        r = certify_exponent(geom, (1, 3), balls=balls, tolerance=1e-9)
        assert r.status == "fail"


class TestSlopes:
    def test_closed_form(self, geom):
        assert abs(closed_form_slope(geom, 5, 20) - geom.eigen.alpha) < 0.02

    @pytest.mark.parametrize("t,d", [(5, 3), (8, 2), (12, 7)])
    def test_closed_form_other_matrices(self, t, d):
        g = build_geometry(companion_matrix(t, d), with_extrema=False)
        assert abs(closed_form_slope(g, 5, 20) - g.eigen.alpha) < 0.05

    def test_fit_exact_power_law(self):
        xs = [2.0**k for k in range(1, 6)]
        slope, intercept, resid = fit_slope(xs, [3 * x**1.7 for x in xs])
        assert slope == pytest.approx(1.7)
        assert intercept == pytest.approx(math.log(3))
        assert resid == pytest.approx(0, abs=1e-12)

    def test_fit_needs_three_points(self):
        with pytest.raises(RegressionIllConditioned):
            fit_slope([1.0, 2.0], [1.0, 4.0])
