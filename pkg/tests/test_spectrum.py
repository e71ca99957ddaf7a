from __future__ import annotations

import math
from fractions import Fraction

import pytest

from isospec.errors import PreconditionViolated
from isospec.spectrum import density_check, enumerate_exponents, monotonicity_violations, spectra_figure_data


class TestEnumerate:
    def test_smallest(self):
        pts = enumerate_exponents(5, 0)
        assert [(p.t, p.d) for p in pts] == [(5, 2), (5, 3)]
        lam3 = (5 + math.sqrt(13)) / 2
        assert pts[0].exponent == pytest.approx(1.45672, abs=1e-5)
        assert pts[1].exponent == pytest.approx(1 + math.log(3) / math.log(lam3), rel=1e-14)
        assert pts[1].exponent == pytest.approx(1.75286, abs=1e-5)

    def test_trace_four(self):
        (p,) = enumerate_exponents(4, 0, t_min=4)
        assert p.exponent == pytest.approx(1 + math.log(2) / math.log(2 + math.sqrt(2)), rel=1e-14)
        assert p.exponent == pytest.approx(1.5645, abs=1e-4)

    def test_suspension_ranges(self):
        for p in enumerate_exponents(30, 3):
            assert 1 < p.exponent < Fraction(p.i + 2, p.i + 1)
            assert p.k == p.i + 2

    def test_duplicates_kept(self):
        pts = enumerate_exponents(8, 1)
        assert len(pts) == 2 * sum(t - 3 for t in range(5, 9))

    def test_bad_args(self):
        with pytest.raises(PreconditionViolated):
            enumerate_exponents(3, 0, t_min=3)
        with pytest.raises(PreconditionViolated):
            enumerate_exponents(10, -1)

    def test_monotone_in_d(self):
        assert monotonicity_violations(enumerate_exponents(300, 0)) == []


class TestDensity:
    def test_t60(self):
        r = density_check(60, 0.5)
        assert r.threshold == pytest.approx(math.e**4)
        assert r.threshold_met and r.dense
        assert r.left_gap == pytest.approx(math.log(2) / math.log(60))
        assert r.left_gap == pytest.approx(0.1693, abs=1e-4)

    def test_sparse(self):
        r = density_check(6, 0.01)
        assert not r.threshold_met and not r.dense

    def test_gap_shrinks(self):
        gaps = [density_check(t, 0.5).max_interior_gap for t in (10, 100, 1000, 10_000)]
        assert gaps == sorted(gaps, reverse=True)
        assert gaps[-1] < 0.06

    def test_precondition(self):
        with pytest.raises(PreconditionViolated):
            density_check(5, 0.5)


class TestFigure:
    def test_endpoints(self):
        data = spectra_figure_data(6, 5)
        ends = {row["k"]: row["endpoint"] for row in data["dimensions"]}
        assert [ends[k] for k in (3, 4, 5, 6)] == [Fraction(3, 2), Fraction(4, 3), Fraction(5, 4), Fraction(6, 5)]
        assert ends[2] == 2

    def test_samples_below_endpoint(self):
        data = spectra_figure_data(4, 12)
        for row in data["dimensions"]:
            assert len(row["points"]) == 12
            assert all(p.exponent < row["endpoint"] for p in row["points"])
            assert row["prior_work_label"] == "external claim"

    def test_lowest_trace_first(self):
        row = spectra_figure_data(2, 3)["dimensions"][0]
        assert [(p.t, p.d) for p in row["points"]] == [(5, 2), (5, 3), (6, 2)]
