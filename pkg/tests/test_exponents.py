from __future__ import annotations

import math
import random
from fractions import Fraction

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from isospec.errors import BadSpectrum, BadTarget, NonHyperbolic, PreconditionViolated
from isospec.exponents import (
    IntMatrix2,
    QuadraticInteger,
    companion_matrix,
    eigen_bounds,
    eigen_data,
    exponent_of,
    suspend_matrix,
    suspension_exponent,
    suspension_recurrence,
    synthesize_matrix,
)


def brute_force_synthesis(alpha: float, eps: float, gap: int) -> tuple[int, int]:
    """Literal scan t = 5, 6, ...; first t with a hit wins, then smallest error, then smallest d."""
    t = 5
    while True:
        hits = []
        for d in range(2, t - gap + 1):
            err = abs(exponent_of(t, d) - alpha)
            if err < eps:
                hits.append((err, d))
        if hits:
            return t, min(hits)[1]
        t += 1


class TestQuadraticInteger:
    def test_lambda_plus_mu_and_product(self):
        e = eigen_data(IntMatrix2.from_rows([[4, 2], [1, 1]]))
        assert e.lambda_exact + e.mu_exact == QuadraticInteger(10, 0, 17)
        assert int(e.lambda_exact + e.mu_exact) == 5
        assert int(e.lambda_exact * e.mu_exact) == 2

    def test_conjugate_and_float(self):
        x = QuadraticInteger(5, 1, 17)
        assert x.conjugate() == QuadraticInteger(5, -1, 17)
        assert float(x) == pytest.approx((5 + math.sqrt(17)) / 2, rel=1e-15)

    def test_float_of_small_conjugate_is_stable(self):
        # mu for a large trace is a difference of nearly equal numbers
        e = eigen_data(companion_matrix(100_000, 2))
        ref = mpmath.mpf(2) / ((100_000 + mpmath.sqrt(100_000**2 - 8)) / 2)
        assert float(e.mu_exact) == pytest.approx(float(ref), rel=1e-12)

    def test_mixed_discriminants_rejected(self):
        with pytest.raises(ValueError):
            QuadraticInteger(1, 1, 5) + QuadraticInteger(1, 1, 13)


class TestEigenData:
    def test_figure_matrix_against_mpmath(self):
        e = eigen_data(IntMatrix2.from_rows([[4, 2], [1, 1]]))
        mpmath.mp.dps = 40
        lam = (5 + mpmath.sqrt(17)) / 2
        mu = 2 / lam
        assert e.lam == pytest.approx(float(lam), rel=1e-15)
        assert e.mu == pytest.approx(float(mu), rel=1e-15)
        assert e.alpha == pytest.approx(float(2 + mpmath.log(mu) / mpmath.log(lam)), abs=1e-14)
        assert e.alpha == pytest.approx(1.45672, abs=5e-6)

    def test_nonhyperbolic(self):
        with pytest.raises(NonHyperbolic):
            eigen_data(IntMatrix2.from_rows([[1, 1], [-1, 1]]))

    def test_bad_spectrum(self):
        with pytest.raises(BadSpectrum):
            eigen_data(IntMatrix2.from_rows([[2, 1], [1, 1]]))  # det 1
        with pytest.raises(BadSpectrum):
            eigen_data(companion_matrix(5, 4))  # mu = 1

    def test_companion(self):
        A = companion_matrix(7, 3)
        assert (A.trace, A.det) == (7, 3)
        assert str(A) == "7,-3;1,0"

    @settings(max_examples=200, deadline=None)
    @given(st.integers(5, 10_000).flatmap(lambda t: st.tuples(st.just(t), st.integers(2, t - 2))))
    def test_exponent_in_unit_interval_and_identity(self, td):
        t, d = td
        e = eigen_data(companion_matrix(t, d))
        assert 1.0 < e.alpha < 2.0
        assert e.alpha == pytest.approx(2 + math.log(e.mu) / math.log(e.lam), abs=1e-12)

    def test_eigen_bounds(self):
        lo, lam, hi = eigen_bounds(10, 6)
        assert lo <= lam <= hi
        with pytest.raises(PreconditionViolated):
            eigen_bounds(3, 1)


class TestSynthesis:
    def test_example(self):
        A, cert = synthesize_matrix(1.5, 0.05)
        assert (cert.t, cert.d) == (5, 2)
        assert str(A) == "5,-2;1,0"

    def test_huge_tolerance_gives_first_matrix(self):
        _, cert = synthesize_matrix(1.5, 1.0)
        assert (cert.t, cert.d) == (5, 2)

    def test_near_one_needs_large_trace(self):
        _, cert = synthesize_matrix(1.05, 0.01, guarded=True)
        assert cert.d == 2 and cert.error < 0.01
        assert cert.t > 1000
        assert all(cert.chain.values())

    @pytest.mark.parametrize("guarded", [False, True])
    def test_matches_literal_scan(self, guarded):
        rng = random.Random(7)
        for _ in range(40):
            alpha = rng.uniform(1.1, 1.95)
            eps = rng.choice([0.05, 0.01, 0.003])
            _, cert = synthesize_matrix(alpha, eps, guarded=guarded)
            assert (cert.t, cert.d) == brute_force_synthesis(alpha, eps, 4 if guarded else 2)

    @pytest.mark.parametrize("alpha,eps", [(1.0, 0.1), (2.0, 0.1), (1.5, 0.0), (1.5, -1.0), (float("nan"), 0.1)])
    def test_bad_target(self, alpha, eps):
        with pytest.raises(BadTarget):
            synthesize_matrix(alpha, eps)


class TestSuspension:
    def test_endpoints_are_exact(self):
        got = [suspension_exponent(Fraction(2), i) for i in range(1, 5)]
        assert got == [Fraction(3, 2), Fraction(4, 3), Fraction(5, 4), Fraction(6, 5)]

    def test_level_zero_is_identity(self):
        assert suspension_exponent(1.3, 0) == 1.3

    @settings(max_examples=300, deadline=None)
    @given(st.fractions(min_value=1, max_value=2), st.integers(0, 10))
    def test_recurrence_exact(self, alpha, i):
        assert suspension_exponent(alpha, i) == suspension_recurrence(alpha, i)

    def test_out_of_range(self):
        with pytest.raises(BadTarget):
            suspension_exponent(2.5, 1)
        with pytest.raises(BadTarget):
            suspension_exponent(1.5, -1)

    def test_suspended_matrix(self):
        A = IntMatrix2.from_rows([[4, 2], [1, 1]])
        M = suspend_matrix(A, 2)
        assert M.shape == (4, 4)
        assert round(np.linalg.det(M)) == 2
        assert np.array_equal(M[2:, 2:], np.eye(2, dtype=np.int64))
