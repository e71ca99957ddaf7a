from __future__ import annotations

import math

import pytest
from scipy.integrate import quad

from isospec.errors import QuadratureNonConvergent
from isospec.quadrature import adaptive_simpson


@pytest.mark.parametrize(
    "f,a,b",
    [
        (math.sin, 0.0, math.pi),
        (lambda x: math.exp(-x * x), -3.0, 2.0),
        (lambda x: math.hypot(2.0 * 4.5**-x, 0.7 * 0.4**-x), 0.0, 1.0),
        (lambda x: math.sqrt(x), 0.0, 1.0),
    ],
)
def test_against_scipy(f, a, b):
    ref, _ = quad(f, a, b, epsabs=1e-13, epsrel=1e-13)
    assert adaptive_simpson(f, a, b, tol=1e-10) == pytest.approx(ref, abs=1e-8)


def test_empty_interval():
    assert adaptive_simpson(math.cos, 1.0, 1.0) == 0.0


def test_reversed_interval_changes_sign():
    assert adaptive_simpson(math.exp, 1.0, 0.0) == pytest.approx(-(math.e - 1.0), rel=1e-9)


def test_budget_exhaustion():
    with pytest.raises(QuadratureNonConvergent):
        adaptive_simpson(lambda x: math.sin(1.0 / x), 1e-9, 1.0, tol=1e-14, max_evals=500)
