from __future__ import annotations

from functools import lru_cache

import pytest

from isospec.exponents import IntMatrix2
from isospec.geometry import ModelGeometry, build_geometry
from isospec.lattice_complex import backtracking_constant
from isospec.regions import Ball, build_ball

FIG_MATRIX = IntMatrix2.from_rows([[4, 2], [1, 1]])


@lru_cache(maxsize=None)
def fig_geometry() -> ModelGeometry:
    return build_geometry(FIG_MATRIX)


@lru_cache(maxsize=None)
def fig_ball(n: int) -> Ball:
    """Balls are expensive past n = 6; every test shares one copy per n."""
    geom = fig_geometry()
    return build_ball(geom, n, k=backtracking_constant(geom), seed=0)


@pytest.fixture(scope="session")
def geom() -> ModelGeometry:
    return fig_geometry()


@pytest.fixture(scope="session")
def ball():
    return fig_ball


def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance")
    if mod is None or not getattr(mod, "RESULTS", None):
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
