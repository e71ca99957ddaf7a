"""Sampled isoperimetric spectra: achievable exponents, density diagnostics, figure data."""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Any

from .errors import PreconditionViolated
from .exponents import exponent_of, suspension_exponent

__all__ = [
    "SpectrumPoint",
    "DensityReport",
    "enumerate_exponents",
    "monotonicity_violations",
    "density_check",
    "spectra_figure_data",
]


@dataclass(frozen=True)
class SpectrumPoint:
    """Exponent of the ``k``-dimensional Dehn function of ``G_{Sigma^i A(t, d)}``, ``k = i + 2``."""

    k: int
    exponent: float
    t: int
    d: int
    i: int

    def __post_init__(self) -> None:
        if self.k != self.i + 2:
            raise ValueError("dimension k must equal i + 2")

    @property
    def source(self) -> tuple[int, int, int]:
        return self.t, self.d, self.i


def enumerate_exponents(t_max: int, i_max: int, *, t_min: int = 5) -> list[SpectrumPoint]:
    """All admissible companion matrices ``5 <= t <= t_max``, ``2 <= d <= t - 2``, suspended to ``0..i_max``.

    Ordered by ``(t, d, i)``; equal exponents from different sources are all kept.
    """
    if t_min < 4 or t_max < t_min:
        raise PreconditionViolated(f"need 4 <= t_min <= t_max, got t_min={t_min}, t_max={t_max}")
    if i_max < 0:
        raise PreconditionViolated("i_max must be >= 0")
    out = []
    for t in range(t_min, t_max + 1):
        for d in range(2, t - 1):
            alpha = exponent_of(t, d)
            for i in range(i_max + 1):
                out.append(SpectrumPoint(i + 2, float(suspension_exponent(alpha, i)), t, d, i))
    return out


def monotonicity_violations(points: list[SpectrumPoint]) -> list[tuple[int, int]]:
    """``(t, d)`` pairs where the exponent fails to increase from ``d - 1`` to ``d`` (suspension level 0)."""
    by_t: dict[int, list[SpectrumPoint]] = {}
    for p in points:
        if p.i == 0:
            by_t.setdefault(p.t, []).append(p)
    bad = []
    for t, row in sorted(by_t.items()):
        row.sort(key=lambda p: p.d)
        bad += [(t, b.d) for a, b in zip(row, row[1:]) if not b.exponent > a.exponent]
    return bad


@dataclass(frozen=True)
class DensityReport:
    t: int
    epsilon: float
    values: tuple[float, ...]
    left_gap: float
    right_gap: float
    max_interior_gap: float
    threshold: float
    threshold_met: bool
    dense: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "epsilon": self.epsilon,
            "left_gap": self.left_gap,
            "right_gap": self.right_gap,
            "max_interior_gap": self.max_interior_gap,
            "threshold": self.threshold,
            "threshold_met": self.threshold_met,
            "dense": self.dense,
            "count": len(self.values),
        }


def density_check(t: int, epsilon: float) -> DensityReport:
    """Gaps of ``{log_t d : 2 <= d <= t - 4}`` in ``(0, 1)``.

    The set is epsilon-dense when every point of ``(0, 1)`` is within
    ``epsilon`` of it: both end gaps at most ``epsilon`` and consecutive gaps
    at most ``2 epsilon``.  Density is asserted whenever ``t > e^(2/epsilon)``.
    """
    if t < 6:
        raise PreconditionViolated(f"need t >= 6, got {t}")
    if epsilon <= 0:
        raise PreconditionViolated("epsilon must be positive")
    ln_t = math.log(t)
    vals = tuple(math.log(d) / ln_t for d in range(2, t - 3))
    gaps = [b - a for a, b in zip(vals, vals[1:])]
    for d, g in zip(range(2, t - 4), gaps):
        # mean value bound for y -> ln(y)/ln(t)
        assert g <= 1.0 / (d * ln_t) * (1 + 1e-12), (t, d)
    left, right = vals[0], 1.0 - vals[-1]
    interior = max(gaps, default=0.0)
    dense = left <= epsilon and right <= epsilon and interior <= 2 * epsilon
    threshold = math.exp(2.0 / epsilon)
    met = t > threshold
    if met and not dense:
        raise AssertionError(f"t = {t} exceeds e^(2/eps) but the set is not {epsilon}-dense")
    return DensityReport(t, epsilon, vals, left, right, interior, threshold, met, dense)


def spectra_figure_data(k_max: int, samples: int, *, t_max: int | None = None) -> dict[str, Any]:
    """Intervals and sample exponents for dimensions ``k = 2..k_max``.

    ``samples`` points per dimension are taken from the lowest-trace
    matrices first.  The lower end ``1 + 1/k`` of the previously known dense
    range is carried as metadata only.
    """
    if k_max < 2:
        raise PreconditionViolated("k_max must be >= 2")
    if samples < 0:
        raise PreconditionViolated("samples must be >= 0")
    if t_max is None:
        # smallest trace range holding `samples` matrices (t - 3 of them per trace)
        t_max, count = 5, 2
        while count < samples:
            t_max += 1
            count += t_max - 3
    pts = enumerate_exponents(t_max, k_max - 2)
    rows = []
    for k in range(2, k_max + 1):
        i = k - 2
        endpoint = suspension_exponent(Fraction(2), i)
        assert endpoint == Fraction(k, k - 1)
        chosen = [p for p in pts if p.k == k][:samples]
        rows.append(
            {
                "k": k,
                "i": i,
                "endpoint": endpoint,
                "endpoint_label": f"{endpoint.numerator}/{endpoint.denominator}",
                "prior_work_start": Fraction(k + 1, k),
                "prior_work_label": "external claim",
                "points": chosen,
            }
        )
    return {"k_max": k_max, "samples": samples, "t_max": t_max, "dimensions": rows}
