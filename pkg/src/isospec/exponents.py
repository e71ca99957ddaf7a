"""Eigen-data of 2x2 monodromy matrices, exponent formulas and matrix synthesis.

Exact eigenvalues live in the quadratic ring generated by ``sqrt(t^2 - 4d)``;
all floating-point exponents are derived from them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Real
from typing import Sequence

import numpy as np

from .errors import BadSpectrum, BadTarget, NonHyperbolic, PreconditionViolated

__all__ = [
    "QuadraticInteger",
    "IntMatrix2",
    "EigenPair",
    "SynthesisCertificate",
    "eigen_data",
    "companion_matrix",
    "eigen_bounds",
    "exponent_of",
    "synthesize_matrix",
    "suspension_exponent",
    "suspension_recurrence",
    "suspend_matrix",
]


@dataclass(frozen=True)
class QuadraticInteger:
    """The number ``(p + q*sqrt(disc)) / 2`` with integer ``p``, ``q``, ``disc``."""

    p: int
    q: int
    disc: int

    def __post_init__(self) -> None:
        if self.disc < 0:
            raise ValueError("negative discriminant")

    @classmethod
    def from_int(cls, n: int, disc: int) -> QuadraticInteger:
        return cls(2 * n, 0, disc)

    def _coerce(self, other: object) -> QuadraticInteger:
        if isinstance(other, QuadraticInteger):
            if other.disc != self.disc and other.q != 0 and self.q != 0:
                raise ValueError("mixing quadratic fields")
            return other
        if isinstance(other, int):
            return QuadraticInteger.from_int(other, self.disc)
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: object) -> QuadraticInteger:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return QuadraticInteger(self.p + o.p, self.q + o.q, self.disc)

    __radd__ = __add__

    def __neg__(self) -> QuadraticInteger:
        return QuadraticInteger(-self.p, -self.q, self.disc)

    def __sub__(self, other: object) -> QuadraticInteger:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self + (-o)

    def __rsub__(self, other: object) -> QuadraticInteger:
        return (-self) + other

    def __mul__(self, other: object) -> QuadraticInteger:
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        # (p1 + q1 r)(p2 + q2 r) / 4, r = sqrt(disc)
        num_p = self.p * o.p + self.q * o.q * self.disc
        num_q = self.p * o.q + self.q * o.p
        if num_p % 2 or num_q % 2:
            raise ValueError("product leaves the ring (p + q sqrt(D))/2")
        return QuadraticInteger(num_p // 2, num_q // 2, self.disc)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if isinstance(other, int):
            return self.q == 0 and self.p == 2 * other
        if isinstance(other, QuadraticInteger):
            return (self.p, self.q) == (other.p, other.q) and (
                self.q == 0 or self.disc == other.disc
            )
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.p, self.q, self.disc if self.q else None))

    def conjugate(self) -> QuadraticInteger:
        return QuadraticInteger(self.p, -self.q, self.disc)

    def is_integer(self) -> bool:
        return self.q == 0 and self.p % 2 == 0

    def __int__(self) -> int:
        if not self.is_integer():
            raise ValueError(f"{self} is not a rational integer")
        return self.p // 2

    def __float__(self) -> float:
        root = math.sqrt(self.disc)
        if self.p * self.q >= 0:
            return (self.p + self.q * root) / 2.0
        # Opposite signs: rationalize to avoid cancellation.
        norm = self.p * self.p - self.q * self.q * self.disc
        return (norm / (self.p - self.q * root)) / 2.0

    def __str__(self) -> str:
        return f"({self.p}{self.q:+}*sqrt({self.disc}))/2"


@dataclass(frozen=True)
class IntMatrix2:
    a11: int
    a12: int
    a21: int
    a22: int

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> IntMatrix2:
        (a, b), (c, d) = rows
        vals = [a, b, c, d]
        if any(int(v) != v for v in vals):
            raise ValueError("matrix entries must be integers")
        return cls(*(int(v) for v in vals))

    @property
    def trace(self) -> int:
        return self.a11 + self.a22

    @property
    def det(self) -> int:
        return self.a11 * self.a22 - self.a12 * self.a21

    def rows(self) -> list[list[int]]:
        return [[self.a11, self.a12], [self.a21, self.a22]]

    def to_array(self) -> np.ndarray:
        return np.array(self.rows(), dtype=np.int64)

    def __str__(self) -> str:
        return f"{self.a11},{self.a12};{self.a21},{self.a22}"


@dataclass(frozen=True)
class EigenPair:
    trace: int
    det: int
    discriminant: int
    lambda_exact: QuadraticInteger
    mu_exact: QuadraticInteger
    lam: float
    mu: float
    alpha: float


def _lambda_float(t: int, d: int) -> float:
    return (t + math.sqrt(t * t - 4 * d)) / 2.0


def exponent_of(t: int, d: int) -> float:
    """``1 + log_lambda(d)`` for trace ``t`` and determinant ``d`` (no validation)."""
    return 1.0 + math.log(d) / math.log(_lambda_float(t, d))


def eigen_data(A: IntMatrix2) -> EigenPair:
    t, d = A.trace, A.det
    disc = t * t - 4 * d
    if disc <= 0:
        raise NonHyperbolic(f"t^2 - 4d = {disc} <= 0 for {A}")
    if d < 2 or d > t - 2:
        # d > t - 2 is equivalent to mu >= 1 once lambda*mu = d > 1.
        raise BadSpectrum(f"need 2 <= d <= t - 2, got t={t}, d={d}")
    lam_x = QuadraticInteger(t, 1, disc)
    mu_x = QuadraticInteger(t, -1, disc)
    lam = _lambda_float(t, d)
    mu = d / lam
    alpha = 1.0 + math.log(d) / math.log(lam)
    return EigenPair(t, d, disc, lam_x, mu_x, lam, mu, alpha)


def companion_matrix(t: int, d: int) -> IntMatrix2:
    return IntMatrix2(t, -d, 1, 0)


def eigen_bounds(t: int, d: int) -> tuple[float, float, float]:
    """Return ``(t - 4, lambda, t)`` after checking ``t - 4 <= lambda <= t``."""
    if t < 4 or not (0 <= d <= t):
        raise PreconditionViolated(f"need t >= 4 and t >= d >= 0, got t={t}, d={d}")
    lam = _lambda_float(t, d)
    if not (t - 4 <= lam <= t):
        raise AssertionError(f"eigenvalue bound failed: {t - 4} <= {lam} <= {t}")
    return float(t - 4), lam, float(t)


@dataclass(frozen=True)
class SynthesisCertificate:
    t: int
    d: int
    alpha_target: float
    epsilon: float
    alpha_achieved: float
    guarded: bool
    lam: float
    chain: dict[str, bool] = field(default_factory=dict)

    @property
    def error(self) -> float:
        return abs(self.alpha_achieved - self.alpha_target)

    def chain_values(self) -> tuple[float, float, float, float]:
        return (2.0, float(self.d), float(self.t - 4), self.lam)


def _chain(t: int, d: int, lam: float) -> dict[str, bool]:
    return {
        "2<=d": 2 <= d,
        "d<=t-4": d <= t - 4,
        "t-4<=lambda": t - 4 <= lam,
        "lambda<=t": lam <= t,
    }


_SCAN_START = 5


def _first_t_for_d(d: int, gap: int, alpha: float, eps: float) -> int | None:
    """Smallest scanned ``t`` with ``|exponent(t, d) - alpha| < eps``, if any.

    For fixed ``d`` the exponent is strictly decreasing in ``t``.
    """
    t_start = max(_SCAN_START, d + gap)
    hi = alpha + eps
    if hi >= 2.0:
        t1 = t_start
    else:
        lam_lo = d ** (1.0 / (hi - 1.0))
        t1 = max(t_start, int(lam_lo + d / lam_lo) - 1)
        while exponent_of(t1, d) >= hi:
            t1 += 1
        while t1 - 1 >= t_start and exponent_of(t1 - 1, d) < hi:
            t1 -= 1
    if exponent_of(t1, d) > alpha - eps:
        return t1
    return None


def _lower_bound_t(d: int, gap: int, alpha: float, eps: float) -> int:
    t_start = max(_SCAN_START, d + gap)
    hi = alpha + eps
    if hi >= 2.0:
        return t_start
    lam_lo = d ** (1.0 / (hi - 1.0))
    return max(t_start, int(lam_lo + d / lam_lo) - 2)


def synthesize_matrix(
    alpha: float, epsilon: float, *, guarded: bool = False
) -> tuple[IntMatrix2, SynthesisCertificate]:
    """Find ``A(t, d)`` whose exponent is within ``epsilon`` of ``alpha``.

    The result is the first hit of the scan ``t = 5, 6, ...`` over
    ``2 <= d <= t - 2`` (or ``t - 4`` when ``guarded``), ties broken by
    smallest error and then smallest ``d``.  Rather than walking every ``t``,
    each ``d`` is solved for its first admissible ``t`` using monotonicity of
    the exponent in ``t``; the answer is identical to the literal scan.
    """
    if not (1.0 < alpha < 2.0) or not (epsilon > 0.0) or math.isnan(epsilon):
        raise BadTarget(f"need 1 < alpha < 2 and epsilon > 0, got {alpha}, {epsilon}")
    gap = 4 if guarded else 2
    best_t: int | None = None
    hits: list[tuple[float, int]] = []
    d = 2
    while True:
        lb = _lower_bound_t(d, gap, alpha, epsilon)
        if best_t is not None and lb > best_t:
            break
        t = _first_t_for_d(d, gap, alpha, epsilon)
        if t is not None:
            if best_t is None or t < best_t:
                best_t = t
                hits = []
            if t == best_t:
                hits.append((abs(exponent_of(t, d) - alpha), d))
        d += 1
    assert best_t is not None
    _, d = min(hits)
    t = best_t
    A = companion_matrix(t, d)
    eig = eigen_data(A)
    cert = SynthesisCertificate(
        t=t,
        d=d,
        alpha_target=alpha,
        epsilon=epsilon,
        alpha_achieved=eig.alpha,
        guarded=guarded,
        lam=eig.lam,
        chain=_chain(t, d, eig.lam),
    )
    if not cert.error < epsilon:
        raise AssertionError("synthesis returned an out-of-tolerance matrix")
    return A, cert


def _check_suspension_args(alpha: Real, i: int) -> None:
    if not (1 <= alpha <= 2) or i < 0 or int(i) != i:
        raise BadTarget(f"need alpha in [1, 2] and integer i >= 0, got {alpha}, {i}")


def suspension_exponent(alpha: Real, i: int) -> Real:
    """Exponent of the ``(i+2)``-dimensional Dehn function of ``G_{Sigma^i A}``.

    Works with ``Fraction`` input and then returns an exact ``Fraction``.
    """
    _check_suspension_args(alpha, i)
    return ((i + 1) * alpha - i) / (i * alpha - (i - 1))


def suspension_recurrence(alpha: Real, i: int) -> Real:
    """Same exponent via ``s(0) = alpha``, ``s(j) = 2 - 1/s(j-1)``."""
    _check_suspension_args(alpha, i)
    s = alpha
    for _ in range(i):
        s = 2 - Fraction(1) / s if isinstance(s, Fraction) else 2 - 1 / s
    return s


def suspend_matrix(A: IntMatrix2 | np.ndarray | Sequence[Sequence[int]], i: int) -> np.ndarray:
    """Block-diagonal ``diag(A, I_i)``."""
    if i < 0:
        raise PreconditionViolated("suspension level must be >= 0")
    M = A.to_array() if isinstance(A, IntMatrix2) else np.asarray(A, dtype=np.int64)
    n = M.shape[0]
    out = np.eye(n + i, dtype=np.int64)
    out[:n, :n] = M
    return out
