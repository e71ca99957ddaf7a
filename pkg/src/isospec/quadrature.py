"""Adaptive Simpson quadrature."""

from __future__ import annotations

from typing import Callable

from .errors import QuadratureNonConvergent


def adaptive_simpson(
    f: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-9,
    max_depth: int = 50,
    max_evals: int = 200_000,
) -> float:
    """Integrate ``f`` over ``[a, b]`` to absolute tolerance ``tol``.

    Classic recursive Simpson with Richardson correction; the tolerance is
    halved at each split.  Raises ``QuadratureNonConvergent`` when the depth
    or evaluation budget runs out before every panel is accepted.
    """
    if a == b:
        return 0.0
    evals = 0

    def call(x: float) -> float:
        nonlocal evals
        evals += 1
        if evals > max_evals:
            raise QuadratureNonConvergent(f"more than {max_evals} evaluations")
        return f(x)

    fa, fb = call(a), call(b)
    m = 0.5 * (a + b)
    fm = call(m)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0

    # explicit stack keeps deep refinements off the interpreter stack
    total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a0, b0, fa0, fm0, fb0, s, eps, depth = stack.pop()
        m0 = 0.5 * (a0 + b0)
        lm, rm = 0.5 * (a0 + m0), 0.5 * (m0 + b0)
        flm, frm = call(lm), call(rm)
        left = (m0 - a0) * (fa0 + 4.0 * flm + fm0) / 6.0
        right = (b0 - m0) * (fm0 + 4.0 * frm + fb0) / 6.0
        delta = left + right - s
        if abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
            continue
        if depth >= max_depth:
            raise QuadratureNonConvergent(f"depth {max_depth} reached on [{a0}, {b0}]")
        stack.append((m0, b0, fm0, frm, fb0, right, eps / 2.0, depth + 1))
        stack.append((a0, m0, fa0, flm, fm0, left, eps / 2.0, depth + 1))
    return total
