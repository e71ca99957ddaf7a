"""Model geometry of G_A: diagonalizer, lattice, fundamental cell and metric.

Conventions
-----------
``B`` maps lattice coordinates ``(u, v)`` (where the lattice is ``Z^2``) to the
model coordinates ``(x, y)``; ``B A B^-1 = diag(lam, mu)``.  The columns of
``B^-1`` are eigenvectors of ``A`` with equal Euclidean norm and
``det B = 1``.  The lambda-eigenvector has positive first component and
occupies the x-slot; the mu-eigenvector's sign is whatever makes
``det B = +1``.

Working in lattice coordinates makes the cell overlay exact: every cut line
has an integer direction and passes through integer points, so the
horizontal 2-cells are computed with ``Fraction`` arithmetic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .errors import DegenerateOverlay
from .exponents import EigenPair, IntMatrix2, eigen_data
from .quadrature import adaptive_simpson

__all__ = [
    "MetricFunctionals",
    "ModelGeometry",
    "build_geometry",
    "cell_area_extrema",
    "convex_pieces",
    "pieces_in_image_cell",
    "polygon_area",
]

FPoint = tuple[Fraction, Fraction]


class MetricFunctionals:
    """Length, area and volume functionals of ``ds^2 = lam^-2z dx^2 + mu^-2z dy^2 + dz^2``."""

    def __init__(self, lam: float, mu: float, tol: float = 1e-9) -> None:
        if not (lam > 0 and mu > 0):
            raise ValueError("metric weights must be positive")
        self.lam = lam
        self.mu = mu
        self.tol = tol
        self._log_lam = math.log(lam)
        self._log_mu = math.log(mu)
        self._log_d = math.log(lam * mu)

    def area_weight(self, z: float) -> float:
        return math.exp(-z * self._log_d)

    def horizontal_area(self, euclidean_area: float, z: float) -> float:
        """Riemannian area of a horizontal region at height ``z``."""
        if euclidean_area < 0:
            raise ValueError("negative area")
        return euclidean_area * self.area_weight(z)

    def slab_volume(self, euclidean_area: float, z0: float, z1: float) -> float:
        """Volume of ``region x [z0, z1]`` (closed form of the ``(lam mu)^-z`` integral)."""
        return euclidean_area * (self.area_weight(z0) - self.area_weight(z1)) / self._log_d

    def lateral_integrand(self, dx: float, dy: float, z: float) -> float:
        return math.hypot(dx * math.exp(-z * self._log_lam), dy * math.exp(-z * self._log_mu))

    def lateral_area(self, dx: float, dy: float, z0: float, z1: float) -> float:
        """Area of the vertical face ``segment(dx, dy) x [z0, z1]``."""
        if not z1 > z0:
            raise ValueError("need z1 > z0")
        if dx == 0 and dy == 0:
            return 0.0
        return adaptive_simpson(lambda z: self.lateral_integrand(dx, dy, z), z0, z1, self.tol)

    def projection_ratio(self, dx: float, dy: float, z: float, axis: str) -> float:
        """Jacobian of the coordinate projection of a vertical face onto the xz (``"x"``) or yz plane."""
        ex = abs(dx) * math.exp(-z * self._log_lam)
        ey = abs(dy) * math.exp(-z * self._log_mu)
        return (ex if axis == "x" else ey) / math.hypot(ex, ey)


@dataclass(frozen=True)
class HorizontalCell:
    """One horizontal 2-cell: a convex piece of the unit cell, in lattice coordinates."""

    vertices: tuple[FPoint, ...]
    lattice_area: Fraction
    riemannian_area: float


@dataclass
class ModelGeometry:
    matrix: IntMatrix2
    eigen: EigenPair
    B: np.ndarray
    B_inv: np.ndarray
    gamma1: np.ndarray
    gamma2: np.ndarray
    Q: np.ndarray
    w: float
    cellV: float
    metric: MetricFunctionals
    area_min: float = float("nan")
    area_max: float = float("nan")
    J: float = float("nan")
    horizontal_cells: list[HorizontalCell] = field(default_factory=list)
    vertical_face_areas: tuple[float, float] = (float("nan"), float("nan"))

    @property
    def lam(self) -> float:
        return self.eigen.lam

    @property
    def mu(self) -> float:
        return self.eigen.mu

    @property
    def d(self) -> int:
        return self.eigen.det

    @property
    def D(self) -> np.ndarray:
        return np.diag([self.lam, self.mu])

    @property
    def det_B(self) -> float:
        return float(np.linalg.det(self.B))

    def level_map(self, level: int, offset: Sequence[float] = (0.0, 0.0)) -> np.ndarray:
        """Affine map (3x3 homogeneous) from lattice coords to level-``level`` model coords."""
        M = np.eye(3)
        M[:2, :2] = np.diag([self.lam ** (level - 1), self.mu ** (level - 1)]) @ self.B
        M[:2, 2] = offset
        return M

    def summary(self) -> dict:
        return {
            "B": self.B.tolist(),
            "gamma1": self.gamma1.tolist(),
            "gamma2": self.gamma2.tolist(),
            "w": self.w,
            "cellV": self.cellV,
            "area_min": self.area_min,
            "area_max": self.area_max,
            "J": self.J,
            "normalization": "det B = 1, equal-norm eigenvector columns of B^-1, "
            "lambda eigenvector first component > 0",
        }


def _diagonalizer(A: IntMatrix2, eig: EigenPair) -> np.ndarray:
    """Return ``B^-1`` (columns: lambda- and mu-eigenvectors)."""
    # (A - x I) v = 0 is solved by v = (a12, x - a11); a12 != 0 for admissible A.
    if A.a12 == 0:
        raise ValueError("a12 = 0 cannot occur for an admissible matrix")
    s = 1.0 if A.a12 > 0 else -1.0
    v_lam = s * np.array([A.a12, eig.lam - A.a11], dtype=float)
    v_mu = s * np.array([A.a12, eig.mu - A.a11], dtype=float)
    det0 = v_lam[0] * v_mu[1] - v_lam[1] * v_mu[0]
    if det0 < 0:
        v_mu = -v_mu
        det0 = -det0
    r = np.linalg.norm(v_lam) / np.linalg.norm(v_mu)
    # s1 * |v_lam| = s2 * |v_mu| and s1 * s2 * det0 = 1
    s1 = 1.0 / math.sqrt(det0 * r)
    s2 = s1 * r
    return np.column_stack([s1 * v_lam, s2 * v_mu])


def build_geometry(A: IntMatrix2, *, with_extrema: bool = True) -> ModelGeometry:
    eig = eigen_data(A)
    B_inv = _diagonalizer(A, eig)
    B = np.linalg.inv(B_inv)
    diag = B @ A.to_array() @ B_inv
    if abs(diag[0, 1]) > 1e-10 * eig.lam or abs(diag[1, 0]) > 1e-10 * eig.lam:
        raise AssertionError(f"diagonalizer failed: {diag}")
    g1, g2 = B[:, 0].copy(), B[:, 1].copy()
    Q = np.array([[0.0, 0.0], g1, g1 + g2, g2])
    w = max(np.linalg.norm(g1 + g2), np.linalg.norm(g1 - g2))
    area_q = abs(float(np.linalg.det(B)))
    d = eig.det
    cellV = area_q * (1.0 - 1.0 / d) / math.log(d)
    geom = ModelGeometry(
        matrix=A,
        eigen=eig,
        B=B,
        B_inv=B_inv,
        gamma1=g1,
        gamma2=g2,
        Q=Q,
        w=float(w),
        cellV=cellV,
        metric=MetricFunctionals(eig.lam, eig.mu),
    )
    if with_extrema:
        a, c, j = cell_area_extrema(geom)
        geom.area_min, geom.area_max, geom.J = a, c, j
    return geom


# ---------------------------------------------------------------------------
# exact convex cutting in lattice coordinates


def polygon_area(poly: Sequence[tuple]) -> Fraction | float:
    """Signed shoelace area (exact for ``Fraction`` input)."""
    n = len(poly)
    s = 0
    for k in range(n):
        x0, y0 = poly[k]
        x1, y1 = poly[(k + 1) % n]
        s += x0 * y1 - x1 * y0
    return Fraction(s, 2) if isinstance(s, int) else s / 2


def _split(poly: list[FPoint], a: int, b: int, c: Fraction) -> tuple[list[FPoint], list[FPoint]]:
    """Split a convex polygon by ``a*u + b*v = c`` into (<= c, >= c) parts."""
    lo: list[FPoint] = []
    hi: list[FPoint] = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        fp = a * p[0] + b * p[1] - c
        fq = a * q[0] + b * q[1] - c
        if fp <= 0:
            lo.append(p)
        if fp >= 0:
            hi.append(p)
        if (fp < 0 < fq) or (fq < 0 < fp):
            t = fp / (fp - fq)
            x = (p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1]))
            lo.append(x)
            hi.append(x)
    return lo, hi


def _line_family(direction: tuple[int, int]) -> tuple[int, int, int]:
    """Normal ``(a, b)`` and spacing ``g`` of lines through Z^2 along ``direction``."""
    p, q = direction
    g = math.gcd(p, q)
    return q, -p, g


def convex_pieces(
    poly: Sequence[tuple[int, int]], directions: Sequence[tuple[int, int]]
) -> list[list[FPoint]]:
    """Cut a convex lattice polygon by every line through Z^2 parallel to ``directions``."""
    pieces: list[list[FPoint]] = [[(Fraction(x), Fraction(y)) for x, y in poly]]
    for direction in directions:
        a, b, g = _line_family(direction)
        values = [a * x + b * y for x, y in poly]
        lo, hi = min(values), max(values)
        cuts = [c for c in range(math.ceil(lo / g) * g, hi + 1, g) if lo < c < hi]
        for c in cuts:
            nxt = []
            for piece in pieces:
                vals = [a * x + b * y for x, y in piece]
                if min(vals) < c < max(vals):
                    left, right = _split(piece, a, b, Fraction(c))
                    nxt.extend([left, right])
                else:
                    nxt.append(piece)
            pieces = nxt
    return pieces


@lru_cache(maxsize=64)
def _overlay_pieces(A: IntMatrix2) -> tuple[tuple[FPoint, ...], ...]:
    a = A.rows()
    directions = [(a[0][0], a[1][0]), (a[0][1], a[1][1])]
    unit = [(0, 0), (1, 0), (1, 1), (0, 1)]
    return tuple(tuple(p) for p in convex_pieces(unit, directions))


def pieces_in_image_cell(A: IntMatrix2) -> list[list[FPoint]]:
    """Horizontal cells inside one image cell ``A[0,1]^2`` (the bottom of a level-2 cell)."""
    a = A.rows()
    e1, e2 = (a[0][0], a[1][0]), (a[0][1], a[1][1])
    image = [(0, 0), e1, (e1[0] + e2[0], e1[1] + e2[1]), e2]
    if polygon_area(image) < 0:
        image = image[::-1]
    return convex_pieces(image, [(1, 0), (0, 1), e1, e2])


def _min_ratio(metric: MetricFunctionals, dx: float, dy: float, axis: str, grid: int) -> float:
    zs = np.linspace(0.0, 1.0, grid)
    vals = np.array([metric.projection_ratio(dx, dy, z, axis) for z in zs])
    k = int(np.argmin(vals))
    lo, hi = zs[max(k - 1, 0)], zs[min(k + 1, grid - 1)]
    best = float(vals[k])
    if hi > lo:
        res = minimize_scalar(
            lambda z: metric.projection_ratio(dx, dy, z, axis),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-12},
        )
        best = min(best, float(res.fun))
    return best


def cell_area_extrema(geom: ModelGeometry, grid: int = 10_000) -> tuple[float, float, float]:
    """Minimum/maximum Riemannian 2-cell area and the projection Jacobian bound ``J``."""
    det_b = abs(geom.det_B)
    weight = 1.0 / geom.d  # horizontal cells measured at height 1
    cells = []
    for piece in _overlay_pieces(geom.matrix):
        area = polygon_area(piece)
        area = abs(area)
        if area * det_b < 1e-12:
            raise DegenerateOverlay(f"overlay piece of area {float(area)}")
        cells.append(HorizontalCell(piece, area, float(area) * det_b * weight))
    metric = geom.metric
    vert = tuple(
        metric.lateral_area(float(g[0]), float(g[1]), 0.0, 1.0) for g in (geom.gamma1, geom.gamma2)
    )
    geom.horizontal_cells = cells
    geom.vertical_face_areas = vert  # type: ignore[assignment]
    areas = [c.riemannian_area for c in cells] + list(vert)
    J = min(
        _min_ratio(metric, float(g[0]), float(g[1]), axis, grid)
        for g in (geom.gamma1, geom.gamma2)
        for axis in ("x", "y")
    )
    return min(areas), max(areas), J
