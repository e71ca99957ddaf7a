"""Extremal boxes R_n, their combinatorial approximations S_n, and the balls B_n.

Heights are model heights: slab ``i`` occupies ``[i - 1, i]`` and its cross
section ``D_i`` lives in the level-``i`` arrangement.  Horizontal Euclidean
areas are weighted by ``(lam mu)^-z`` at the height where they sit.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import shapely
from shapely.geometry import Polygon, box

from .errors import NonSimpleLoop, Overflow, PolygonOpFailed, PreconditionViolated
from .geometry import ModelGeometry
from .lattice_complex import Strip, TracedLine, backtracking_constant, projection_multiplicity, trace_strip_line

__all__ = [
    "RegionRn",
    "Slab",
    "Stack",
    "Ball",
    "BoundaryMeasurement",
    "measure_Rn",
    "five_face_area",
    "kappa",
    "annulus_area",
    "annulus_union_area",
    "thread_count",
    "build_slab",
    "build_stack",
    "measure_boundary",
    "build_ball",
    "coset_offset",
    "overflow_cap",
]

log = logging.getLogger(__name__)

_OVERFLOW = 1e300


@dataclass(frozen=True)
class RegionRn:
    n: float
    rvol: float
    rvol_lower: float
    area_top: float
    area_sides_x: tuple[float, float]
    area_sides_y: tuple[float, float]
    area_bottom: float
    area_upper_bound: float

    @property
    def area_upper(self) -> float:
        """Area of the five faces other than the bottom."""
        return self.area_top + sum(self.area_sides_x) + sum(self.area_sides_y)


def overflow_cap(geom: ModelGeometry) -> int:
    """Largest ``n`` with ``lam^n (lam mu)^n < 1e300``."""
    return int(math.floor(math.log(_OVERFLOW) / math.log(geom.lam * geom.d))) - 1


def _check_n(geom: ModelGeometry, n: float) -> None:
    if n < 1:
        raise PreconditionViolated(f"need n >= 1, got {n}")
    if n * math.log(geom.lam * geom.d) >= math.log(_OVERFLOW):
        raise Overflow(f"lam^n (lam mu)^n exceeds 1e300 at n = {n}")


def measure_Rn(geom: ModelGeometry, n: float) -> RegionRn:
    """Closed-form volume and face areas of ``[0, lam^n] x [0, (lam mu)^n] x [0, n]``.

    ``n`` may be real (the shifted box of height ``n + kappa`` uses this too).
    """
    _check_n(geom, n)
    lam, mu = geom.lam, geom.mu
    ln_d = math.log(lam * mu)
    lam_n = lam**n
    base = lam_n * (lam * mu) ** n
    rvol = (base - lam_n) / ln_d
    rvol_lower = base / (2.0 * ln_d)
    side_x = (lam_n - 1.0) / math.log(lam)
    side_y = lam_n * (1.0 - mu**n) / math.log(1.0 / mu)
    upper = (1.0 + 2.0 / math.log(lam) - 2.0 / math.log(mu)) * lam_n
    return RegionRn(n, rvol, rvol_lower, lam_n, (side_x, side_x), (side_y, side_y), base, upper)


def five_face_area(geom: ModelGeometry, n: float) -> float:
    return measure_Rn(geom, n).area_upper


def kappa(geom: ModelGeometry) -> float:
    lam, w = geom.lam, geom.w
    return max(math.log1p(2.0 * w / lam) / math.log(lam), math.log1p(2.0 * w) / math.log(geom.d))


def annulus_area(geom: ModelGeometry, i: int, n: int) -> float:
    """Riemannian area of the annulus ``W_{i,n} x i`` minus the open rectangle (closed form)."""
    lam, mu, w = geom.lam, geom.mu, geom.w
    return (lam ** (n - i) + 2 * w / lam) * (lam**n * mu ** (n - i) + 2 * w / mu) - lam ** (
        n - i
    ) * lam**n * mu ** (n - i)


def annulus_union_area(geom: ModelGeometry, i: int, n: int) -> float:
    """Riemannian area at height ``i`` of ``W_{i,n}`` union ``W_{i+1,n}`` outside the open rectangle.

    ``D_i`` and ``D_{i+1}`` only meet the strips of their own level, so their
    symmetric difference lies here.  At height ``i`` the level-``i`` strips
    have Riemannian widths ``w/lam`` (x) and ``w/mu`` (y), the level-``i+1``
    strips have width ``w`` in both directions.
    """
    lam, mu, w = geom.lam, geom.mu, geom.w
    a, b = lam ** (n - i), lam**n * mu ** (n - i)
    return (a + 2 * max(w, w / lam)) * (b + 2 * max(w, w / mu)) - a * b


def thread_count() -> int:
    """Worker threads, capped by ``ISOSPEC_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("ISOSPEC_THREADS", "1")))
    except ValueError:
        return 1


# ---------------------------------------------------------------------------


@dataclass
class Slab:
    i: int
    n: int
    quad: list[TracedLine]
    loop: np.ndarray  # (m, 2) lattice indices, counterclockwise, not closed
    polygon: np.ndarray  # (m, 2) model coordinates at level i
    W_in: tuple[float, float, float, float]
    area: float  # Euclidean area of D_i
    vertical: float  # Riemannian area of the four side walls
    offset: tuple[float, float] = (0.0, 0.0)

    @property
    def shape(self) -> Polygon:
        return Polygon(self.polygon)


@dataclass
class BoundaryMeasurement:
    top: float
    vertical: float
    horizontal: float
    total_upper: float
    bottom: float
    fold: float = 0.0
    horizontal_levels: list[float] = field(default_factory=list)
    annulus_bounds: list[float] = field(default_factory=list)
    annulus_union_bounds: list[float] = field(default_factory=list)
    flagged: bool = False

    def __post_init__(self) -> None:
        parts = (self.top, self.vertical, self.horizontal, self.bottom, self.fold)
        if min(parts) < 0:
            raise ValueError("negative boundary part")


@dataclass
class Stack:
    n: int
    slabs: list[Slab]
    kappa: float
    boundary: BoundaryMeasurement | None = None
    offset: tuple[float, float] = (0.0, 0.0)
    containment: list[dict[str, bool]] = field(default_factory=list)

    @property
    def rvol(self) -> float:
        return self._rvol

    def full_boundary(self) -> float:
        """Area of the whole boundary of this stack on its own (bottom face included)."""
        assert self.boundary is not None
        return self.boundary.total_upper + self.boundary.bottom


@dataclass
class Ball:
    n: int
    stack0: Stack
    stack1: Stack
    fold_area: float
    bottom_symdiff: float
    rarea: float  # Riemannian area of the boundary of the ball
    rarea_upper_parts: float  # sum of both stacks' upper boundaries (contains the boundary)
    x_n: tuple[float, float]
    y_n: float


# ---------------------------------------------------------------------------


def _rect(geom: ModelGeometry, n: int) -> tuple[float, float]:
    return geom.lam**n, float(geom.d) ** n


def _strips(geom: ModelGeometry, i: int, n: int):
    lam_n, top = _rect(geom, n)
    sx = geom.lam ** (i - 1) * geom.w
    sy = geom.mu ** (i - 1) * geom.w
    xwin = (-sx, lam_n + sx)
    ywin = (-sy, top + sy)
    return [
        (Strip("x", -sy, sy), xwin, False),
        (Strip("y", lam_n, sx), ywin, False),
        (Strip("x", top, sy), xwin, True),
        (Strip("y", -sx, sx), ywin, True),
    ], (-sx, lam_n + sx, -sy, top + sy)


def _keys(lattice: np.ndarray) -> np.ndarray:
    return lattice[:, 0].astype(np.int64) * (1 << 32) + lattice[:, 1].astype(np.int64)


def _first_common(line: np.ndarray, start: int, other: np.ndarray) -> int:
    hit = np.nonzero(np.isin(_keys(line[start:]), other))[0]
    return start + int(hit[0]) if hit.size else -1


def _index_of(line: np.ndarray, pt: np.ndarray) -> int:
    hit = np.nonzero((line[:, 0] == pt[0]) & (line[:, 1] == pt[1]))[0]
    return int(hit[0]) if hit.size else -1


def _trim(lines: list[TracedLine]) -> list[tuple[int, int]]:
    """Index ranges ``[start, end]`` of the four lines forming a simple loop.

    Corner ``(j, j+1)`` is the first vertex of line ``j`` (after its own start
    corner) that lies on line ``j + 1``; going once around, every used piece
    avoids the next line before the shared corner, which makes the loop simple.
    """
    lat = [ln.lattice for ln in lines]
    keys = [_keys(x) for x in lat]
    c41 = _first_common(lat[3], 0, keys[0])
    if c41 < 0:
        raise NonSimpleLoop("lines 4 and 1 do not meet")
    starts = [_index_of(lat[0], lat[3][c41]), -1, -1, -1]
    ends = [-1, -1, -1, c41]
    for j in range(3):
        e = _first_common(lat[j], starts[j], keys[j + 1])
        if e < 0:
            raise NonSimpleLoop(f"lines {j + 1} and {j + 2} do not meet after the corner")
        ends[j] = e
        starts[j + 1] = _index_of(lat[j + 1], lat[j][e])
    for j in range(4):
        if not starts[j] < ends[j]:
            raise NonSimpleLoop(f"corner order along line {j + 1} is reversed")
    return list(zip(starts, ends))


def _lattice_area2(loop: np.ndarray) -> int:
    x = loop[:, 0].astype(object)
    y = loop[:, 1].astype(object)
    return int(sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def build_slab(
    geom: ModelGeometry,
    i: int,
    n: int,
    *,
    offset: tuple[float, float] = (0.0, 0.0),
    k: int | None = None,
    margin_w: float = 10.0,
) -> Slab:
    if not (1 <= i <= n):
        raise PreconditionViolated(f"need 1 <= i <= n, got i={i}, n={n}")
    _check_n(geom, n)
    strips, W_in = _strips(geom, i, n)
    lines = []
    for strip, window, reverse in strips:
        ln = trace_strip_line(geom, strip, i, window, offset=offset, k=k, margin_w=margin_w)
        lines.append(ln.reversed() if reverse else ln)
    ranges = _trim(lines)
    pieces, trimmed = [], []
    for ln, (s, e) in zip(lines, ranges):
        pieces.append(ln.lattice[s:e])
        p_ax = 0 if ln.strip.axis == "x" else 1
        cert = projection_multiplicity(ln.polyline[s : e + 1, p_ax])
        trimmed.append(
            TracedLine(
                ln.level,
                ln.strip,
                ln.lattice[s : e + 1],
                ln.polyline[s : e + 1],
                cert,
                ln.offset,
                ln.edge_types[s:e],
            )
        )
    loop = np.concatenate(pieces, axis=0)
    lin = np.diag([geom.lam ** (i - 1), geom.mu ** (i - 1)]) @ geom.B
    poly = loop @ lin.T + np.asarray(offset)
    area2 = _lattice_area2(loop)
    if area2 <= 0:
        raise NonSimpleLoop("loop is not counterclockwise")
    area = area2 / 2.0 * abs(geom.det_B) * float(geom.d) ** (i - 1)
    shp = Polygon(poly)
    if not shp.is_valid:
        raise NonSimpleLoop(f"slab ({i}, {n}) boundary is not simple")
    # side walls: only two edge vectors occur at each level
    s = np.array([geom.lam ** (i - 1), geom.mu ** (i - 1)])
    wall = [geom.metric.lateral_area(*(s * g), i - 1.0, float(i)) for g in (geom.gamma1, geom.gamma2)]
    n_edges = np.zeros(2)
    for ln in trimmed:
        n_edges += np.bincount(ln.edge_types, minlength=2)
    vertical = float(n_edges @ np.array(wall))
    slab = Slab(i, n, trimmed, loop, poly, W_in, area, vertical, tuple(offset))
    _check_slab_containment(geom, slab)
    return slab


def _check_slab_containment(geom: ModelGeometry, slab: Slab) -> None:
    lam_n, top = _rect(geom, slab.n)
    xmin, xmax, ymin, ymax = slab.W_in
    p = slab.polygon
    inside_w = (
        p[:, 0].min() >= xmin and p[:, 0].max() <= xmax and p[:, 1].min() >= ymin and p[:, 1].max() <= ymax
    )
    covers = slab.shape.covers(box(0.0, 0.0, lam_n, top))
    if not (inside_w and covers):
        raise AssertionError(
            f"slab ({slab.i}, {slab.n}) containment failed: rect<=D {covers}, D<=W {inside_w}"
        )


def _r_prime_box(geom: ModelGeometry, n: int, kap: float) -> tuple[float, float, float, float]:
    x0 = -(geom.lam ** (n - 1)) * geom.w
    y0 = -geom.w
    return x0, x0 + geom.lam ** (n + kap), y0, y0 + float(geom.d) ** (n + kap)


def build_stack(
    geom: ModelGeometry,
    n: int,
    *,
    offset: tuple[float, float] = (0.0, 0.0),
    k: int | None = None,
    seed: int = 0,
) -> Stack:
    _check_n(geom, n)
    if k is None:
        k = backtracking_constant(geom)
    slabs = [build_slab(geom, i, n, offset=offset, k=k) for i in range(1, n + 1)]
    kap = kappa(geom)
    stack = Stack(n, slabs, kap, offset=tuple(offset))
    rx0, rx1, ry0, ry1 = _r_prime_box(geom, n, kap)
    lam_n, top = _rect(geom, n)
    for sl in slabs:
        p = sl.polygon
        stack.containment.append(
            {
                "R_n<=S_n": bool(sl.shape.covers(box(0.0, 0.0, lam_n, top))),
                "S_n<=R'": bool(
                    p[:, 0].min() >= rx0 and p[:, 0].max() <= rx1 and p[:, 1].min() >= ry0 and p[:, 1].max() <= ry1
                ),
            }
        )
    if not all(all(c.values()) for c in stack.containment):
        raise AssertionError(f"containment chain failed for n = {n}: {stack.containment}")
    stack._rvol = sum(geom.metric.slab_volume(sl.area, sl.i - 1.0, float(sl.i)) for sl in slabs)
    stack.boundary = measure_boundary(geom, stack, seed=seed)
    return stack


def _intersection_area(a: Polygon, b: Polygon, seed: int) -> tuple[float, bool]:
    try:
        return float(a.intersection(b).area), False
    except shapely.errors.GEOSException as exc:  # pragma: no cover - GEOS is robust here
        log.warning("polygon intersection failed (%s); using Monte Carlo", exc)
        return _mc_intersection_area(a, b, seed), True


def _mc_intersection_area(a: Polygon, b: Polygon, seed: int, samples: int = 1_000_000) -> float:
    xmin, ymin, xmax, ymax = a.bounds
    if not (xmax > xmin and ymax > ymin):
        raise PolygonOpFailed("degenerate polygon in Monte Carlo fallback")
    rng = np.random.default_rng(seed)
    pts = rng.uniform([xmin, ymin], [xmax, ymax], size=(samples, 2))
    hit = shapely.contains_xy(a, pts[:, 0], pts[:, 1]) & shapely.contains_xy(b, pts[:, 0], pts[:, 1])
    return float(hit.mean() * (xmax - xmin) * (ymax - ymin))


def measure_boundary(geom: ModelGeometry, stack: Stack, *, seed: int = 0) -> BoundaryMeasurement:
    """Top, vertical and horizontal parts of the upper boundary of a stack.

    The horizontal part at height ``h`` is ``D_h`` symmetric-difference
    ``D_{h+1}`` outside the open base rectangle, with ``D_0`` the rectangle
    itself, so ``h = 0`` contributes ``D_1`` minus the base.
    """
    n = stack.n
    d = geom.d
    lam_n, top_r = _rect(geom, n)
    rect_area = lam_n * top_r
    slabs = stack.slabs
    top = slabs[-1].area * float(d) ** (-n)
    vertical = sum(sl.vertical for sl in slabs)
    levels = [slabs[0].area - rect_area]
    flagged = False
    shapes = [sl.shape for sl in slabs]
    for h in range(1, n):
        inter, fl = _intersection_area(shapes[h - 1], shapes[h], seed + h)
        flagged |= fl
        sym = slabs[h - 1].area + slabs[h].area - 2.0 * inter
        levels.append(max(sym, 0.0) * float(d) ** (-h))
    horizontal = float(sum(levels))
    annuli = [annulus_area(geom, h, n) for h in range(n)]
    return BoundaryMeasurement(
        top=top,
        vertical=vertical,
        horizontal=horizontal,
        total_upper=top + vertical + horizontal,
        bottom=rect_area,
        horizontal_levels=levels,
        annulus_bounds=annuli,
        annulus_union_bounds=[annulus_union_area(geom, h, n) for h in range(n)],
        flagged=flagged,
    )


def coset_offset(geom: ModelGeometry) -> tuple[float, float]:
    """A point of ``D^-1(Gamma)`` outside ``Gamma``: the class of ``D^-1 gamma1`` when possible."""
    Dinv = np.array([1.0 / geom.lam, 1.0 / geom.mu])
    for g in (geom.gamma1, geom.gamma2, geom.gamma1 + geom.gamma2):
        c = Dinv * g
        m = geom.B_inv @ c
        if np.max(np.abs(m - np.round(m))) > 1e-6:
            return float(c[0]), float(c[1])
    raise AssertionError("lattice index d >= 2 guarantees a nontrivial coset")


def build_ball(geom: ModelGeometry, n: int, *, k: int | None = None, seed: int = 0) -> Ball:
    """Two stacks over the same base, in branches that split at height 0."""
    if k is None:
        k = backtracking_constant(geom)
    jobs = [dict(k=k, seed=seed), dict(offset=coset_offset(geom), k=k, seed=seed + 7919)]
    with ThreadPoolExecutor(max_workers=min(2, thread_count())) as pool:
        s0, s1 = pool.map(lambda kw: build_stack(geom, n, **kw), jobs)
    fold, fl = _intersection_area(s0.slabs[0].shape, s1.slabs[0].shape, seed)
    a0, a1 = s0.slabs[0].area, s1.slabs[0].area
    bottom_sym = max(a0 + a1 - 2.0 * fold, 0.0)
    rect_area = s0.boundary.bottom
    inner = 0.0
    for s in (s0, s1):
        b = s.boundary
        inner += b.top + b.vertical + (b.horizontal - b.horizontal_levels[0])
    rarea = inner + bottom_sym
    upper_parts = s0.boundary.total_upper + s1.boundary.total_upper
    if rarea > upper_parts * (1 + 1e-12):
        raise AssertionError("ball boundary exceeds the union of upper boundaries")
    s0.boundary.flagged |= fl
    y_n = s0.rvol + s1.rvol
    x_n = (rarea / geom.area_max, rarea / geom.area_min)
    if fold < rect_area * (1 - 1e-12):
        raise AssertionError("fold region does not contain the base rectangle")
    return Ball(n, s0, s1, fold, bottom_sym, rarea, upper_parts, x_n, y_n)
