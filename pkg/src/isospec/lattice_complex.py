"""Periodic edge arrangements and the embedded strip lines inside them.

The level-``i`` arrangement is the union of the sides of the cells
``D^(i-1)(gamma + Q)``; in lattice coordinates it is the integer grid, so a
level-``i`` object is stored as integer lattice indices plus the affine map
``m -> D^(i-1) B m + offset``.  Intersections between traced lines are then
decided on integer tuples.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .errors import CertificateExceeded, TraceFailed
from .geometry import ModelGeometry

__all__ = [
    "Arrangement",
    "Strip",
    "TracedLine",
    "backtracking_constant",
    "lattice_points_in_box",
    "projection_multiplicity",
    "trace_strip_line",
]

Axis = Literal["x", "y"]
_AX = {"x": 0, "y": 1}


@dataclass(frozen=True)
class Strip:
    """``axis="x"``: the strip ``R x [lo, lo + width]`` (projects onto x).

    ``axis="y"``: the strip ``[lo, lo + width] x R`` (projects onto y).
    """

    axis: Axis
    lo: float
    width: float

    @property
    def hi(self) -> float:
        return self.lo + self.width

    @property
    def transverse(self) -> Axis:
        return "y" if self.axis == "x" else "x"


@dataclass
class Arrangement:
    geom: ModelGeometry
    level: int
    offset: tuple[float, float] = (0.0, 0.0)

    @property
    def generators(self) -> tuple[np.ndarray, np.ndarray]:
        s = np.array([self.geom.lam ** (self.level - 1), self.geom.mu ** (self.level - 1)])
        return s * self.geom.gamma1, s * self.geom.gamma2

    @property
    def linear(self) -> np.ndarray:
        s = np.array([self.geom.lam ** (self.level - 1), self.geom.mu ** (self.level - 1)])
        return s[:, None] * self.geom.B

    def to_model(self, lattice: np.ndarray) -> np.ndarray:
        return lattice @ self.linear.T + np.asarray(self.offset)

    def materialize(self, window: tuple[float, float, float, float]) -> np.ndarray:
        """Full cell edges meeting the box ``(xmin, xmax, ymin, ymax)``, shape ``(m, 2, 2)``.

        Edges are clipped by bounding-box overlap only; every returned segment is
        a complete side of some cell.
        """
        xmin, xmax, ymin, ymax = window
        g1, g2 = self.generators
        pad_x = abs(g1[0]) + abs(g2[0])
        pad_y = abs(g1[1]) + abs(g2[1])
        pts = lattice_points_in_box(
            self.linear, self.offset, (xmin - pad_x, xmax + pad_x, ymin - pad_y, ymax + pad_y)
        )
        segs = []
        for e in (np.array([1, 0]), np.array([0, 1])):
            a = self.to_model(pts)
            b = self.to_model(pts + e)
            lo = np.minimum(a, b)
            hi = np.maximum(a, b)
            keep = (hi[:, 0] >= xmin) & (lo[:, 0] <= xmax) & (hi[:, 1] >= ymin) & (lo[:, 1] <= ymax)
            segs.append(np.stack([a[keep], b[keep]], axis=1))
        return np.concatenate(segs, axis=0)


@dataclass
class TracedLine:
    level: int
    strip: Strip
    lattice: np.ndarray  # (N, 2) integer lattice indices, in path order
    polyline: np.ndarray  # (N, 2) model coordinates at this level
    multiplicity_certificate: int
    offset: tuple[float, float] = (0.0, 0.0)
    edge_types: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=np.int8))

    def reversed(self) -> TracedLine:
        return TracedLine(
            self.level,
            self.strip,
            self.lattice[::-1].copy(),
            self.polyline[::-1].copy(),
            self.multiplicity_certificate,
            self.offset,
            self.edge_types[::-1].copy(),
        )


# ---------------------------------------------------------------------------


def lattice_points_in_box(
    linear: np.ndarray, offset: Sequence[float], box: tuple[float, float, float, float]
) -> np.ndarray:
    """All ``m`` in Z^2 with ``linear @ m + offset`` in the closed box."""
    return _lattice_points(linear, offset, 0, box[0], box[1], 1, box[2], box[3])


def _lattice_points(
    linear: np.ndarray,
    offset: Sequence[float],
    t_axis: int,
    t_lo: float,
    t_hi: float,
    p_axis: int,
    p_lo: float,
    p_hi: float,
) -> np.ndarray:
    """Lattice points whose image lies in ``[t_lo, t_hi]`` x ``[p_lo, p_hi]`` (per axis)."""
    ox, oy = offset
    off = np.array([ox, oy], dtype=float)
    lo = np.zeros(2)
    hi = np.zeros(2)
    lo[t_axis], hi[t_axis] = t_lo - off[t_axis], t_hi - off[t_axis]
    lo[p_axis], hi[p_axis] = p_lo - off[p_axis], p_hi - off[p_axis]
    inv = np.linalg.inv(linear)
    corners = np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]]) @ inv.T
    row = linear[t_axis]
    # iterate over the index with the smaller transverse coefficient, solve for the other
    it, so = (0, 1) if abs(row[0]) <= abs(row[1]) else (1, 0)
    it_vals = np.arange(math.floor(corners[:, it].min()) - 1, math.ceil(corners[:, it].max()) + 2)
    b_it, b_so = row[it], row[so]
    a1 = (lo[t_axis] - b_it * it_vals) / b_so
    a2 = (hi[t_axis] - b_it * it_vals) / b_so
    s_lo = np.ceil(np.minimum(a1, a2) - 1e-12).astype(np.int64)
    s_hi = np.floor(np.maximum(a1, a2) + 1e-12).astype(np.int64)
    counts = np.maximum(s_hi - s_lo + 1, 0)
    if counts.sum() == 0:
        return np.zeros((0, 2), dtype=np.int64)
    rep_it = np.repeat(it_vals, counts)
    starts = np.repeat(s_lo, counts)
    within = np.arange(counts.sum()) - np.repeat(np.cumsum(counts) - counts, counts)
    rep_so = starts + within
    m = np.empty((rep_it.size, 2), dtype=np.int64)
    m[:, it] = rep_it
    m[:, so] = rep_so
    img = m @ linear.T
    keep = (
        (img[:, t_axis] >= lo[t_axis])
        & (img[:, t_axis] <= hi[t_axis])
        & (img[:, p_axis] >= lo[p_axis])
        & (img[:, p_axis] <= hi[p_axis])
    )
    return m[keep]


def projection_multiplicity(coords: np.ndarray) -> int:
    """Maximum number of points of a polyline sharing one projected coordinate.

    ``coords`` is the 1-D sequence of projected vertex coordinates; no segment
    may be degenerate (constant projection).
    """
    c = np.asarray(coords, dtype=float)
    if c.size == 1:
        return 1
    lo = np.minimum(c[:-1], c[1:])
    hi = np.maximum(c[:-1], c[1:])
    if np.any(hi <= lo):
        raise ValueError("segment with constant projection")
    lo_s = np.sort(lo)
    hi_s = np.sort(hi)
    verts = np.sort(c)
    uniq = np.unique(c)
    mids = (uniq[:-1] + uniq[1:]) / 2.0
    # open-interval coverage: #(lo < x) - #(hi <= x)
    open_mid = np.searchsorted(lo_s, mids, "left") - np.searchsorted(hi_s, mids, "right")
    open_v = np.searchsorted(lo_s, uniq, "left") - np.searchsorted(hi_s, uniq, "right")
    at_v = np.searchsorted(verts, uniq, "right") - np.searchsorted(verts, uniq, "left")
    best = int(open_mid.max()) if mids.size else 0
    return max(best, int((open_v + at_v).max()))


# ---------------------------------------------------------------------------


def _axis_count(start: float, delta: float) -> int:
    """Integers in the closed interval between ``start`` and ``start + delta``."""
    a, b = sorted((start, start + delta))
    return math.floor(b + 1e-12) - math.ceil(a - 1e-12) + 1


def _event_offsets(delta: float) -> list[float]:
    """Offsets in [0, 1) where the closed-interval integer count can change, plus midpoints."""
    events = sorted({0.0, (-delta) % 1.0})
    pts = list(events)
    ext = events + [1.0]
    pts += [(ext[k] + ext[k + 1]) / 2.0 for k in range(len(events))]
    return pts


def _lattice_point_on_segment(u0: float, v0: float, du: float, dv: float) -> int:
    """Number of integer points on the segment from (u0, v0) along (du, dv)."""
    if du == 0 or dv == 0:
        raise ValueError("axis segment parallel to a lattice direction")
    hits = 0
    a, b = sorted((u0, u0 + du))
    for u in range(math.ceil(a - 1e-12), math.floor(b + 1e-12) + 1):
        s = (u - u0) / du
        v = v0 + s * dv
        if abs(v - round(v)) < 1e-9:
            hits += 1
    return hits


def backtracking_constant(geom: ModelGeometry) -> int:
    """Max number of points an axis-parallel segment of length ``w`` shares with the level-1 edges.

    In lattice coordinates the segment meets lines ``u in Z`` and ``v in Z``;
    the two counts depend only on the fractional offsets of the start point,
    which are swept over their event points and the midpoints between them.
    Shared lattice vertices are counted once.
    """
    best = 0
    for e in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        du, dv = geom.w * (geom.B_inv @ e)
        for u0 in _event_offsets(du):
            cu = _axis_count(u0, du)
            for v0 in _event_offsets(dv):
                cv = _axis_count(v0, dv)
                best = max(best, cu + cv - _lattice_point_on_segment(u0, v0, du, dv))
    return best


# ---------------------------------------------------------------------------


def _edge_weights(geom: ModelGeometry) -> tuple[float, float]:
    vert = geom.vertical_face_areas
    if not all(math.isfinite(v) for v in vert):
        vert = tuple(
            geom.metric.lateral_area(float(g[0]), float(g[1]), 0.0, 1.0)
            for g in (geom.gamma1, geom.gamma2)
        )
    return float(vert[0]), float(vert[1])


def _shortest_band_path(
    lattice: np.ndarray, proj: np.ndarray, weights: tuple[float, float], band_lo: float, band_hi: float
) -> np.ndarray:
    n = lattice.shape[0]
    base = lattice.min(axis=0)
    span = int(lattice[:, 1].max() - base[1]) + 2
    keys = (lattice[:, 0] - base[0]) * span + (lattice[:, 1] - base[1])
    order = np.argsort(keys, kind="stable")
    sorted_keys = keys[order]
    rows, cols, vals = [], [], []
    for step, wt in zip(((1, 0), (0, 1)), weights):
        nk = keys + step[0] * span + step[1]
        pos = np.searchsorted(sorted_keys, nk)
        pos_c = np.minimum(pos, n - 1)
        ok = sorted_keys[pos_c] == nk
        rows.append(np.nonzero(ok)[0])
        cols.append(order[pos_c[ok]])
        vals.append(np.full(int(ok.sum()), wt))
    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    graph = coo_matrix((v, (r, c)), shape=(n, n)).tocsr()
    sources = np.nonzero(proj <= band_lo)[0]
    targets = np.nonzero(proj >= band_hi)[0]
    if sources.size == 0 or targets.size == 0:
        raise TraceFailed("empty end band")
    dist, pred, _ = dijkstra(
        graph, directed=False, indices=sources, min_only=True, return_predecessors=True
    )
    td = dist[targets]
    if not np.isfinite(td).any():
        raise TraceFailed("strip graph does not connect the window ends")
    node = int(targets[int(np.argmin(td))])
    path = [node]
    while pred[node] >= 0:
        node = int(pred[node])
        path.append(node)
    return np.array(path[::-1], dtype=np.int64)


def trace_strip_line(
    geom: ModelGeometry,
    strip: Strip,
    level: int,
    window: tuple[float, float],
    *,
    offset: tuple[float, float] = (0.0, 0.0),
    k: int | None = None,
    margin_w: float = 10.0,
    retries: int = 4,
) -> TracedLine:
    """Trace an embedded line of the level-``level`` arrangement inside ``strip``.

    The line is traced at level 1 in the preimage strip (width ``w``), as a
    least-vertical-area path between the two ends of the clipping window
    ``window`` (projection range at this level, padded by ``margin_w * w`` in
    level-1 units), then mapped forward.  The returned vertex order has
    increasing projection coordinate at the ends.
    """
    p_ax, t_ax = _AX[strip.axis], _AX[strip.transverse]
    scale = np.array([geom.lam ** (level - 1), geom.mu ** (level - 1)])
    off = np.asarray(offset, dtype=float)
    t_lo = (strip.lo - off[t_ax]) / scale[t_ax]
    t_hi = (strip.hi - off[t_ax]) / scale[t_ax]
    if t_hi - t_lo < geom.w - 1e-9 * max(1.0, abs(t_lo), abs(t_hi)):
        raise TraceFailed(
            f"preimage strip width {t_hi - t_lo:.6g} is below the cell diameter {geom.w:.6g}"
        )
    p_lo = (window[0] - off[p_ax]) / scale[p_ax]
    p_hi = (window[1] - off[p_ax]) / scale[p_ax]
    weights = _edge_weights(geom)
    margin = margin_w * geom.w
    for attempt in range(retries + 1):
        lo, hi = p_lo - margin, p_hi + margin
        lat = _lattice_points(geom.B, (0.0, 0.0), t_ax, t_lo, t_hi, p_ax, lo, hi)
        if lat.shape[0] == 0:
            raise TraceFailed("no lattice points in strip window")
        pts = lat @ geom.B.T
        try:
            idx = _shortest_band_path(lat, pts[:, p_ax], weights, lo + geom.w, hi - geom.w)
            break
        except TraceFailed:
            if attempt == retries:
                raise
            margin *= 2.0
    path = lat[idx]
    level1 = pts[idx]
    cert = projection_multiplicity(level1[:, p_ax])
    if k is not None and cert > k:
        raise CertificateExceeded(f"projection multiplicity {cert} > k = {k}")
    steps = np.diff(path, axis=0)
    edge_types = np.where(steps[:, 0] != 0, 0, 1).astype(np.int8)
    polyline = level1 * scale + off
    return TracedLine(level, strip, path, polyline, cert, (float(off[0]), float(off[1])), edge_types)
