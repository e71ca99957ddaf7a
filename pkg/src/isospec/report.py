"""Serialization (JSON, CSV) and SVG rendering of datasets and regions."""

from __future__ import annotations

import csv
import dataclasses
import io
import json
from fractions import Fraction
from typing import Any, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .errors import EmptyDataset
from .regions import Ball, Stack

__all__ = [
    "jsonable",
    "dumps",
    "rows_to_csv",
    "region_dict",
    "spectrum_svg",
    "region_svg",
]


def jsonable(obj: Any) -> Any:
    """Plain JSON types; fractions become ``"p/q"`` strings, tuples become lists."""
    if isinstance(obj, Fraction):
        return f"{obj.numerator}/{obj.denominator}"
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj)}
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    return obj


def dumps(obj: Any) -> str:
    """Deterministic JSON: sorted keys, shortest round-trip floats, trailing newline."""
    return json.dumps(jsonable(obj), sort_keys=True, indent=2, allow_nan=True) + "\n"


def rows_to_csv(rows: Sequence[dict[str, Any]], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for r in rows:
        writer.writerow([repr(v) if isinstance(v, float) else v for v in (r.get(c, "") for c in columns)])
    return buf.getvalue()


def _stack_dict(stack: Stack, with_polygons: bool) -> dict[str, Any]:
    b = stack.boundary
    levels = []
    for sl in stack.slabs:
        entry: dict[str, Any] = {
            "i": sl.i,
            "area": sl.area,
            "vertical": sl.vertical,
            "vertices": int(sl.polygon.shape[0]),
            "certificates": [ln.multiplicity_certificate for ln in sl.quad],
        }
        if with_polygons:
            entry["polygon"] = sl.polygon
        levels.append(entry)
    return {
        "n": stack.n,
        "offset": list(stack.offset),
        "kappa": stack.kappa,
        "rvol": stack.rvol,
        "boundary": b,
        "containment": stack.containment,
        "levels": levels,
    }


def region_dict(ball: Ball, *, with_polygons: bool = False) -> dict[str, Any]:
    return {
        "n": ball.n,
        "y_n": ball.y_n,
        "x_n": list(ball.x_n),
        "rarea": ball.rarea,
        "rarea_upper_parts": ball.rarea_upper_parts,
        "fold_area": ball.fold_area,
        "bottom_symdiff": ball.bottom_symdiff,
        "stacks": [_stack_dict(s, with_polygons) for s in (ball.stack0, ball.stack1)],
    }


# ---------------------------------------------------------------------------

_HEADER = '<?xml version="1.0" encoding="UTF-8"?>\n'


def _svg_open(width: float, height: float) -> str:
    return (
        _HEADER
        + f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:g}" '
        f'height="{height:g}" viewBox="0 0 {width:g} {height:g}">\n'
    )


def spectrum_svg(dataset: dict[str, Any]) -> str:
    """Number lines, one per dimension, with the sub-Euclidean range and sample markers."""
    dims = [row for row in dataset.get("dimensions", []) if row["points"] or row.get("endpoint")]
    if not dims:
        raise EmptyDataset("spectrum dataset has no dimensions")
    width, left, right, row_h = 640.0, 70.0, 30.0, 60.0
    lo, hi = 1.0, 2.0
    scale = (width - left - right) / (hi - lo)

    def x(v: float) -> float:
        return left + (float(v) - lo) * scale

    out = [_svg_open(width, row_h * (len(dims) + 1))]
    out.append('<g font-family="sans-serif" font-size="11">\n')
    for r, row in enumerate(dims):
        y = row_h * (r + 1)
        end = row["endpoint"]
        out.append(f'<text x="8" y="{y + 4:g}">k = {row["k"]}</text>\n')
        out.append(f'<line x1="{x(lo):.2f}" y1="{y:g}" x2="{x(hi):.2f}" y2="{y:g}" stroke="#999"/>\n')
        out.append(
            f'<line x1="{x(lo):.2f}" y1="{y:g}" x2="{x(end):.2f}" y2="{y:g}" stroke="#c33" stroke-width="3"/>\n'
        )
        for tick, label in ((lo, "1"), (end, row["endpoint_label"])):
            out.append(f'<line x1="{x(tick):.2f}" y1="{y - 5:g}" x2="{x(tick):.2f}" y2="{y + 5:g}" stroke="#000"/>\n')
            out.append(f'<text x="{x(tick):.2f}" y="{y + 18:g}" text-anchor="middle">{escape(label)}</text>\n')
        for p in row["points"]:
            out.append(f'<circle cx="{x(p.exponent):.3f}" cy="{y:g}" r="2.5" fill="#036"/>\n')
    out.append("</g>\n</svg>\n")
    return "".join(out)


def region_svg(region: Ball | Stack, *, max_vertices: int = 20_000) -> str:
    """Cross sections ``D_1..D_n`` of a stack (stack 0 for a ball) over the base rectangle.

    Polygons with more than ``max_vertices`` vertices are thinned for display only.
    """
    stack = region.stack0 if isinstance(region, Ball) else region
    if not stack.slabs:
        raise EmptyDataset("region has no slabs")
    polys = [sl.polygon for sl in stack.slabs]
    allpts = np.concatenate(polys)
    xmin, ymin = allpts.min(axis=0)
    xmax, ymax = allpts.max(axis=0)
    width, height, pad = 800.0, 500.0, 10.0
    sx = (width - 2 * pad) / (xmax - xmin)
    sy = (height - 2 * pad) / (ymax - ymin)

    def path(p: np.ndarray) -> str:
        step = max(1, p.shape[0] // max_vertices)
        q = p[::step]
        px = pad + (q[:, 0] - xmin) * sx
        py = height - pad - (q[:, 1] - ymin) * sy
        return " ".join(f"{a:.2f},{b:.2f}" for a, b in zip(px, py))

    out = [_svg_open(width, height)]
    n = len(polys)
    for j, p in enumerate(polys):
        shade = int(60 + 150 * j / max(1, n - 1))
        out.append(
            f'<polygon points="{path(p)}" fill="none" stroke="rgb({shade},40,{255 - shade})" '
            f'stroke-width="1"><title>D_{j + 1}</title></polygon>\n'
        )
    lam_n = stack.slabs[0].W_in[1] + stack.slabs[0].W_in[0]  # W_in is symmetric about the rectangle
    top = stack.slabs[0].W_in[3] + stack.slabs[0].W_in[2]
    rect = np.array([[0.0, 0.0], [lam_n, 0.0], [lam_n, top], [0.0, top]])
    out.append(f'<polygon points="{path(rect)}" fill="#ccc" fill-opacity="0.4" stroke="#000"><title>R_n</title></polygon>\n')
    out.append("</svg>\n")
    return "".join(out)
