"""Command-line interface.

Usage:
    isospec synthesize --alpha 1.5 --eps 0.05
    isospec analyze --matrix "4,2;1,1"
    isospec regions --matrix "4,2;1,1" --n 3 --svg region.svg
    isospec certify --matrix "4,2;1,1" --n-min 3 --n-max 6
    isospec spectrum --t-max 12 --i-max 3 --svg spectra.svg

Exit codes: 0 success, 2 a checked inequality failed, 1 usage or input error.
"""

from __future__ import annotations

import logging
import sys
from pathlib import Path
from typing import Any, Sequence

import click

from . import __version__
from .bounds import (
    bound_constants,
    certify_exponent,
    check_embedded_upper,
    check_foldbound,
    check_region_inequalities,
    check_slab_lemmas,
)
from .errors import IsospecError, VerdictFail
from .exponents import IntMatrix2, synthesize_matrix
from .geometry import build_geometry
from .lattice_complex import backtracking_constant
from .regions import build_ball
from .report import dumps, region_dict, region_svg, rows_to_csv, spectrum_svg
from .spectrum import density_check, enumerate_exponents, spectra_figure_data

__all__ = ["cli", "main", "parse_matrix"]

log = logging.getLogger("isospec")

_FORMAT = click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json", show_default=True)
_SEED = click.option("--seed", type=int, default=0, show_default=True, help="Seed for Monte Carlo fallbacks.")
_OUT = click.option("-o", "--output", type=click.Path(dir_okay=False, path_type=Path), help="Write here instead of stdout.")
_SVG = click.option("--svg", "svg_path", type=click.Path(dir_okay=False, path_type=Path), help="Also write an SVG figure.")


def parse_matrix(text: str) -> IntMatrix2:
    """Parse ``"a,b;c,d"``."""
    try:
        rows = [[int(v) for v in row.split(",")] for row in text.strip().split(";")]
    except ValueError as exc:
        raise click.BadParameter(f"expected integers in 'a,b;c,d', got {text!r}") from exc
    if len(rows) != 2 or any(len(r) != 2 for r in rows):
        raise click.BadParameter(f"expected a 2x2 matrix 'a,b;c,d', got {text!r}")
    return IntMatrix2.from_rows(rows)


class _MatrixType(click.ParamType):
    name = "MATRIX"

    def convert(self, value: Any, param: Any, ctx: Any) -> IntMatrix2:
        if isinstance(value, IntMatrix2):
            return value
        try:
            return parse_matrix(value)
        except click.BadParameter as exc:
            self.fail(exc.message, param, ctx)


_MATRIX = click.option("--matrix", type=_MatrixType(), required=True, help='Monodromy matrix "a,b;c,d".')


def _emit(text: str, output: Path | None) -> None:
    if output is None:
        click.echo(text, nl=False)
    else:
        output.write_text(text)


def _kv_csv(data: dict[str, Any]) -> str:
    rows = [{"key": k, "value": v} for k, v in sorted(data.items())]
    return rows_to_csv(rows, ["key", "value"])


@click.group()
@click.version_option(__version__, prog_name="isospec")
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose: bool) -> None:
    """Dehn-function exponents of ascending HNN extensions of Z^2."""
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING, stream=sys.stderr)


@cli.command()
@click.option("--alpha", type=float, required=True, help="Target exponent in (1, 2).")
@click.option("--eps", type=float, default=0.01, show_default=True)
@click.option("--guarded", is_flag=True, help="Require d <= t - 4 (eigenvalue bracket chain).")
@_FORMAT
@_OUT
def synthesize(alpha: float, eps: float, guarded: bool, fmt: str, output: Path | None) -> None:
    """Find the smallest-trace companion matrix with exponent near ALPHA."""
    A, cert = synthesize_matrix(alpha, eps, guarded=guarded)
    data = {
        "t": cert.t,
        "d": cert.d,
        "matrix": str(A),
        "alpha_target": cert.alpha_target,
        "alpha_achieved": cert.alpha_achieved,
        "error": cert.error,
        "epsilon": cert.epsilon,
        "guarded": cert.guarded,
        "lambda": cert.lam,
        "chain": cert.chain,
    }
    if fmt == "json":
        _emit(dumps(data), output)
    else:
        cols = ["t", "d", "alpha_target", "alpha_achieved", "error", "epsilon", "guarded", "lambda"]
        _emit(rows_to_csv([data], cols), output)


@cli.command()
@_MATRIX
@_FORMAT
@_OUT
def analyze(matrix: IntMatrix2, fmt: str, output: Path | None) -> None:
    """Eigenvalues, exponent, model geometry and lemma constants of a matrix."""
    geom = build_geometry(matrix)
    e = geom.eigen
    k = backtracking_constant(geom)
    data = {
        "matrix": str(matrix),
        "trace": e.trace,
        "det": e.det,
        "discriminant": e.discriminant,
        "lambda": e.lam,
        "mu": e.mu,
        "lambda_exact": f"({e.lambda_exact.p}+{e.lambda_exact.q}*sqrt({e.discriminant}))/2",
        "alpha": e.alpha,
        "k": k,
        "geometry": geom.summary(),
        "constants": {
            key: v
            for key, v in vars(bound_constants(geom, k=k)).items()
            if key not in ("E_const", "K_const")
        },
    }
    if fmt == "json":
        _emit(dumps(data), output)
    else:
        flat = {k_: v for k_, v in data.items() if not isinstance(v, dict)}
        flat.update({f"constants.{k_}": v for k_, v in data["constants"].items()})
        _emit(_kv_csv(flat), output)


@cli.command()
@_MATRIX
@click.option("--n", "n", type=click.IntRange(min=1), required=True)
@click.option("--polygons", is_flag=True, help="Include level polygons in the JSON dump.")
@_SEED
@_FORMAT
@_OUT
@_SVG
def regions(
    matrix: IntMatrix2, n: int, polygons: bool, seed: int, fmt: str, output: Path | None, svg_path: Path | None
) -> None:
    """Build the ball B_N and check its inequalities."""
    geom = build_geometry(matrix)
    k = backtracking_constant(geom)
    ball = build_ball(geom, n, k=k, seed=seed)
    verdicts = (
        check_region_inequalities(geom, n, strict=False)
        + check_slab_lemmas(geom, ball.stack0, k=k, strict=False)
        + check_slab_lemmas(geom, ball.stack1, k=k, strict=False)
        + check_foldbound(geom, ball, strict=False)
        + check_embedded_upper(geom, ball, strict=False)
    )
    data = region_dict(ball, with_polygons=polygons)
    data["verdicts"] = verdicts
    if fmt == "json":
        _emit(dumps(data), output)
    else:
        rows = [
            {"stack": j, "i": sl.i, "area": sl.area, "vertical": sl.vertical, "vertices": sl.polygon.shape[0]}
            for j, s in enumerate((ball.stack0, ball.stack1))
            for sl in s.slabs
        ]
        _emit(rows_to_csv(rows, ["stack", "i", "area", "vertical", "vertices"]), output)
    if svg_path is not None:
        svg_path.write_text(region_svg(ball))
    for v in verdicts:
        if v.enforced and not v.passed:
            raise VerdictFail(v.name, v.lhs, v.rhs)


@cli.command()
@_MATRIX
@click.option("--n-min", type=click.IntRange(min=1), default=3, show_default=True)
@click.option("--n-max", type=click.IntRange(min=1), default=6, show_default=True)
@click.option("--tolerance", type=float, default=0.1, show_default=True, help="Allowed |slope - alpha|.")
@_SEED
@_FORMAT
@_OUT
@_SVG
def certify(
    matrix: IntMatrix2,
    n_min: int,
    n_max: int,
    tolerance: float,
    seed: int,
    fmt: str,
    output: Path | None,
    svg_path: Path | None,
) -> None:
    """Check every inequality for N_MIN..N_MAX and fit the exponent."""
    if n_max < n_min:
        raise click.BadParameter("--n-max must be >= --n-min")
    geom = build_geometry(matrix)
    report = certify_exponent(geom, (n_min, n_max), tolerance=tolerance, seed=seed)
    _emit(report.to_json() if fmt == "json" else report.to_csv(), output)
    if svg_path is not None:
        svg_path.write_text(region_svg(build_ball(geom, n_min, seed=seed)))
    if report.status != "pass":
        failed = [v for r in report.rows for v in r["verdicts"] if v["enforced"] and not v["passed"]]
        if failed:
            raise VerdictFail(failed[0]["name"], failed[0]["lhs"], failed[0]["rhs"])
        raise VerdictFail("slope", abs(report.slope - geom.eigen.alpha), tolerance)


@cli.command()
@click.option("--t-max", type=click.IntRange(min=5), required=True)
@click.option("--i-max", type=click.IntRange(min=0), default=0, show_default=True)
@click.option("--t-min", type=click.IntRange(min=4), default=5, show_default=True)
@click.option("--samples", type=click.IntRange(min=0), default=20, show_default=True, help="Figure points per dimension.")
@click.option("--density", "density_eps", type=float, help="Also run the density diagnostic at t = T_MAX.")
@_FORMAT
@_OUT
@_SVG
def spectrum(
    t_max: int,
    i_max: int,
    t_min: int,
    samples: int,
    density_eps: float | None,
    fmt: str,
    output: Path | None,
    svg_path: Path | None,
) -> None:
    """Enumerate achievable exponents (k, exponent, t, d, i)."""
    points = enumerate_exponents(t_max, i_max, t_min=t_min)
    if fmt == "json":
        data: dict[str, Any] = {"points": points}
        if density_eps is not None:
            data["density"] = density_check(t_max, density_eps).to_dict()
        _emit(dumps(data), output)
    else:
        rows = [vars(p) for p in points]
        _emit(rows_to_csv(rows, ["k", "exponent", "t", "d", "i"]), output)
    if svg_path is not None:
        svg_path.write_text(spectrum_svg(spectra_figure_data(i_max + 2, samples, t_max=t_max)))


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and return the exit code instead of exiting."""
    try:
        cli.main(args=list(argv) if argv is not None else None, prog_name="isospec", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.exceptions.Abort:
        click.echo("Aborted.", err=True)
        return 1
    except click.ClickException as exc:
        exc.show()
        return 1
    except VerdictFail as exc:
        click.echo(f"verdict failed: {exc}", err=True)
        return 2
    except IsospecError as exc:
        click.echo(f"error: {type(exc).__name__}: {exc}", err=True)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
