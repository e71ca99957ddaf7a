from __future__ import annotations

import csv
import io
import json

import pytest

from isospec.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_help(capsys):
    code, out, _ = run(capsys, "--help")
    assert code == 0 and "synthesize" in out


def test_synthesize_json(capsys):
    code, out, _ = run(capsys, "synthesize", "--alpha", "1.5", "--eps", "0.05", "--format", "json")
    data = json.loads(out)
    assert code == 0 and (data["t"], data["d"]) == (5, 2)


def test_synthesize_bad_target(capsys):
    code, _, err = run(capsys, "synthesize", "--alpha", "2.5")
    assert code == 1 and "BadTarget" in err


def test_analyze(capsys):
    code, out, _ = run(capsys, "analyze", "--matrix", "4,2;1,1")
    data = json.loads(out)
    assert code == 0
    assert data["alpha"] == pytest.approx(1.45672, abs=1e-5)
    assert data["k"] == 3


@pytest.mark.parametrize("matrix", ["4,2;1", "a,b;c,d", "1,0;0,1"])
def test_analyze_bad_matrix(capsys, matrix):
    code, _, _ = run(capsys, "analyze", "--matrix", matrix)
    assert code == 1


def test_unknown_command(capsys):
    assert run(capsys, "frobnicate")[0] == 1


def test_regions_with_svg(capsys, tmp_path):
    svg = tmp_path / "r.svg"
    code, out, _ = run(capsys, "regions", "--matrix", "4,2;1,1", "--n", "2", "--svg", str(svg))
    assert code == 0
    assert json.loads(out)["n"] == 2
    assert svg.read_text().startswith("<?xml")


def test_certify_csv_rows(capsys):
    code, out, _ = run(capsys, "certify", "--matrix", "4,2;1,1", "--n-min", "3", "--n-max", "6", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert code == 0 and [int(r["n"]) for r in rows] == [3, 4, 5, 6]


def test_certify_failure_exit_code(capsys):
    code, _, err = run(capsys, "certify", "--matrix", "4,2;1,1", "--n-min", "1", "--n-max", "3", "--tolerance", "1e-9")
    assert code == 2 and "verdict failed" in err


def test_certify_deterministic(capsys, tmp_path):
    outs = []
    for name in ("a.json", "b.json"):
        path = tmp_path / name
        assert run(capsys, "certify", "--matrix", "4,2;1,1", "--n-min", "1", "--n-max", "4", "--seed", "5", "-o", str(path))[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]


def test_spectrum(capsys, tmp_path):
    svg = tmp_path / "s.svg"
    code, out, _ = run(capsys, "spectrum", "--t-max", "60", "--density", "0.5", "--svg", str(svg))
    data = json.loads(out)
    assert code == 0 and data["density"]["dense"]
    assert len(data["points"]) == sum(t - 3 for t in range(5, 61))
    assert "<circle" in svg.read_text()


def test_threads_env(capsys, monkeypatch):
    monkeypatch.setenv("ISOSPEC_THREADS", "2")
    code, out, _ = run(capsys, "regions", "--matrix", "4,2;1,1", "--n", "2", "--format", "csv")
    assert code == 0 and len(out.strip().splitlines()) == 5
