from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from fractions import Fraction

import numpy as np
import pytest

from isospec.errors import EmptyDataset
from isospec.report import dumps, jsonable, region_dict, region_svg, rows_to_csv, spectrum_svg
from isospec.spectrum import SpectrumPoint, spectra_figure_data

SVG = "{http://www.w3.org/2000/svg}"


def test_jsonable_types():
    out = jsonable({"f": Fraction(3, 2), "a": np.arange(3), "t": (1, 2), "g": np.float64(0.5)})
    assert out == {"f": "3/2", "a": [0, 1, 2], "t": [1, 2], "g": 0.5}


def test_dumps_sorted_and_round_trip():
    data = {"b": 0.1 + 0.2, "a": [1.0 / 3.0]}
    text = dumps(data)
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == data


def test_empty_rows_csv():
    assert rows_to_csv([], ["n", "y"]) == "n,y\n"


def test_spectrum_svg_labels():
    root = ET.fromstring(spectrum_svg(spectra_figure_data(6, 4)))
    labels = {t.text for t in root.iter(f"{SVG}text")}
    assert {"3/2", "4/3", "5/4", "6/5"} <= labels


def test_single_point_one_marker():
    data = {
        "dimensions": [
            {"k": 2, "endpoint": Fraction(2), "endpoint_label": "2/1", "points": [SpectrumPoint(2, 1.45, 5, 2, 0)]}
        ]
    }
    root = ET.fromstring(spectrum_svg(data))
    assert len(list(root.iter(f"{SVG}circle"))) == 1


def test_empty_spectrum():
    with pytest.raises(EmptyDataset):
        spectrum_svg({"dimensions": []})


def test_region_svg_layers(ball):
    root = ET.fromstring(region_svg(ball(2)))
    titles = [p.find(f"{SVG}title").text for p in root.iter(f"{SVG}polygon")]
    assert titles == ["D_1", "D_2", "R_n"]


def test_region_dict(ball):
    d = json.loads(dumps(region_dict(ball(2), with_polygons=True)))
    assert d["n"] == 2 and len(d["stacks"]) == 2
    assert len(d["stacks"][0]["levels"][0]["polygon"]) == d["stacks"][0]["levels"][0]["vertices"]
