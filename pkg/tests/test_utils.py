import json

import numpy as np
import pytest

from states import Classification, EnergyTerms
from utils import dumps_report, format_float, make_rng, nest_dotted, write_csv, write_report


def test_format_float():
    assert format_float(0.1) == "0.10000000000000001"
    assert format_float(2.0) == "2.0"
    assert format_float(1e-20) == "9.9999999999999995e-21"
    assert format_float(float("nan")) == "null"
    assert format_float(float("inf")) == "null"


def test_dumps_report_is_sorted_and_parseable():
    report = {"b": 1, "a": [np.float64(0.5), np.int64(3), None], "c": {"z": True, "y": Classification.MONOPOLE}}
    text = dumps_report(report)
    assert text.endswith("\n")
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert json.loads(text) == {"a": [0.5, 3, None], "b": 1, "c": {"y": "MONOPOLE", "z": True}}


def test_dumps_report_handles_models_and_arrays():
    terms = EnergyTerms(curvature_quarter=1.0, grad_sq=0.0, quartic_eighth=0.5, curvature_coupling=-0.25)
    data = json.loads(dumps_report({"terms": terms, "arr": np.arange(3), "bad": float("nan")}))
    assert data["terms"]["quartic_eighth"] == 0.5
    assert data["arr"] == [0, 1, 2]
    assert data["bad"] is None


def test_dumps_report_rejects_unknown_types():
    with pytest.raises(TypeError):
        dumps_report({"x": object()})


def test_write_report_is_deterministic(tmp_path):
    report = {"value": 1 / 3, "name": "run"}
    path = write_report(tmp_path / "nested" / "r.json", report)
    first = path.read_bytes()
    write_report(path, dict(reversed(list(report.items()))))
    assert path.read_bytes() == first


def test_write_csv(tmp_path):
    path = write_csv(tmp_path / "t.csv", ["a", "b", "c"], [(1, 0.25, (2, 0)), (True, float("nan"), "x")])
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines == ["a,b,c", "1,0.25,2 0", "true,null,x"]


def test_nest_dotted():
    nested = nest_dotted({"seed": "3", "geometry.dims": "4 4 4 4", "geometry.k.kind": "bump", "skip": None})
    assert nested == {"seed": "3", "geometry": {"dims": ["4", "4", "4", "4"], "k": {"kind": "bump"}}}


def test_nest_dotted_conflict():
    with pytest.raises(ValueError):
        nest_dotted({"geometry": "flat", "geometry.dims": "4 4 4 4"})


def test_make_rng_is_reproducible():
    assert make_rng(9).normal() == make_rng(9).normal()
