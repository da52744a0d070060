"""
Tests for report serialization and point-set files.
"""

import json
import math

import numpy as np
import pytest

from cm_lab.errors import PointSetFileError, ReportIOError
from cm_lab.functional import spectral_sum
from cm_lab.pointsets import WeightedPointSet
from cm_lab.profiles import GaussianProfile
from cm_lab.reports import (
    emit_report,
    profile_rows,
    read_point_file,
    to_csv_text,
    to_json_text,
    write_point_file,
)


def test_json_uses_17_significant_digits():
    text = to_json_text({"a": 0.1, "b": math.nan, "c": np.float64(1.5), "d": np.arange(3), "e": np.bool_(True)})
    assert '"a": 0.10000000000000001' in text
    assert json.loads(text) == {"a": 0.1, "b": None, "c": 1.5, "d": [0, 1, 2], "e": True}


def test_bound_report_schema(circle):
    report = spectral_sum(WeightedPointSet.uniform(circle, [[0.1], [0.4]]), 6, seed=2)
    record = json.loads(to_json_text(report))
    assert {"manifold", "X", "N", "S", "sum_w", "sum_w2", "ratio", "truncation", "seed"} <= set(record)
    assert record["manifold"] == "torus:1"


def test_csv_rows():
    rows = [{"family": "random", "X": 4, "S": 1.25}, {"family": "lattice", "X": 4, "S": math.inf, "extra": True}]
    lines = to_csv_text(rows).splitlines()
    assert lines[0] == "family,X,S,extra"
    assert lines[1] == "random,4,1.25,"
    assert lines[2] == "lattice,4,,true"


def test_emit_report_is_byte_identical(tmp_path):
    record = {"rows": [{"x": 1.0 / 3.0}], "seed": 7}
    first, second = tmp_path / "a.json", tmp_path / "b.json"
    emit_report(record, "json", str(first))
    emit_report(record, "json", str(second))
    assert first.read_bytes() == second.read_bytes()

    emit_report(record, "csv", str(first))
    assert first.read_text().splitlines() == ["x", "0.33333333333333331"]


def test_csv_header_lines(tmp_path):
    path = tmp_path / "rows.csv"
    record = {"rows": [{"X": 4, "S": 0.5}]}
    emit_report(record, "csv", str(path), header={"command": "sweep", "config": {"seed": 3, "kappa": None}})
    assert path.read_text().splitlines() == [
        '# command="sweep"',
        '# config={"seed": 3,"kappa": null}',
        "X,S",
        "4,0.5",
    ]


def test_emit_report_to_stdout(capsys):
    emit_report({"value": 2.0})
    assert json.loads(capsys.readouterr().out) == {"value": 2.0}


def test_emit_report_names_the_path(tmp_path):
    path = tmp_path / "missing" / "report.json"
    with pytest.raises(ReportIOError, match="missing"):
        emit_report({"value": 1.0}, "json", str(path))
    with pytest.raises(ValueError):
        emit_report({"value": 1.0}, "xml", None)


def test_point_file(tmp_path, sphere):
    path = tmp_path / "points.csv"
    write_point_file(path, sphere, [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]], [0.25, 0.75])
    manifold, points, weights = read_point_file(path, sphere, require_weights=True)
    assert manifold == sphere
    assert np.allclose(points, [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]])
    assert np.allclose(weights, [0.25, 0.75])


def test_point_file_default_weights(tmp_path, circle):
    path = tmp_path / "points.csv"
    path.write_text("# manifold=circle\n0.1\n0.2\n0.3\n0.4\n")
    manifold, points, weights = read_point_file(path, circle)
    assert points.shape == (4, 1)
    assert np.allclose(weights, 0.25)


@pytest.mark.parametrize(
    "content",
    [
        "0.1\n0.2\n",
        "# shape=circle\n0.1\n",
        "# manifold=torus:2\n0.1\n",
        "# manifold=torus:1\nabc\n",
        "# manifold=torus:1\n",
    ],
)
def test_bad_point_files(tmp_path, circle, content):
    path = tmp_path / "points.csv"
    path.write_text(content)
    with pytest.raises(PointSetFileError):
        read_point_file(path, circle)


def test_point_file_manifold_mismatch(tmp_path, circle, sphere):
    path = tmp_path / "points.csv"
    write_point_file(path, circle, [[0.1]])
    with pytest.raises(PointSetFileError):
        read_point_file(path, sphere)
    with pytest.raises(PointSetFileError):
        read_point_file(tmp_path / "absent.csv")


def test_profile_rows():
    rows = profile_rows(GaussianProfile(1), [0.0, 1.0])
    assert rows[0] == {"r": 0.0, "value": 1.0}
    assert rows[1]["value"] == pytest.approx(math.exp(-math.pi))
