"""Deterministic JSON/CSV reports and the point-set file format.

Floats are always written with 17 significant digits so reports round-trip bit-exactly; non-finite
floats become null (JSON) or an empty field (CSV).
"""

import csv
import dataclasses
import io
import json
import math
import sys

import numpy as np

from cm_lab.errors import PointSetFileError, ReportIOError
from cm_lab.spectra import ManifoldKind, as_points


def format_float(value):
    value = float(value)
    return format(value, ".17g") if math.isfinite(value) else None


def to_plain(value):
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_plain(value.to_record() if hasattr(value, "to_record") else dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(key): to_plain(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(item) for item in value]
    if isinstance(value, np.ndarray):
        return [to_plain(item) for item in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, ManifoldKind):
        return value.name

    return value


def _write_json(value, out, indent, level):
    pad = " " * (indent * (level + 1))
    if value is None or isinstance(value, bool):
        out.write(json.dumps(value))
    elif isinstance(value, int):
        out.write(str(value))
    elif isinstance(value, float):
        text = format_float(value)
        out.write("null" if text is None else text)
    elif isinstance(value, str):
        out.write(json.dumps(value))
    elif isinstance(value, list):
        if not value:
            out.write("[]")
            return
        out.write("[\n")
        for position, item in enumerate(value):
            out.write(pad)
            _write_json(item, out, indent, level + 1)
            out.write(",\n" if position < len(value) - 1 else "\n")
        out.write(" " * (indent * level) + "]")
    elif isinstance(value, dict):
        if not value:
            out.write("{}")
            return
        out.write("{\n")
        for position, (key, item) in enumerate(value.items()):
            out.write(pad + json.dumps(key) + ": ")
            _write_json(item, out, indent, level + 1)
            out.write(",\n" if position < len(value) - 1 else "\n")
        out.write(" " * (indent * level) + "}")
    else:
        raise TypeError(f"cannot serialize {type(value).__name__} into a report")


def to_json_text(record, indent=2):
    out = io.StringIO()
    _write_json(to_plain(record), out, indent, 0)
    out.write("\n")
    return out.getvalue()


def _csv_cell(value):
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return format_float(value) or ""
    if isinstance(value, (list, dict)):
        return to_json_text(value, indent=0).replace("\n", "")

    return str(value)


def to_csv_text(rows, columns=None):
    rows = [to_plain(row) for row in rows]
    if columns is None:
        columns = []
        for row in rows:
            columns.extend(key for key in row if key not in columns)

    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_csv_cell(row.get(column)) for column in columns])

    return out.getvalue()


def _header_line(key, value):
    return f"# {key}=" + to_json_text(value, indent=0).replace("\n", "") + "\n"


def emit_report(record, fmt="json", path=None, columns=None, header=None):
    """Write a record as JSON, or a list of rows (or a record with ``rows``) as CSV.

    In CSV mode each ``header`` entry is written first as a ``# key=<json>`` line.
    """
    if fmt == "json":
        text = to_json_text(record)
    elif fmt == "csv":
        rows = record.get("rows") if isinstance(record, dict) else record
        if rows is None:
            rows = [record]
        text = to_csv_text(rows, columns)
        if header:
            text = "".join(_header_line(key, value) for key, value in header.items()) + text
    else:
        raise ValueError(f"unknown report format {fmt!r}")

    if path is None:
        sys.stdout.write(text)
        return text

    try:
        with open(path, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    except OSError as err:
        raise ReportIOError(f"cannot write report to {path}: {err.strerror or err}") from err

    return text


# Point-set files


def read_point_file(path, manifold=None, require_weights=False):
    """Read ``# manifold=...`` followed by rows ``coord1,...,coordD[,weight]``.

    Returns (manifold, points, weights); weights default to 1/N when the column is absent.
    """
    try:
        with open(path, encoding="utf-8") as handle:
            lines = [line.strip() for line in handle if line.strip()]
    except OSError as err:
        raise PointSetFileError(f"cannot read point set {path}: {err.strerror or err}") from err

    if not lines or not lines[0].startswith("#"):
        raise PointSetFileError(f"{path}: missing '# manifold=...' header")

    key, _, value = lines[0].lstrip("#").strip().partition("=")
    if key.strip() != "manifold":
        raise PointSetFileError(f"{path}: header must be '# manifold=<torus:d|sphere2>'")
    try:
        declared = ManifoldKind.parse(value)
    except Exception as err:
        raise PointSetFileError(f"{path}: {err}") from err
    if manifold is not None and declared != manifold and {declared.name, manifold.name} != {"circle", "torus:1"}:
        raise PointSetFileError(f"{path}: file holds {declared} points, expected {manifold}")

    try:
        rows = np.array([[float(cell) for cell in line.split(",")] for line in lines[1:]], dtype=np.float64)
    except ValueError as err:
        raise PointSetFileError(f"{path}: {err}") from err

    width = declared.coord_dim
    if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] not in (width, width + 1):
        raise PointSetFileError(f"{path}: expected rows of {width} coordinates and an optional weight")
    if require_weights and rows.shape[1] != width + 1:
        raise PointSetFileError(f"{path}: a weight column is mandatory here")

    try:
        points = as_points(declared, rows[:, :width])
    except Exception as err:
        raise PointSetFileError(f"{path}: {err}") from err

    weights = rows[:, width] if rows.shape[1] == width + 1 else np.full(rows.shape[0], 1.0 / rows.shape[0])
    return declared, points, weights


def write_point_file(path, manifold, points, weights=None):
    lines = [f"# manifold={manifold.name}"]
    for index, point in enumerate(np.atleast_2d(points)):
        cells = [format_float(value) for value in point]
        if weights is not None:
            cells.append(format_float(weights[index]))
        lines.append(",".join(cells))

    try:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write("\n".join(lines) + "\n")
    except OSError as err:
        raise ReportIOError(f"cannot write point set to {path}: {err.strerror or err}") from err


def profile_rows(profile, grid):
    grid = np.asarray(grid, dtype=np.float64)
    return [{"r": r, "value": value} for r, value in zip(grid.tolist(), np.atleast_1d(profile(grid)).tolist())]
