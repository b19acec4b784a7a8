"""Point-set file formats and report serialization.

CSV: one point per row, plain decimal columns, optional trailing label
column ``honest``/``byz``. JSON: {"points": [[...]], "labels": [...]}.
Floats are written with 17 significant digits so a write/read round trip is
exact for doubles.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .errors import ParseError
from .pointset import BYZANTINE, HONEST, PointSet

SCHEMA = "mebagg-report/1"


def format_float(x: float) -> str:
    return format(float(x), ".17g")


def format_vector(v) -> list[str]:
    return [format_float(x) for x in np.asarray(v, dtype=float).reshape(-1)]


def points_to_csv(ps: PointSet) -> str:
    lines = []
    for i in range(ps.n):
        cells = format_vector(ps.points[i])
        if ps.labels is not None:
            cells.append(ps.labels[i])
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def points_from_csv(text: str) -> PointSet:
    rows: list[list[float]] = []
    labels: list[str] = []
    saw_label = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        label = None
        if cells and cells[-1] in (HONEST, BYZANTINE):
            label = cells.pop()
        values = []
        for col, cell in enumerate(cells, start=1):
            try:
                values.append(float(cell))
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", line=lineno, column=col)
        if not values:
            raise ParseError("row has no coordinates", line=lineno)
        if rows and len(values) != len(rows[0]):
            raise ParseError(
                f"row has {len(values)} coordinates, expected {len(rows[0])}",
                line=lineno,
            )
        if rows and saw_label != (label is not None):
            raise ParseError("labels must be present on every row or none", line=lineno)
        saw_label = label is not None
        rows.append(values)
        labels.append(label or HONEST)
    if not rows:
        raise ParseError("no points found in input")
    return PointSet(np.array(rows), tuple(labels) if saw_label else None)


def points_to_json(ps: PointSet) -> str:
    payload: dict = {"points": [[float(x) for x in row] for row in ps.points]}
    if ps.labels is not None:
        payload["labels"] = list(ps.labels)
    return json.dumps(payload, indent=2) + "\n"


def points_from_json(text: str) -> PointSet:
    try:
        payload = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno, column=exc.colno)
    if not isinstance(payload, dict) or "points" not in payload:
        raise ParseError('JSON input must be an object with a "points" array')
    labels = payload.get("labels")
    return PointSet(np.asarray(payload["points"], dtype=float),
                    tuple(labels) if labels else None)


def load_points(path: str | Path) -> PointSet:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".json":
        return points_from_json(text)
    return points_from_csv(text)


def save_points(ps: PointSet, path: str | Path) -> None:
    path = Path(path)
    if path.suffix.lower() == ".json":
        path.write_text(points_to_json(ps))
    else:
        path.write_text(points_to_csv(ps))


def report_json(report: dict) -> str:
    """Serialize a report dict deterministically (insertion order kept)."""
    return json.dumps(report, indent=2, default=_coerce) + "\n"


def _coerce(obj):
    if isinstance(obj, np.ndarray):
        return [float(x) for x in obj.reshape(-1)]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj)!r}")


def _type_ok(value, spec: str) -> bool:
    for alt in spec.split("|"):
        if alt == "null" and value is None:
            return True
        if alt == "any":
            return True
        if alt == "str" and isinstance(value, str):
            return True
        if alt == "bool" and isinstance(value, bool):
            return True
        if alt == "int" and isinstance(value, int) and not isinstance(value, bool):
            return True
        if alt == "number" and isinstance(value, (int, float)) and not isinstance(value, bool):
            return True
        if alt == "dict" and isinstance(value, dict):
            return True
        if alt.startswith("list") and isinstance(value, list):
            inner = alt[5:-1] if alt != "list" else "any"
            if all(_type_ok(v, inner) for v in value):
                return True
    return False


def validate_report(report: dict) -> list[str]:
    """Check a report against the shipped schema; returns problems found."""
    schema = json.loads(
        (Path(__file__).parent / "report_schema.json").read_text()
    )
    problems: list[str] = []
    command = report.get("command")
    spec = schema["commands"].get(command)
    if spec is None:
        return [f"unknown command {command!r}"]
    if report.get("schema") != schema["schema"]:
        problems.append(f"schema tag {report.get('schema')!r}")
    for key in spec["required"]:
        if key not in report:
            problems.append(f"missing field {key!r}")
    for key, tspec in spec["types"].items():
        if key in report and not _type_ok(report[key], tspec):
            problems.append(f"field {key!r} has wrong type")
    for cert in report.get("certificates", []):
        for key in schema["certificate"]["required"]:
            if key not in cert:
                problems.append(f"certificate missing {key!r}")
    return problems
