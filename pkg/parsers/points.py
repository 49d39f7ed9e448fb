from __future__ import annotations

import csv
import io
import json
import re
from pathlib import Path
from typing import Any, List, Optional, Sequence

from scalar_geometry import GammaPoint

_COMPLEX_RE = re.compile(r"^[+-]?[0-9.eE+\-ij]+$")


class InputFormatError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}"
        super().__init__(message)
        self.line = line
        self.column = column


def parse_complex(token: str) -> complex:
    """Parse ``"1.5"``, ``"-2i"``, ``"0.3+0.4j"`` and similar tokens."""

    text = token.strip().replace(" ", "").replace("i", "j")
    if not text or not _COMPLEX_RE.match(text):
        raise InputFormatError(f"not a complex number: {token!r}")
    # a bare unit ("i", "1-i") needs an explicit coefficient for complex()
    text = re.sub(r"(^|[+-])j", r"\g<1>1j", text)
    try:
        return complex(text)
    except ValueError:
        raise InputFormatError(f"not a complex number: {token!r}") from None


def _point(coords: Sequence[complex], n: Optional[int], line: Optional[int] = None) -> GammaPoint:
    if n is not None and len(coords) != n:
        raise InputFormatError(f"expected {n} coordinates, got {len(coords)}", line)
    if len(coords) < 2:
        raise InputFormatError("a point needs at least two coordinates", line)
    try:
        return GammaPoint.from_coordinates(coords)
    except ValueError as exc:
        raise InputFormatError(str(exc), line) from None


def parse_point(text: str, n: Optional[int] = None) -> GammaPoint:
    """Comma separated coordinates ``s_1, ..., s_{n-1}, p``."""

    coords = [parse_complex(tok) for tok in text.split(",")]
    return _point(coords, n)


def parse_z(text: str) -> List[complex]:
    return [parse_complex(tok) for tok in text.split(",")]


def parse_points_csv(text: str) -> List[GammaPoint]:
    """Rows of ``n, s1_re, s1_im, ..., p_re, p_im`` under a header line."""

    reader = csv.reader(io.StringIO(text))
    rows = [(lineno, row) for lineno, row in enumerate(reader, start=1) if any(c.strip() for c in row)]
    if not rows:
        return []
    header_line, header = rows[0]
    if [h.strip() for h in header[:1]] != ["n"]:
        raise InputFormatError("CSV header must start with 'n'", header_line, 1)
    points = []
    for lineno, row in rows[1:]:
        try:
            n = int(row[0])
        except ValueError:
            raise InputFormatError(f"n must be an integer, got {row[0]!r}", lineno, 1) from None
        needed = 1 + 2 * n
        if len(row) < needed:
            raise InputFormatError(f"expected {needed} columns for n = {n}, got {len(row)}", lineno)
        coords = []
        for k in range(n):
            col = 2 + 2 * k
            try:
                re_part = float(row[col - 1])
                im_part = float(row[col])
            except ValueError:
                raise InputFormatError("coordinate is not a number", lineno, col) from None
            coords.append(complex(re_part, im_part))
        points.append(_point(coords, n, lineno))
    return points


def _json_coordinate(value: Any) -> complex:
    if isinstance(value, (int, float)):
        return complex(value)
    if isinstance(value, str):
        return parse_complex(value)
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return complex(float(value[0]), float(value[1]))
    if isinstance(value, dict) and "re" in value:
        return complex(float(value["re"]), float(value.get("im", 0.0)))
    raise InputFormatError(f"cannot read a complex number from {value!r}")


def _json_point(item: Any, index: int) -> GammaPoint:
    try:
        if isinstance(item, dict):
            coords = [_json_coordinate(v) for v in item["s"]] + [_json_coordinate(item["p"])]
            return _point(coords, item.get("n"))
        return _point([_json_coordinate(v) for v in item], None)
    except (InputFormatError, KeyError, TypeError, ValueError) as exc:
        raise InputFormatError(f"point {index}: {exc}") from None


def parse_points_json(text: str) -> List[GammaPoint]:
    """A JSON array of points, each a coordinate list or ``{"s": [...], "p": ...}``."""

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(exc.msg, exc.lineno, exc.colno) from None
    if isinstance(data, dict) and "points" in data:
        data = data["points"]
    if not isinstance(data, list):
        raise InputFormatError("expected a JSON array of points")
    return [_json_point(item, k) for k, item in enumerate(data)]


def load_points(path: Path) -> List[GammaPoint]:
    path = Path(path)
    text = path.read_text()
    if path.suffix.lower() == ".csv":
        return parse_points_csv(text)
    return parse_points_json(text)


def load_json(path: Path) -> Any:
    """Read a JSON document, reporting syntax errors with line and column."""

    text = Path(path).read_text()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputFormatError(exc.msg, exc.lineno, exc.colno) from None
