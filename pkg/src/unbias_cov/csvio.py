"""CSV reading and writing with round-trip exact numbers.

Input tables have rows ``index,value[,weight]`` with indices contiguous from
0, an optional header row and optional ``# key=value`` metadata comments
(only ``dt`` is interpreted).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ParseError(ValueError):
    pass


@dataclass(frozen=True)
class InputTable:
    values: np.ndarray
    weights: np.ndarray
    dt: float | None = None


def fmt(x) -> str:
    """Shortest decimal string that parses back to the same double."""
    x = float(x)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _parse_float(text: str, where: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ParseError(f"{where}: not a number: {text!r}") from None
    if not math.isfinite(v):
        raise ParseError(f"{where}: non-finite value {text!r}")
    return v


def read_table(path) -> InputTable:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"{path}: {exc.strerror}") from None
    return parse_table(text, str(path))


def parse_table(text: str, name: str = "<input>") -> InputTable:
    dt = None
    values, weights = [], []
    header_seen = False
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        where = f"{name}:{lineno}"
        if not row or not "".join(row).strip():
            continue
        first = row[0].strip()
        if first.startswith("#"):
            meta = ",".join(row).lstrip("#").strip()
            key, sep, val = meta.partition("=")
            if sep and key.strip() == "dt":
                dt = _parse_float(val.strip(), where)
                if dt <= 0:
                    raise ParseError(f"{where}: dt must be positive")
            continue
        cells = [c.strip() for c in row]
        if not values and not header_seen and cells[0].lower() == "index":
            header_seen = True
            continue
        if len(cells) not in (2, 3):
            raise ParseError(f"{where}: expected index,value[,weight], got {len(cells)} fields")
        try:
            idx = int(cells[0])
        except ValueError:
            raise ParseError(f"{where}: bad index {cells[0]!r}") from None
        if idx != len(values):
            raise ParseError(f"{where}: index {idx} breaks the contiguous sequence, expected {len(values)}")
        values.append(_parse_float(cells[1], where))
        w = _parse_float(cells[2], where) if len(cells) == 3 and cells[2] else 1.0
        if w < 0:
            raise ParseError(f"{where}: negative weight {w}")
        weights.append(w)
    if not values:
        raise ParseError(f"{name}: no data rows")
    return InputTable(np.array(values), np.array(weights), dt)


def write_table(path, values, weights, dt: float | None = None) -> None:
    rows = [(i, v, w) for i, (v, w) in enumerate(zip(values, weights))]
    lines = [] if dt is None else [f"# dt={fmt(dt)}"]
    lines.append("index,value,weight")
    lines += [f"{i},{fmt(v)},{fmt(w)}" for i, v, w in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def write_columns(dest, columns: dict[str, np.ndarray], int_columns=("lag_index", "index")) -> str:
    """Write equal-length columns as CSV to ``dest`` (path or None) and return the text."""
    names = list(columns)
    n = len(next(iter(columns.values()))) if columns else 0
    lines = [",".join(names)]
    for r in range(n):
        cells = []
        for name in names:
            v = columns[name][r]
            cells.append(str(int(v)) if name in int_columns else fmt(v))
        lines.append(",".join(cells))
    text = "\n".join(lines) + "\n"
    if dest is not None:
        Path(dest).write_text(text)
    return text


def read_columns(path) -> dict[str, np.ndarray]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [[float(c) for c in row] for row in reader if row]
    data = np.array(rows) if rows else np.zeros((0, len(header)))
    return {name: data[:, i] for i, name in enumerate(header)}
