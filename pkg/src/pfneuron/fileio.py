"""Deterministic CSV/JSON writers.

Floats are rendered with repr() of the native Python float (shortest
round-trip form), after casting from any numpy scalar, so identical inputs
always produce byte-identical files. JSON keys are sorted and non-finite
floats are serialized as strings ("inf", "-inf", "nan") to stay within
strict JSON.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path
from typing import Any, Iterable, Sequence


def fmt(x: Any) -> str:
    """Deterministic text form of one CSV cell."""
    if isinstance(x, bool):
        return str(int(x))
    if isinstance(x, (int,)):
        return str(x)
    if x is None:
        return "nan"
    return repr(float(x))


def write_csv(path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(cell) for cell in row) + "\n")


def read_csv(path) -> tuple[list[str], list[list[float]]]:
    """Read a numeric CSV written by write_csv; 'nan' cells come back as nan."""
    with open(path, "r", encoding="utf-8", newline="") as f:
        reader = csv.reader(f)
        try:
            header = next(reader)
        except StopIteration:
            raise ValueError(f"{path}: empty CSV") from None
        rows = [[float(cell) for cell in row] for row in reader if row]
    return header, rows


def _jsonable(obj: Any) -> Any:
    """Recursively convert to JSON-safe values with deterministic float text."""
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, (int, str)) or obj is None:
        return obj
    x = float(obj)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def write_json(path, obj: Any) -> None:
    with open(path, "w", encoding="utf-8") as f:
        json.dump(_jsonable(obj), f, indent=2, sort_keys=True)
        f.write("\n")


def read_json(path) -> Any:
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


def read_matrix(path) -> "np.ndarray":
    """Load a whitespace- or comma-delimited numeric matrix from a text file."""
    import numpy as np

    text = Path(path).read_text(encoding="utf-8")
    delimiter = "," if "," in text else None
    mat = np.loadtxt(path, delimiter=delimiter, ndmin=2)
    return mat
