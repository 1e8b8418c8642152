"""CSV/JSON ingestion and emission.

CSV files are RFC-style quoted UTF-8 with a header row.  Floats are
written with ``repr`` so that a simulate -> fit round trip reproduces the
in-memory pipeline bit for bit.  Load errors carry row/column context
(rows are 1-based data rows, excluding the header).
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DataError

__all__ = ["DataSet", "load_csv", "write_csv", "write_json", "json_ready"]


@dataclass(frozen=True)
class DataSet:
    """A response series plus optional named covariate columns."""

    y: np.ndarray
    columns: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        y = np.asarray(self.y, dtype=float)
        if y.ndim != 1 or y.size == 0:
            raise DataError("response series must be a nonempty vector")
        object.__setattr__(self, "y", y)
        for name, col in self.columns.items():
            if len(col) != y.size:
                raise DataError(f"column {name!r} length {len(col)} != n = {y.size}")

    @property
    def n(self) -> int:
        return self.y.size


def load_csv(path, y_column: str, covariate_columns=()) -> DataSet:
    """Load a response series (and optional covariates) from a CSV file.

    Raises :class:`DataError` naming the offending row/column for missing
    files, missing columns, blank cells, and non-numeric cells.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file (header row required)") from None
        header = [h.strip() for h in header]
        wanted = [y_column, *covariate_columns]
        indices = {}
        for name in wanted:
            if name not in header:
                raise DataError(f"{path}: missing column {name!r} "
                                f"(header has {header})")
            indices[name] = header.index(name)
        values: dict[str, list[float]] = {name: [] for name in wanted}
        for row_number, row in enumerate(reader, start=1):
            for name, idx in indices.items():
                cell = row[idx].strip() if idx < len(row) else ""
                if not cell:
                    raise DataError(
                        f"{path}: missing value at row {row_number}, column {name!r}")
                try:
                    values[name].append(float(cell))
                except ValueError:
                    raise DataError(
                        f"{path}: non-numeric value {cell!r} at row {row_number}, "
                        f"column {name!r}") from None
    if not values[y_column]:
        raise DataError(f"{path}: no data rows")
    return DataSet(
        y=np.array(values[y_column]),
        columns={name: np.array(values[name]) for name in covariate_columns},
    )


def write_csv(path, header, rows) -> None:
    """Write rows of mixed str/number cells; floats via repr (lossless)."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([_cell(c) for c in row])


def _cell(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return int(value)
    return value


def json_ready(value):
    """Recursively convert to plain JSON types; non-finite floats to None."""
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    if isinstance(value, np.ndarray):
        return [json_ready(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        return value if math.isfinite(value) else None
    return value


def write_json(path, payload) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as fh:
        json.dump(json_ready(payload), fh, indent=2, sort_keys=False)
        fh.write("\n")
