"""CSV ingestion and deterministic report emission.

Datasets arrive as headered CSV with purely numeric cells (plus an optional
ISO-8601 date column); any malformed cell is rejected with its 1-based file
row and column, never producing a partial dataset.  Reports are written as
JSON with sorted keys and no timestamps, so identical runs produce
byte-identical files.
"""

import csv
import json
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np

from .errors import MissingColumn, ParseError
from .evaluation import TimeIndexedDataset
from .knockoffs import GroupSpec

__all__ = [
    "DataMatrix",
    "load_dataset",
    "load_group_map",
    "write_json_report",
    "write_csv_table",
    "to_jsonable",
]


@dataclass
class DataMatrix:
    """A plain numeric design with named columns and an optional response."""

    X: np.ndarray
    column_names: List[str]
    y: Optional[np.ndarray] = None
    response_name: Optional[str] = None


def _read_rows(path) -> List[List[str]]:
    with open(path, newline="") as fh:
        return [row for row in csv.reader(fh) if row and any(c.strip() for c in row)]


def _parse_cell(text: str, row: int, col: int) -> float:
    try:
        return float(text)
    except ValueError:
        raise ParseError(row, col) from None


def load_dataset(
    path,
    response: Optional[str] = None,
    date_column: Optional[str] = None,
) -> Union[DataMatrix, TimeIndexedDataset]:
    """Read a headered numeric CSV into a typed dataset.

    ``response`` names the y column; ``date_column`` (ISO-8601 dates) turns
    the result into a time-indexed dataset, stably sorted by date.  Errors
    carry the 1-based file row and column of the first offending cell.
    """
    rows = _read_rows(path)
    if not rows:
        raise MissingColumn("file is empty: no header row")
    header = [h.strip() for h in rows[0]]
    if date_column is not None and response is None:
        raise MissingColumn("a date-indexed dataset needs a response column")
    for name in (response, date_column):
        if name is not None and name not in header:
            raise MissingColumn(name)
    if len(rows) == 1:
        raise ParseError(2, 1)  # header only, no data rows
    date_idx = header.index(date_column) if date_column is not None else None
    resp_idx = header.index(response) if response is not None else None
    feature_idx = [
        j for j in range(len(header)) if j not in (date_idx, resp_idx)
    ]
    n = len(rows) - 1
    X = np.empty((n, len(feature_idx)))
    y = np.empty(n) if resp_idx is not None else None
    dates = np.empty(n, dtype="datetime64[D]") if date_idx is not None else None
    for i, row in enumerate(rows[1:]):
        file_row = i + 2
        if len(row) != len(header):
            raise ParseError(file_row, len(row) + 1)
        for k, j in enumerate(feature_idx):
            X[i, k] = _parse_cell(row[j].strip(), file_row, j + 1)
        if resp_idx is not None:
            y[i] = _parse_cell(row[resp_idx].strip(), file_row, resp_idx + 1)
        if date_idx is not None:
            try:
                dates[i] = np.datetime64(row[date_idx].strip(), "D")
            except ValueError:
                raise ParseError(file_row, date_idx + 1) from None
    names = [header[j] for j in feature_idx]
    if date_idx is not None:
        order = np.argsort(dates, kind="stable")
        return TimeIndexedDataset(timestamps=dates[order], X=X[order], y=y[order])
    return DataMatrix(X=X, column_names=names, y=y, response_name=response)


def load_group_map(path, column_names: List[str]) -> GroupSpec:
    """Read a ``variable,group_id`` CSV covering every named column.

    Group labels are arbitrary; they are renumbered 1..G in sorted label
    order, and the original labels become the group names.
    """
    rows = _read_rows(path)
    if not rows:
        raise MissingColumn("group map is empty: no header row")
    header = [h.strip() for h in rows[0]]
    if len(header) < 2:
        raise MissingColumn("group map needs 'variable' and 'group_id' columns")
    mapping = {}
    for i, row in enumerate(rows[1:]):
        if len(row) < 2:
            raise ParseError(i + 2, len(row) + 1)
        mapping[row[0].strip()] = row[1].strip()
    missing = [c for c in column_names if c not in mapping]
    if missing:
        raise MissingColumn(missing[0])
    labels = sorted(set(mapping[c] for c in column_names))
    label_id = {lab: g + 1 for g, lab in enumerate(labels)}
    assignments = np.array([label_id[mapping[c]] for c in column_names], dtype=np.int64)
    return GroupSpec(assignments=assignments, group_count=len(labels), names=labels)


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays so json.dumps can emit them."""
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [to_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, np.datetime64):
        return str(obj)
    return obj


def write_json_report(report: dict, path) -> None:
    """Emit a report deterministically: sorted keys, stable float repr."""
    with open(path, "w") as fh:
        json.dump(to_jsonable(report), fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_csv_table(path, header: List[str], rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow(list(to_jsonable(list(row))))
