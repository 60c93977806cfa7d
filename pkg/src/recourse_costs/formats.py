"""Stable on-disk formats for surveys, strength/cost vectors, and reports.

Every format exists as CSV (the primary, diff-able interchange) and as a JSON
mirror: a list of row objects keyed by the CSV column names. Floats are
serialized with ``repr``, so reading back a written file reproduces every
value exactly. Malformed input is rejected with the offending 1-based line
number (CSV) or record index (JSON).

Feature sets inside recourse CSV cells are ``;``-separated, which is why
feature identifiers may contain neither ``,`` nor ``;``.

Writes are atomic: content goes to a temp file in the target directory which
is then renamed over the destination.
"""

from __future__ import annotations

import csv
import io
import json
import os
import tempfile
from pathlib import Path
from typing import Iterable, Sequence

from .core import (
    ComparisonDataset,
    CostVector,
    FeatureCatalog,
    PairwiseComparison,
    Recourse,
    RecourseComparison,
    StrengthVector,
)
from .simulation import ExperimentRow

__all__ = [
    "FileFormatError",
    "PAIRWISE_FIELDS",
    "RECOURSE_FIELDS",
    "VALUES_FIELDS",
    "EXPERIMENT_FIELDS",
    "write_pairwise",
    "read_pairwise",
    "write_recourse",
    "read_recourse",
    "write_strengths",
    "write_costs",
    "read_strengths",
    "read_costs",
    "write_experiment",
    "read_experiment",
]

PAIRWISE_FIELDS = ("winner", "loser", "weight")
RECOURSE_FIELDS = ("winner_set", "loser_set")
VALUES_FIELDS = ("feature", "value")
EXPERIMENT_FIELDS = (
    "trial",
    "num_features",
    "recourse_size",
    "total_comparisons",
    "comparisons_per_feature",
    "mse",
    "runtime_ms",
    "converged",
)


class FileFormatError(ValueError):
    """Input file does not match its declared schema."""

    def __init__(self, path: Path | str, line: int | str, message: str) -> None:
        super().__init__(f"{path}:{line}: {message}")


def _atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        os.unlink(tmp)
        raise


def _csv_text(fields: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(fields)
    writer.writerows(rows)
    return buf.getvalue()


def _json_text(fields: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    payload = [dict(zip(fields, row)) for row in rows]
    return json.dumps(payload, indent=2) + "\n"


def _read_rows(path: Path | str, fields: Sequence[str], fmt: str) -> list[tuple[int, list[str]]]:
    """Parse a CSV or JSON mirror into (location, cells) pairs, schema-checked.

    Cell values come back as strings in field order; JSON numerics are
    round-tripped through ``repr`` so both formats parse identically.
    """
    path = Path(path)
    if fmt == "csv":
        with open(path, "r", encoding="utf-8", newline="") as handle:
            reader = csv.reader(handle)
            try:
                header = next(reader)
            except StopIteration:
                raise FileFormatError(path, 1, f"missing header {','.join(fields)}") from None
            if header != list(fields):
                raise FileFormatError(
                    path, 1, f"expected header {','.join(fields)!r}, got {','.join(header)!r}"
                )
            rows = []
            for line, cells in enumerate(reader, start=2):
                if not cells:
                    continue
                if len(cells) != len(fields):
                    raise FileFormatError(
                        path, line, f"expected {len(fields)} columns, got {len(cells)}"
                    )
                rows.append((line, cells))
            return rows
    if fmt == "json":
        with open(path, "r", encoding="utf-8") as handle:
            try:
                payload = json.load(handle)
            except json.JSONDecodeError as exc:
                raise FileFormatError(path, exc.lineno, f"invalid JSON: {exc.msg}") from None
        if not isinstance(payload, list):
            raise FileFormatError(path, 1, "expected a top-level JSON list of row objects")
        rows = []
        for index, entry in enumerate(payload):
            if not isinstance(entry, dict) or set(entry) != set(fields):
                raise FileFormatError(
                    path, index, f"expected object with keys {list(fields)}, got {entry!r}"
                )
            cells = []
            for name in fields:
                value = entry[name]
                if isinstance(value, bool):
                    cells.append("true" if value else "false")
                elif isinstance(value, (int, float)):
                    cells.append(repr(value))
                else:
                    cells.append(str(value))
            rows.append((index, cells))
        return rows
    raise ValueError(f"unknown format {fmt!r}, expected 'csv' or 'json'")


def _parse_float(path: Path | str, line: int | str, name: str, text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise FileFormatError(path, line, f"{name} must be a number, got {text!r}") from None


def _parse_int(path: Path | str, line: int | str, name: str, text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise FileFormatError(path, line, f"{name} must be an integer, got {text!r}") from None


def _parse_bool(path: Path | str, line: int | str, name: str, text: str) -> bool:
    if text == "true":
        return True
    if text == "false":
        return False
    raise FileFormatError(path, line, f"{name} must be 'true' or 'false', got {text!r}")


def _catalog_from_names(path: Path | str, names: Iterable[str]) -> FeatureCatalog:
    """Catalog in first-appearance order; fails like the catalog constructor."""
    ordered: dict[str, None] = {}
    for name in names:
        ordered.setdefault(name, None)
    try:
        return FeatureCatalog(ordered)
    except ValueError as exc:
        raise FileFormatError(path, "-", str(exc)) from None


def write_pairwise(path: Path | str, records: Iterable[PairwiseComparison], fmt: str = "csv") -> None:
    if fmt == "csv":
        text = _csv_text(
            PAIRWISE_FIELDS, ((r.winner, r.loser, repr(r.weight)) for r in records)
        )
    elif fmt == "json":
        text = _json_text(PAIRWISE_FIELDS, ((r.winner, r.loser, r.weight) for r in records))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _atomic_write(Path(path), text)


def read_pairwise_records(path: Path | str, fmt: str = "csv") -> list[PairwiseComparison]:
    """Read the raw records of a pairwise survey (possibly none)."""
    rows = _read_rows(path, PAIRWISE_FIELDS, fmt)
    records = []
    for line, (winner, loser, weight_text) in rows:
        weight = _parse_float(path, line, "weight", weight_text)
        try:
            records.append(PairwiseComparison(winner, loser, weight))
        except ValueError as exc:
            raise FileFormatError(path, line, str(exc)) from None
    return records


def read_pairwise(path: Path | str, fmt: str = "csv") -> ComparisonDataset:
    """Read a pairwise survey; the catalog is the features in appearance order."""
    records = read_pairwise_records(path, fmt)
    names = [name for record in records for name in (record.winner, record.loser)]
    catalog = _catalog_from_names(path, names)
    return ComparisonDataset(catalog, records)


def write_recourse(
    path: Path | str,
    records: Iterable[RecourseComparison],
    catalog: FeatureCatalog,
    fmt: str = "csv",
) -> None:
    """Write a recourse survey; set cells are ``;``-joined in catalog order."""
    cells = (
        (";".join(r.winner.ordered(catalog)), ";".join(r.loser.ordered(catalog)))
        for r in records
    )
    if fmt == "csv":
        text = _csv_text(RECOURSE_FIELDS, cells)
    elif fmt == "json":
        text = _json_text(RECOURSE_FIELDS, cells)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _atomic_write(Path(path), text)


def _parse_recourse_rows(
    path: Path | str, fmt: str
) -> tuple[list[RecourseComparison], list[str]]:
    rows = _read_rows(path, RECOURSE_FIELDS, fmt)
    records = []
    names: list[str] = []
    for line, (winner_cell, loser_cell) in rows:
        sides = []
        for cell_name, cell in (("winner_set", winner_cell), ("loser_set", loser_cell)):
            parts = cell.split(";")
            if any(not p for p in parts):
                raise FileFormatError(path, line, f"{cell_name} has an empty feature id: {cell!r}")
            if len(set(parts)) != len(parts):
                raise FileFormatError(path, line, f"{cell_name} repeats a feature: {cell!r}")
            sides.append(parts)
        try:
            records.append(RecourseComparison(Recourse(sides[0]), Recourse(sides[1])))
        except ValueError as exc:
            raise FileFormatError(path, line, str(exc)) from None
        names.extend(sides[0])
        names.extend(sides[1])
    return records, names


def read_recourse_records(path: Path | str, fmt: str = "csv") -> list[RecourseComparison]:
    """Read the raw records of a recourse survey (possibly none)."""
    return _parse_recourse_rows(path, fmt)[0]


def read_recourse(path: Path | str, fmt: str = "csv") -> tuple[list[RecourseComparison], FeatureCatalog]:
    """Read a recourse survey plus its appearance-order catalog."""
    records, names = _parse_recourse_rows(path, fmt)
    catalog = _catalog_from_names(path, names)
    return records, catalog


def write_value_rows(
    path: Path | str, pairs: Iterable[tuple[str, float]], fmt: str = "csv"
) -> None:
    """Write raw (feature, value) rows; also covers the empty-survey case."""
    pairs = list(pairs)
    if fmt == "csv":
        text = _csv_text(VALUES_FIELDS, ((f, repr(float(v))) for f, v in pairs))
    elif fmt == "json":
        text = _json_text(VALUES_FIELDS, ((f, float(v)) for f, v in pairs))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _atomic_write(Path(path), text)


def write_strengths(path: Path | str, strengths: StrengthVector, fmt: str = "csv") -> None:
    write_value_rows(path, zip(strengths.catalog, strengths.values), fmt)


def write_costs(path: Path | str, costs: CostVector, fmt: str = "csv") -> None:
    write_value_rows(path, zip(costs.catalog, costs.values), fmt)


def _read_values(path: Path | str, fmt: str) -> tuple[FeatureCatalog, list[float]]:
    rows = _read_rows(path, VALUES_FIELDS, fmt)
    names = []
    values = []
    for line, (feature, value_text) in rows:
        names.append(feature)
        values.append(_parse_float(path, line, "value", value_text))
    catalog = _catalog_from_names(path, names)
    if catalog.size != len(names):
        raise FileFormatError(path, "-", "duplicate feature rows")
    return catalog, values


def read_strengths(path: Path | str, fmt: str = "csv") -> StrengthVector:
    catalog, values = _read_values(path, fmt)
    return StrengthVector(catalog, values)


def read_costs(path: Path | str, fmt: str = "csv") -> CostVector:
    catalog, values = _read_values(path, fmt)
    return CostVector(catalog, values)


def write_experiment(path: Path | str, rows: Iterable[ExperimentRow], fmt: str = "csv") -> None:
    def cells(row: ExperimentRow, as_json: bool):
        base = (
            row.trial,
            row.num_features,
            row.recourse_size,
            row.total_comparisons,
            row.comparisons_per_feature,
            row.mse,
            row.runtime_ms,
            row.converged,
        )
        if as_json:
            return base
        return tuple(
            "true" if v is True else "false" if v is False else repr(v) for v in base
        )

    if fmt == "csv":
        text = _csv_text(EXPERIMENT_FIELDS, (cells(r, as_json=False) for r in rows))
    elif fmt == "json":
        text = _json_text(EXPERIMENT_FIELDS, (cells(r, as_json=True) for r in rows))
    else:
        raise ValueError(f"unknown format {fmt!r}")
    _atomic_write(Path(path), text)


def read_experiment(path: Path | str, fmt: str = "csv") -> tuple[ExperimentRow, ...]:
    rows = _read_rows(path, EXPERIMENT_FIELDS, fmt)
    out = []
    for line, cells in rows:
        (trial, nfeat, rsize, total, per_feat, mse, runtime, converged) = cells
        out.append(
            ExperimentRow(
                trial=_parse_int(path, line, "trial", trial),
                num_features=_parse_int(path, line, "num_features", nfeat),
                recourse_size=_parse_int(path, line, "recourse_size", rsize),
                total_comparisons=_parse_int(path, line, "total_comparisons", total),
                comparisons_per_feature=_parse_float(
                    path, line, "comparisons_per_feature", per_feat
                ),
                mse=_parse_float(path, line, "mse", mse),
                runtime_ms=_parse_float(path, line, "runtime_ms", runtime),
                converged=_parse_bool(path, line, "converged", converged),
            )
        )
    return tuple(out)
