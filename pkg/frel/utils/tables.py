"""CSV and JSON writers with byte-stable float formatting."""

from __future__ import annotations

import csv
import io
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np
from pydantic import BaseModel

from frel.models.reports import SweepRow

SWEEP_COLUMNS = ("beta", "lambda", "Lambda", "c", "mu", "M", "s")
DUAL_COLUMNS = ("angle", "fstar", "fstarstar", "f")


def format_float(value: float | None) -> str:
    if value is None:
        return ""
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def _csv_text(header: Sequence[str], rows: Iterable[Sequence[Any]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow(row)
    return buffer.getvalue()


def sweep_csv(rows: Sequence[SweepRow]) -> str:
    """One line per beta. An `error` column is appended only when some row failed."""
    with_errors = any(not row.ok for row in rows)
    header = list(SWEEP_COLUMNS) + (["error"] if with_errors else [])

    def cells(row: SweepRow) -> list[str]:
        values = [row.beta, row.lower, row.upper, row.c, row.mu, row.big_m, row.s]
        out = [format_float(v) for v in values]
        if with_errors:
            out.append(row.error or "")
        return out

    return _csv_text(header, (cells(row) for row in rows))


def dual_table_csv(columns: np.ndarray) -> str:
    """`columns` is (k, 4): angle, F*, F**, F."""
    data = np.asarray(columns, dtype=float)
    if data.ndim != 2 or data.shape[1] != len(DUAL_COLUMNS):
        raise ValueError(f"Dual table needs {len(DUAL_COLUMNS)} columns, got shape {data.shape}")
    return _csv_text(DUAL_COLUMNS, ([format_float(v) for v in row] for row in data.tolist()))


def _plain_cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return format_float(value)
    if isinstance(value, list | tuple | dict):
        return json.dumps(value, sort_keys=True)
    return str(value)


def models_csv(models: Sequence[BaseModel]) -> str:
    """Flat CSV of homogeneous reports; the header comes from the first one's JSON keys."""
    if not models:
        return ""
    dumps = [model.model_dump(mode="json", by_alias=True) for model in models]
    header = list(dumps[0])
    return _csv_text(header, ([_plain_cell(dump.get(key)) for key in header] for dump in dumps))


def report_json(report: BaseModel | Sequence[BaseModel]) -> str:
    if isinstance(report, BaseModel):
        payload: Any = report.model_dump(mode="json", by_alias=True)
    else:
        payload = [item.model_dump(mode="json", by_alias=True) for item in report]
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_text(path: str | Path, text: str) -> Path:
    target = Path(path)
    if target.parent != Path("."):
        target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w", encoding="utf-8", newline="") as handle:
        handle.write(text)
    return target
