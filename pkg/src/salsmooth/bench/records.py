"""Measurement records and their CSV encoding."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, fields
from pathlib import Path


@dataclass
class MeasurementRecord:
    image_id: str
    mask_type: str
    policy: str
    kernel_width: float
    encoder: str
    param_raw: float | None
    param_scaled: float | None
    param_anchor: float | None
    bpp_original: float
    bpp_processed: float
    rate_reduction_pct: float
    mse_global: float
    mse_per_level: dict[float, float] = field(default_factory=dict)
    bpp_per_level: dict[float, float] = field(default_factory=dict)
    level_fractions: dict[float, float] = field(default_factory=dict)


COLUMNS = [f.name for f in fields(MeasurementRecord)]
_MAP_COLUMNS = {"mse_per_level", "bpp_per_level", "level_fractions"}
_FLOAT_COLUMNS = {
    "kernel_width", "param_raw", "param_scaled", "param_anchor", "bpp_original",
    "bpp_processed", "rate_reduction_pct", "mse_global",
}


def _fmt_float(v) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v))


def _fmt_map(m: dict) -> str:
    return json.dumps({repr(float(k)): float(v) for k, v in sorted(m.items())})


def record_to_row(rec: MeasurementRecord) -> list[str]:
    row = []
    for name in COLUMNS:
        value = getattr(rec, name)
        if name in _MAP_COLUMNS:
            row.append(_fmt_map(value))
        elif name in _FLOAT_COLUMNS:
            row.append(_fmt_float(value))
        else:
            row.append(str(value))
    return row


def row_to_record(row: dict) -> MeasurementRecord:
    kwargs = {}
    for name in COLUMNS:
        value = row[name]
        if name in _MAP_COLUMNS:
            kwargs[name] = {float(k): float(v) for k, v in json.loads(value or "{}").items()}
        elif name in _FLOAT_COLUMNS:
            kwargs[name] = float(value) if value != "" else None
        else:
            kwargs[name] = value
    return MeasurementRecord(**kwargs)


class RecordWriter:
    """Append-only CSV sink; each row is flushed as soon as it is written."""

    def __init__(self, path):
        self.path = Path(path)
        self._fh = open(self.path, "w", newline="", encoding="utf-8")
        self._writer = csv.writer(self._fh, lineterminator="\n")
        self._writer.writerow(COLUMNS)
        self._fh.flush()

    def write(self, rec: MeasurementRecord) -> None:
        self._writer.writerow(record_to_row(rec))
        self._fh.flush()

    def close(self) -> None:
        self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


def read_records(path) -> list[MeasurementRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        missing = set(COLUMNS) - set(reader.fieldnames or ())
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        return [row_to_record(row) for row in reader]
