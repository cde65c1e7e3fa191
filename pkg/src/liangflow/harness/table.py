from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from pathlib import Path

COLUMNS = (
    "experiment", "L", "param1", "param2", "b", "a", "d", "t",
    "T_signed", "T_abs", "engine", "extra_key", "extra_val",
)


@dataclass(frozen=True)
class Row:
    """One sampled point. ``param1``/``param2`` are (lambda, beta) for AAH
    runs and (B, kappa) for Ising runs."""

    experiment: str
    L: int
    param1: float
    param2: float
    b: int
    a: int
    t: float
    T_signed: float
    engine: str
    extras: tuple[tuple[str, float], ...] = ()
    T_abs: float | None = None

    @property
    def d(self) -> int:
        return abs(self.a - self.b)

    @property
    def abs_value(self) -> float:
        return abs(self.T_signed) if self.T_abs is None else self.T_abs


@dataclass
class ResultTable:
    rows: list[Row] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.rows)

    def extend(self, rows) -> None:
        self.rows.extend(rows)

    def select(self, **criteria) -> list[Row]:
        return [r for r in self.rows if all(getattr(r, k) == v for k, v in criteria.items())]


def fmt(x) -> str:
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    return format(x, ".17g")


def _record(row: Row) -> list[str]:
    keys = ";".join(k for k, _ in row.extras)
    vals = ";".join(fmt(v) for _, v in row.extras)
    return [
        row.experiment, str(row.L), fmt(row.param1), fmt(row.param2), str(row.b), str(row.a),
        str(row.d), fmt(row.t), fmt(row.T_signed), fmt(row.abs_value), row.engine, keys, vals,
    ]


def to_csv(table: ResultTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(COLUMNS)
    for row in table.rows:
        writer.writerow(_record(row))
    return buf.getvalue()


def emit_csv(table: ResultTable, path: str | Path) -> None:
    """Write ``table`` as CSV; identical tables give identical bytes."""
    Path(path).write_bytes(to_csv(table).encode("utf-8"))
