"""CSV output for simulation metrics and experiment tables.

Every file has a header row and RFC-4180 quoting.  Values are rendered with
``repr`` for floats so a rerun with the same seed produces identical bytes.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Mapping, Sequence

from pouw.simulator import Metrics

SUMMARY_FILE = "summary.csv"
SUMMARY_COLUMNS = ("name", "metric", "value")

MINER_COLUMNS = (
    "miner_id",
    "power",
    "blocks_won",
    "block_rewards",
    "proof_rewards",
    "useful_work",
    "wasted_work",
    "interrupted_work",
    "proofs_completed",
)


@dataclass
class Table:
    name: str
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def add(self, *values: Any) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"{self.name}: expected {len(self.columns)} values, got {len(values)}")
        self.rows.append(values)

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [row[i] for row in self.rows]

    def as_dicts(self) -> list[dict[str, Any]]:
        return [dict(zip(self.columns, row)) for row in self.rows]


def format_value(value: Any) -> str:
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        return str(value) if value.denominator != 1 else str(value.numerator)
    return str(value)


def write_csv(path: Path, columns: Sequence[str], rows: Sequence[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(v) for v in row])
    return path


def write_table(table: Table, out_dir: Path) -> Path:
    return write_csv(Path(out_dir) / f"{table.name}.csv", table.columns, table.rows)


def read_csv(path: Path) -> list[dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def metrics_table(metrics: Metrics, name: str = "sim") -> Table:
    table = Table(name, MINER_COLUMNS)
    for m in metrics.miners:
        table.add(*(getattr(m, column) for column in MINER_COLUMNS))
    return table


def update_summary(out_dir: Path, name: str, values: Mapping[str, Any]) -> Path:
    """Replace the rows of *name* in ``summary.csv`` and rewrite it sorted."""
    path = Path(out_dir) / SUMMARY_FILE
    kept: list[tuple[str, str, str]] = []
    if path.exists():
        kept = [
            (row["name"], row["metric"], row["value"])
            for row in read_csv(path)
            if row["name"] != name
        ]
    kept.extend((name, metric, format_value(v)) for metric, v in values.items())
    return write_csv(path, SUMMARY_COLUMNS, sorted(kept))
