"""Reader and schema checks for the tab-separated tables written by ``lds``.

Every table starts with ``# key = value`` metadata lines (the first is
``# lds <version>``), then one header line of column names, then data rows.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

# Columns a plotting layer needs for each figure kind.  A trajectory table may
# carry either a physical time axis (Lindbladian evolution) or channel steps.
FIGURE_KINDS: dict[str, dict[str, tuple]] = {
    "trajectory": {
        "required": ("delta_e", "trace_distance"),
        "one_of": ("time", "lindblad_time"),
    },
    "mixing": {
        "required": ("n", "sigma", "t_star", "reached"),
        "one_of": (),
    },
}


class SchemaError(ValueError):
    """A table is missing its metadata header or the columns of its figure kind."""


@dataclass
class Table:
    path: Path
    version: str
    meta: dict[str, str] = field(default_factory=dict)
    columns: list[str] = field(default_factory=list)
    rows: list[list[str]] = field(default_factory=list)

    def column(self, name: str) -> list[float]:
        """Numeric values of one column; ``true``/``false`` map to 1.0/0.0."""
        if name not in self.columns:
            raise SchemaError(f"{self.path}: no column '{name}'")
        k = self.columns.index(name)
        return [_number(r[k]) for r in self.rows]


def _number(cell: str) -> float:
    if cell == "true":
        return 1.0
    if cell == "false":
        return 0.0
    try:
        return float(cell)
    except ValueError:
        return math.nan


def read_table(path: str | Path) -> Table:
    path = Path(path)
    with path.open(newline="") as fh:
        lines = fh.read().splitlines()
    if not lines or not lines[0].startswith("# lds "):
        raise SchemaError(f"{path}: missing '# lds <version>' metadata header")
    table = Table(path=path, version=lines[0][len("# lds "):].strip())
    body = []
    for line in lines[1:]:
        if line.startswith("#"):
            key, sep, value = line[1:].partition("=")
            if sep:
                table.meta[key.strip()] = value.strip()
        elif line:
            body.append(line)
    if "experiment" not in table.meta:
        raise SchemaError(f"{path}: metadata header has no 'experiment' entry")
    if not body:
        raise SchemaError(f"{path}: no column header line")
    reader = csv.reader(body, delimiter="\t")
    table.columns = next(reader)
    for lineno, row in enumerate(reader, start=2):
        if len(row) != len(table.columns):
            raise SchemaError(f"{path}: data row {lineno} has {len(row)} cells, expected {len(table.columns)}")
        table.rows.append(row)
    return table


def validate_table(table: Table, kind: str) -> Table:
    """Raise SchemaError unless ``table`` can back a figure of ``kind``."""
    if kind not in FIGURE_KINDS:
        raise SchemaError(f"unknown figure kind '{kind}' (expected one of {sorted(FIGURE_KINDS)})")
    schema = FIGURE_KINDS[kind]
    missing = [c for c in schema["required"] if c not in table.columns]
    if schema["one_of"] and not any(c in table.columns for c in schema["one_of"]):
        missing.append(" or ".join(schema["one_of"]))
    if missing:
        raise SchemaError(f"{table.path}: {kind} table is missing columns: {', '.join(missing)}")
    if not table.rows:
        raise SchemaError(f"{table.path}: table has no data rows")
    return table
