"""Input validation against the documented scqec CSV schemas.

The plot scripts never recompute domain results; they only project
columns, so a wrong or truncated input must fail loudly before any
figure is drawn, naming the columns that are missing.
"""

from __future__ import annotations

import csv
from pathlib import Path

# column -> parser, per artifact kind
SCHEMAS: dict[str, dict[str, type]] = {
    "stats": {
        "policy": int,
        "schedule_length": int,
        "critical_path": int,
        "utilization": float,
        "drops": int,
    },
    "window": {
        "W": float,
        "epr_high_water": int,
        "schedule_length": int,
        "stall_cycles": int,
    },
    "boundary": {
        "family": str,
        "parallelism": float,
        "p_P": float,
        "crossover_ops": float,
        "ratio": float,
    },
    "scaling": {
        "ops": float,
        "dd_spacetime": float,
        "planar_spacetime": float,
        "ratio": float,
    },
    "gantt": {
        "op": int,
        "open": int,
        "close": int,
        "links": str,
    },
}


# blank means "no crossover at this cell", not a malformed file
OPTIONAL: dict[str, set[str]] = {"boundary": {"crossover_ops", "ratio"}}


class SchemaError(ValueError):
    pass


def read_rows(path: str | Path, kind: str) -> list[dict]:
    """Read a CSV and coerce columns per the schema for ``kind``."""
    schema = SCHEMAS[kind]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        missing = [col for col in schema if col not in header]
        if missing:
            raise SchemaError(
                f"{path}: missing column(s) {', '.join(missing)} "
                f"(expected {kind} schema: {', '.join(schema)})"
            )
        rows = []
        for raw in reader:
            row = {}
            for col, parse in schema.items():
                if raw[col] == "" and col in OPTIONAL.get(kind, ()):
                    row[col] = None
                    continue
                try:
                    row[col] = parse(raw[col])
                except (TypeError, ValueError) as e:
                    raise SchemaError(
                        f"{path}: bad value {raw[col]!r} in column "
                        f"{col!r}: {e}"
                    ) from None
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows
