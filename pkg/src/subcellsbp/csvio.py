"""Versioned CSV output shared by the CLI and the figure pipeline.

Every file starts with ``# schema subcellsbp.v1 <kind>`` followed by a
plain header row; numbers carry 17 significant digits so files round-trip
bit-exactly through text.
"""

from __future__ import annotations

from pathlib import Path
from typing import List, Sequence, Tuple

SCHEMA = "subcellsbp.v1"


def format_value(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, (int,)):
        return str(value)
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.17g}"
    return str(value)


def write_csv(path, kind: str, columns: Sequence[str], rows: Sequence[Sequence]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as f:
        f.write(f"# schema {SCHEMA} {kind}\n")
        f.write(",".join(columns) + "\n")
        for row in rows:
            f.write(",".join(format_value(v) for v in row) + "\n")
    return path


def read_csv(path) -> Tuple[str, List[str], List[List[str]]]:
    """Parse a schema-versioned CSV; returns (kind, columns, raw rows)."""
    with open(path) as f:
        header = f.readline().strip()
        parts = header.split()
        if len(parts) != 4 or parts[0] != "#" or parts[1] != "schema" or parts[2] != SCHEMA:
            raise ValueError(f"{path}: missing or foreign schema header: {header!r}")
        kind = parts[3]
        columns = f.readline().strip().split(",")
        rows = [line.strip().split(",") for line in f if line.strip()]
    return kind, columns, rows
