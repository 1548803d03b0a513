"""CSV tables with a JSON sidecar describing the columns and the run config."""

from __future__ import annotations

import csv
import json
import math
from collections.abc import Iterable, Mapping, Sequence
from pathlib import Path
from typing import Any, NamedTuple

from . import __version__

__all__ = ["Column", "write_csv", "sidecar_path", "format_value"]


class Column(NamedTuple):
    name: str
    description: str


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return repr(value)
    return str(value)


def sidecar_path(path: Path) -> Path:
    return path.with_name(path.name + ".json")


def write_csv(
    path: Path | str,
    columns: Sequence[Column],
    rows: Iterable[Sequence[Any]],
    *,
    config: Mapping[str, Any] | None = None,
) -> Path:
    """Write ``rows`` under a header of column names, plus ``<path>.json``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow([c.name for c in columns])
        for row in rows:
            if len(row) != len(columns):
                raise ValueError(f"row has {len(row)} values for {len(columns)} columns")
            writer.writerow([format_value(v) for v in row])

    meta = {
        "tool": "wavestab",
        "version": __version__,
        "columns": {c.name: c.description for c in columns},
        "config": dict(config or {}),
    }
    sidecar_path(path).write_text(json.dumps(meta, indent=2, sort_keys=True, default=str) + "\n")
    return path
