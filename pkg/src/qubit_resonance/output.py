"""Deterministic CSV / JSON emitters.

Every float is written in scientific notation with 12 significant digits, so
identical inputs give byte-identical files.  Non-finite floats are written as
the strings ``inf``, ``-inf`` and ``nan`` in both formats.
"""

from __future__ import annotations

import io
import json
import math
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

from . import __version__

ARTIFACT = "qubit_resonance"


def format_value(x: Any) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return f"{x + 0.0:.11e}"  # + 0.0 folds -0.0 into 0.0
    return str(x)


def _json_value(x: Any):
    if isinstance(x, (bool, int, str)) or x is None:
        return x
    x = float(x)
    if not math.isfinite(x):
        return format_value(x)
    # round-trip through the fixed format so JSON and CSV agree digit for digit
    return float(format_value(x))


@dataclass
class Table:
    columns: List[str]
    rows: List[Sequence[Any]]
    provenance: str
    meta: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        for row in self.rows:
            if len(row) != len(self.columns):
                raise ValueError(f"row has {len(row)} values for {len(self.columns)} columns")

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(f"# {ARTIFACT} {__version__}\n")
        buf.write(f"# provenance: {self.provenance}\n")
        for key, value in self.meta.items():
            buf.write(f"# {key}: {format_value(value)}\n")
        buf.write(",".join(self.columns) + "\n")
        for row in self.rows:
            buf.write(",".join(format_value(v) for v in row) + "\n")
        return buf.getvalue()

    def to_json(self) -> str:
        doc = {
            "artifact": ARTIFACT,
            "version": __version__,
            "provenance": self.provenance,
            "meta": {k: _json_value(v) for k, v in self.meta.items()},
            "columns": list(self.columns),
            "records": [{c: _json_value(v) for c, v in zip(self.columns, row)} for row in self.rows],
        }
        return json.dumps(doc, indent=2) + "\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}")


def write_table(table: Table, fmt: str, path: Optional[str]) -> None:
    text = table.render(fmt)
    if path is None:
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
