"""
CSV and JSON output of CLI commands.

CSV files start with one ``#`` metadata row (tool version, schema, seed,
Monte Carlo batch size, argument vector), then one header row. Floats
carry 12 significant digits so reruns are byte-identical.
"""

import csv
import io
import json
import shlex
import sys
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np


def format_value(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return str(value)


@dataclass
class CsvReport:
    """Rows of one CLI table with its metadata."""
    schema: str
    header: Sequence[str]
    argv: Sequence[str]
    seed: Optional[int] = None
    batch_size: Optional[int] = None
    extra: Dict[str, Any] = field(default_factory=dict)
    rows: List[List[Any]] = field(default_factory=list)

    def add(self, *values: Any) -> None:
        if len(values) != len(self.header):
            raise ValueError(f"row has {len(values)} values, header has {len(self.header)}")
        self.rows.append(list(values))

    def column(self, name: str) -> List[Any]:
        index = list(self.header).index(name)
        return [row[index] for row in self.rows]

    def metadata_line(self, version: str) -> str:
        parts = [f"# faslab {version}", f"schema={self.schema}/v1"]
        if self.seed is not None:
            parts.append(f"seed={self.seed}")
        if self.batch_size is not None:
            parts.append(f"batch_size={self.batch_size}")
        for key, value in self.extra.items():
            parts.append(f"{key}={format_value(value)}")
        parts.append("args=" + " ".join(shlex.quote(a) for a in self.argv))
        return " ".join(parts)

    def render(self, version: str) -> str:
        buffer = io.StringIO()
        buffer.write(self.metadata_line(version) + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(self.header)
        for row in self.rows:
            writer.writerow([format_value(v) for v in row])
        return buffer.getvalue()


def render_json(document: Dict[str, Any]) -> str:
    return json.dumps(
        document, indent=2, sort_keys=True, allow_nan=False, default=_json_default
    ) + "\n"


def _json_default(value: Any) -> Any:
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def emit(text: str, path: Optional[str]) -> None:
    """Write to ``path``, or to stdout when no path is given."""
    if path:
        with open(path, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
