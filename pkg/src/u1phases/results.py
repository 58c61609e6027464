"""Result tables: JSON-lines on disk, one record per line, optional flat CSV."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Any, Sequence

from . import __version__


@dataclass(frozen=True)
class ResultTable:
    columns: tuple[str, ...]
    rows: tuple[tuple[Any, ...], ...]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "columns", tuple(self.columns))
        object.__setattr__(self, "rows", tuple(tuple(r) for r in self.rows))
        for i, r in enumerate(self.rows):
            if len(r) != len(self.columns):
                raise ValueError(f"row {i} has {len(r)} values for {len(self.columns)} columns")

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [r[j] for r in self.rows]

    def as_dicts(self) -> list[dict]:
        return [dict(zip(self.columns, r)) for r in self.rows]

    def to_jsonl(self) -> str:
        head = {"record": "table", "columns": list(self.columns), "metadata": self.metadata}
        lines = [json.dumps(head, sort_keys=True, allow_nan=False)]
        for i, r in enumerate(self.rows):
            rec = {"record": "row", "index": i, "values": dict(zip(self.columns, r))}
            lines.append(json.dumps(rec, sort_keys=True, allow_nan=False))
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "ResultTable":
        columns = metadata = None
        rows: dict[int, tuple] = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip():
                continue
            rec = json.loads(line)
            if rec.get("record") == "table":
                columns, metadata = tuple(rec["columns"]), rec["metadata"]
            elif rec.get("record") == "row":
                if columns is None:
                    raise ValueError(f"line {lineno}: row before table header")
                rows[rec["index"]] = tuple(rec["values"][c] for c in columns)
            else:
                raise ValueError(f"line {lineno}: unknown record {rec.get('record')!r}")
        if columns is None:
            raise ValueError("no table header record found")
        return cls(columns, tuple(rows[i] for i in sorted(rows)), metadata)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for r in self.rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in r])
        return buf.getvalue()


def make_table(columns: Sequence[str], rows, config_echo: dict, seed: int | None) -> ResultTable:
    meta = {"config": config_echo, "toolkit": "u1phases", "version": __version__, "seed": seed}
    clean = []
    for r in rows:
        for v in r:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError(f"non-finite value in result row {r}")
        clean.append(tuple(r))
    return ResultTable(tuple(columns), tuple(clean), meta)
