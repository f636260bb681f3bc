"""Flat experiment records with isomorphic JSON and CSV serializations."""

from __future__ import annotations

import csv
import io
import json
import math
from enum import Enum
from dataclasses import dataclass, field
from typing import Any

import numpy as np


def _scalar(value: Any):
    if isinstance(value, Enum):
        value = value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r} cannot be serialized")
        return value
    if value is None or isinstance(value, str):
        return value
    raise TypeError(f"unsupported record value {value!r}")


def _flat(mapping: dict) -> dict:
    return {str(k): _scalar(v) for k, v in mapping.items()}


@dataclass
class ExperimentResult:
    command: str
    parameters: dict
    records: list[dict]
    tool_version: str
    seed: int
    summary: dict = field(default_factory=dict)

    def __post_init__(self):
        self.parameters = _flat(self.parameters)
        self.summary = _flat(self.summary)
        self.records = [_flat(r) for r in self.records]
        if self.records:
            keys = list(self.records[0])
            for row in self.records[1:]:
                if list(row) != keys:
                    raise ValueError("records must share an identical key set")

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "tool_version": self.tool_version,
            "seed": self.seed,
            "parameters": self.parameters,
            "summary": self.summary,
            "records": self.records,
        }

    def to_json(self) -> str:
        # float repr is the shortest string that round-trips
        return json.dumps(self.to_dict(), indent=2, allow_nan=False) + "\n"

    def csv_rows(self) -> list[dict]:
        """Records widened with the run metadata so the table stands alone."""
        head = {"command": self.command, "tool_version": self.tool_version, "seed": self.seed}
        head.update({f"param_{k}": v for k, v in self.parameters.items()})
        head.update({f"summary_{k}": v for k, v in self.summary.items()})
        return [{**head, **row} for row in (self.records or [{}])]

    def to_csv(self) -> str:
        rows = self.csv_rows()
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_cell(v) for k, v in row.items()})
        return buf.getvalue()


def _csv_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    return repr(value) if isinstance(value, float) else str(value)


def parse_csv_cell(text: str):
    """Inverse of the CSV cell encoding, for round-trip checks and readers."""
    if text == "":
        return None
    if text in ("true", "false"):
        return text == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            pass
    return text
