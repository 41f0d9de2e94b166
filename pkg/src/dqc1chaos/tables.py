"""Result tables and the JSON matrix interchange format."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .linalg import MAX_DIM, DimensionError, UnitaryMatrix


class ConfigError(ValueError):
    """Invalid experiment configuration or input document."""


def _cell(x):
    if isinstance(x, (bool, np.bool_)):
        return int(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    x = float(x)
    if not math.isfinite(x):
        raise ValueError(f"non-finite value {x!r} in result table")
    return x


def _fmt(x) -> str:
    # repr is the shortest string that round-trips a double
    return repr(x)


@dataclass
class ResultTable:
    """Named numeric columns, row-major, with a metadata block."""

    columns: list[str]
    rows: list[list[float]]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.columns = [str(c) for c in self.columns]
        clean = []
        for i, row in enumerate(self.rows):
            row = [_cell(x) for x in row]
            if len(row) != len(self.columns):
                raise ValueError(f"row {i} has {len(row)} cells, expected {len(self.columns)}")
            clean.append(row)
        self.rows = clean

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows], dtype=float)

    def __len__(self) -> int:
        return len(self.rows)

    def data_lines(self) -> list[str]:
        """Header and data rows as CSV lines (no metadata)."""
        return [",".join(self.columns)] + [",".join(_fmt(x) for x in r) for r in self.rows]

    def to_csv(self) -> str:
        meta = [f"# {k}: {json.dumps(v, sort_keys=True)}" for k, v in self.metadata.items()]
        return "\n".join(meta + self.data_lines()) + "\n"

    def to_json(self) -> str:
        doc = {"metadata": self.metadata, "columns": self.columns, "rows": self.rows}
        return json.dumps(doc, indent=1, sort_keys=False) + "\n"

    def dumps(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ConfigError(f"unknown output format {fmt!r}")

    def write(self, path, fmt: str) -> None:
        Path(path).write_text(self.dumps(fmt), encoding="utf-8")

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        meta, body = {}, []
        for line in text.splitlines():
            if line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                meta[key] = json.loads(value)
            elif line:
                body.append(line)
        reader = csv.reader(io.StringIO("\n".join(body)))
        header = next(reader)
        rows = [[_parse_number(x) for x in r] for r in reader]
        return cls(header, rows, meta)

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        doc = json.loads(text)
        return cls(doc["columns"], doc["rows"], doc.get("metadata", {}))


def _parse_number(s: str):
    try:
        return int(s)
    except ValueError:
        return float(s)


def matrix_to_json(u: UnitaryMatrix) -> str:
    a = u.data
    entries = [[float(z.real), float(z.imag)] for z in a.ravel()]
    return json.dumps({"dim": u.dim, "entries": entries})


def save_matrix(u: UnitaryMatrix, path) -> None:
    Path(path).write_text(matrix_to_json(u), encoding="utf-8")


def matrix_from_json(text: str) -> UnitaryMatrix:
    """Parse ``{"dim": N, "entries": [[re, im], ...]}`` (row-major)."""
    try:
        doc = json.loads(text)
        dim = doc["dim"]
        entries = np.asarray(doc["entries"], dtype=np.float64)
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed matrix document: {exc}") from exc
    if not isinstance(dim, int) or dim < 1:
        raise ConfigError(f"dim must be a positive integer, got {dim!r}")
    if dim > MAX_DIM:
        raise DimensionError(f"dimension {dim} exceeds cap {MAX_DIM}")
    if entries.shape != (dim * dim, 2):
        raise ConfigError(f"expected {dim * dim} [re, im] pairs, got array of shape {entries.shape}")
    a = (entries[:, 0] + 1j * entries[:, 1]).reshape(dim, dim)
    return UnitaryMatrix(a)


def load_matrix(path) -> UnitaryMatrix:
    return matrix_from_json(Path(path).read_text(encoding="utf-8"))
