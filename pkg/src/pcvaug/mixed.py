"""Schema-driven encoding of mixed tables into numeric predictor matrices.

A categorical column with levels (l1, ..., lL) becomes L-1 indicator
columns for l2..lL, l1 being the reference level (all indicators zero).
"""

import json
import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd

from .errors import NonNumericCell, SchemaMismatch, UnknownLevel

KINDS = ("numeric", "categorical")
ROLES = ("predictor", "response", "class")


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    kind: str = "numeric"
    levels: tuple = ()
    role: str = "predictor"

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SchemaMismatch(f"column {self.name!r}: unknown kind {self.kind!r}")
        if self.role not in ROLES:
            raise SchemaMismatch(f"column {self.name!r}: unknown role {self.role!r}")
        if self.kind == "categorical":
            if not self.levels:
                raise SchemaMismatch(f"categorical column {self.name!r} has no levels")
            if len(set(self.levels)) != len(self.levels):
                raise SchemaMismatch(f"column {self.name!r} has duplicate levels")
            if any(str(lv) == "" for lv in self.levels):
                raise SchemaMismatch(f"column {self.name!r} has an empty level")
        if self.role == "response" and self.kind != "numeric":
            raise SchemaMismatch(f"response column {self.name!r} must be numeric")
        if self.role == "class" and self.kind != "categorical":
            raise SchemaMismatch(f"class column {self.name!r} must be categorical")

    @property
    def width(self):
        """Number of encoded predictor columns this column produces."""
        if self.role != "predictor":
            return 0
        return 1 if self.kind == "numeric" else len(self.levels) - 1

    def to_dict(self):
        d = {"name": self.name, "kind": self.kind}
        if self.kind == "categorical":
            d["levels"] = list(self.levels)
        if self.role != "predictor":
            d["role"] = self.role
        return d


@dataclass(frozen=True)
class DatasetSchema:
    columns: tuple

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise SchemaMismatch("duplicate column names in schema")
        targets = [c for c in self.columns if c.role != "predictor"]
        if len(targets) > 1:
            raise SchemaMismatch("schema may declare at most one response or class column")

    @property
    def names(self):
        return [c.name for c in self.columns]

    @property
    def predictors(self):
        return [c for c in self.columns if c.role == "predictor"]

    @property
    def target(self):
        for c in self.columns:
            if c.role != "predictor":
                return c
        return None

    @property
    def n_encoded(self):
        return sum(c.width for c in self.columns)

    def __getitem__(self, name):
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    @classmethod
    def from_dict(cls, data):
        cols = []
        for entry in data["columns"]:
            entry = dict(entry)
            kind = entry.get("kind", "numeric")
            role = entry.get("role", "predictor")
            # "response" and "class" are accepted as kinds for brevity
            if kind == "response":
                kind, role = "numeric", "response"
            elif kind == "class":
                kind, role = "categorical", "class"
            unknown = set(entry) - {"name", "kind", "levels", "role"}
            if unknown:
                raise SchemaMismatch(f"unknown schema keys {sorted(unknown)}")
            cols.append(ColumnSpec(name=str(entry["name"]), kind=kind,
                                   levels=tuple(str(v) for v in entry.get("levels", ())),
                                   role=role))
        return cls(columns=tuple(cols))

    def to_dict(self):
        return {"columns": [c.to_dict() for c in self.columns]}

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise SchemaMismatch(f"{path}: invalid JSON ({exc})") from exc
        if not isinstance(data, dict) or "columns" not in data:
            raise SchemaMismatch(f"{path}: expected an object with a 'columns' list")
        return cls.from_dict(data)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)
            fh.write("\n")


def _parse_float(value):
    if isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool):
        out = float(value)
    else:
        out = float(str(value).strip())
    if not math.isfinite(out):
        raise ValueError(value)
    return out


def infer_schema(table):
    """Numeric where every cell parses as a number, else categorical with sorted levels."""
    cols = []
    for name in table.columns:
        values = table[name].tolist()
        try:
            for v in values:
                _parse_float(v)
            cols.append(ColumnSpec(name=str(name)))
        except ValueError:
            levels = tuple(sorted({str(v) for v in values}))
            cols.append(ColumnSpec(name=str(name), kind="categorical", levels=levels))
    return DatasetSchema(columns=tuple(cols))


class EncodedColumn(NamedTuple):
    source: str
    level: str | None = None
    reference: str | None = None


@dataclass(frozen=True)
class EncodedTable:
    """Numeric predictors plus the response or class labels.

    colmap[j] describes encoded column j: its source column, the level it
    indicates and the reference level of its group (both None for numeric
    columns).
    """

    X: np.ndarray
    y: np.ndarray | None
    classes: np.ndarray | None
    colmap: list
    schema: DatasetSchema = field(repr=False, default=None)

    @property
    def names(self):
        return encoded_names(self.colmap)


def encoded_names(colmap):
    return [c.source if c.level is None else f"{c.source}={c.level}" for c in colmap]


def build_colmap(schema):
    colmap = []
    for col in schema.predictors:
        if col.kind == "numeric":
            colmap.append(EncodedColumn(col.name))
        else:
            colmap.extend(EncodedColumn(col.name, lv, col.levels[0])
                          for lv in col.levels[1:])
    return colmap


def _numeric_column(table, name):
    out = np.empty(len(table))
    for i, v in enumerate(table[name].tolist()):
        try:
            out[i] = _parse_float(v)
        except ValueError:
            raise NonNumericCell(name, i) from None
    return out


def _labels(table, col):
    values = np.array([str(v) for v in table[col.name].tolist()], dtype=object)
    allowed = set(col.levels)
    for v in values:
        if v not in allowed:
            raise UnknownLevel(col.name, v)
    return values


def encode(table, schema):
    """Encode a table (DataFrame) into predictors, response and class labels."""
    missing = [n for n in schema.names if n not in table.columns]
    if missing:
        raise SchemaMismatch(f"table lacks schema columns {missing}")
    blocks = []
    for col in schema.predictors:
        if col.kind == "numeric":
            blocks.append(_numeric_column(table, col.name)[:, None])
        else:
            labels = _labels(table, col)
            blocks.append(np.column_stack(
                [(labels == lv).astype(np.float64) for lv in col.levels[1:]]
            ) if len(col.levels) > 1 else np.empty((len(table), 0)))
    X = np.hstack(blocks) if blocks else np.empty((len(table), 0))
    y = classes = None
    target = schema.target
    if target is not None and target.role == "response":
        y = _numeric_column(table, target.name)
    elif target is not None:
        classes = _labels(table, target)
    return EncodedTable(X=X, y=y, classes=classes, colmap=build_colmap(schema),
                        schema=schema)


def decode(X, colmap, mode="continuous"):
    """Turn an encoded matrix back into a table.

    In continuous mode every encoded column is emitted as is, under its
    encoded name. In rounded mode each group of indicators becomes one
    categorical column holding the level of the largest indicator, or the
    reference level when every indicator is below 0.5. This is the level
    whose 0/1 code lies nearest to the row.
    """
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != len(colmap):
        raise SchemaMismatch(f"matrix has {X.shape[-1]} columns, column map has {len(colmap)}")
    if mode == "continuous":
        return pd.DataFrame(X, columns=encoded_names(colmap))
    if mode != "rounded":
        raise ValueError(f"unknown decode mode {mode!r}")

    out = {}
    j = 0
    while j < len(colmap):
        col = colmap[j]
        if col.level is None:
            out[col.source] = X[:, j]
            j += 1
            continue
        group = [j]
        while group[-1] + 1 < len(colmap) and colmap[group[-1] + 1].source == col.source:
            group.append(group[-1] + 1)
        D = X[:, group]
        levels = np.array([colmap[g].level for g in group], dtype=object)
        best = np.argmax(D, axis=1)
        hit = D[np.arange(D.shape[0]), best] >= 0.5
        out[col.source] = np.where(hit, levels[best], col.reference)
        j = group[-1] + 1
    return pd.DataFrame(out)
