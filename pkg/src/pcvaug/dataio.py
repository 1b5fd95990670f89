"""CSV input and output with schema files and JSON metadata sidecars.

Floats are written with Python's shortest round-trip repr, so reading a
written file gives back bit-identical values.
"""

import csv
import json
import math
import os

import numpy as np
import pandas as pd

from . import __version__
from .errors import ParseError, SchemaMismatch
from .mixed import DatasetSchema, infer_schema


def read_csv(path, schema_path=None):
    """Read a CSV with a header row and type its cells.

    Returns the table as a DataFrame (numeric columns float64, categorical
    columns str) together with the schema, loaded from `schema_path` or
    inferred from the cells when it is None.
    """
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not a text file ({exc})") from exc
    if not rows or not any(cell.strip() for cell in rows[0]):
        raise ParseError(f"{path}: empty file or missing header", row=0)
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    if not body:
        raise ParseError(f"{path}: no data rows", row=1)
    for i, r in enumerate(body, start=1):
        if len(r) != len(header):
            raise ParseError(f"{path}: row {i} has {len(r)} cells, header has "
                             f"{len(header)}", row=i, col=min(len(r), len(header)))
    raw = pd.DataFrame(body, columns=header, dtype=object)

    if schema_path is None:
        schema = infer_schema(raw)
    else:
        schema = DatasetSchema.load(schema_path)
        if set(schema.names) != set(header):
            raise SchemaMismatch(
                f"schema columns {sorted(set(schema.names) ^ set(header))} do not "
                f"match the header of {path}")

    table = {}
    for j, name in enumerate(header):
        col = schema[name]
        if col.kind == "numeric":
            values = np.empty(len(body))
            for i, cell in enumerate(raw[name].tolist()):
                try:
                    values[i] = float(cell)
                except ValueError:
                    raise ParseError(f"{path}: row {i + 1}, column {name!r}: "
                                     f"{cell!r} is not a number", row=i + 1, col=j) from None
                if not math.isfinite(values[i]):
                    raise ParseError(f"{path}: row {i + 1}, column {name!r} is not finite",
                                     row=i + 1, col=j)
            table[name] = values
        else:
            table[name] = raw[name].map(str.strip).to_numpy(dtype=object)
    return pd.DataFrame(table, columns=header), schema


def _cell(v):
    if isinstance(v, (float, np.floating)):
        v = float(v)
        if not math.isfinite(v):
            raise ValueError(f"cannot write non-finite value {v}")
        return repr(v)
    return str(v)


def sidecar_path(path):
    root, _ = os.path.splitext(path)
    return root + ".json"


def write_csv(table, path, meta=None, columns=None):
    """Write a DataFrame or 2-D array as CSV.

    `columns` names the columns of an array (defaults to x1, x2, ...). When
    `meta` is given it is written to a JSON sidecar next to the CSV (same
    name, .json extension), together with the package version.
    """
    if isinstance(table, pd.DataFrame):
        header = [str(c) for c in table.columns]
        cols = [table[c].tolist() for c in table.columns]
        nrows = len(table)
    else:
        arr = np.asarray(table, dtype=np.float64)
        if arr.ndim == 1:
            arr = arr[:, None]
        header = list(columns) if columns is not None else [
            f"x{j + 1}" for j in range(arr.shape[1])]
        if len(header) != arr.shape[1]:
            raise ValueError("number of column names does not match the matrix")
        cols = [arr[:, j].tolist() for j in range(arr.shape[1])]
        nrows = arr.shape[0]

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for i in range(nrows):
            writer.writerow([_cell(col[i]) for col in cols])

    if meta is not None:
        write_meta(meta, sidecar_path(path))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def write_meta(meta, path):
    data = dict(_jsonable(meta))
    data.setdefault("tool_version", __version__)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_meta(path):
    with open(path) as fh:
        return json.load(fh)
