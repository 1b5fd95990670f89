from fractions import Fraction
from itertools import product

import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from pcvaug.errors import NonNumericCell, SchemaMismatch, UnknownLevel
from pcvaug.mixed import ColumnSpec, DatasetSchema, decode, encode, infer_schema

from conftest import data_path


def test_heart_has_17_predictors(heart):
    _, schema, enc = heart
    assert enc.X.shape == (292, 17)
    assert schema.n_encoded == 17


def test_heart_class_counts(heart):
    _, _, enc = heart
    labels, counts = np.unique(enc.classes, return_counts=True)
    assert dict(zip(labels, counts)) == {"healthy": 159, "sick": 133}


def test_heart_marginals(heart):
    table, _, _ = heart
    assert table["sex"].value_counts().to_dict() == {"male": 200, "female": 92}
    assert table["chest_pain"].value_counts().to_dict() == {
        "asympt": 138, "notang": 82, "abnang": 49, "angina": 23}


def test_binary_column_one_dummy():
    schema = DatasetSchema((ColumnSpec("sex", "categorical", ("male", "female")),))
    enc = encode(pd.DataFrame({"sex": ["male", "female", "female"]}), schema)
    assert enc.X.tolist() == [[0.0], [1.0], [1.0]]
    assert enc.names == ["sex=female"]


def test_chest_pain_three_dummies(heart):
    _, _, enc = heart
    assert [n for n in enc.names if n.startswith("chest_pain")] == [
        "chest_pain=angina", "chest_pain=asympt", "chest_pain=notang"]


def test_unknown_level():
    schema = DatasetSchema((ColumnSpec("c", "categorical", ("a", "b")),))
    with pytest.raises(UnknownLevel):
        encode(pd.DataFrame({"c": ["a", "z"]}), schema)


def test_non_numeric_cell():
    schema = DatasetSchema((ColumnSpec("x"),))
    with pytest.raises(NonNumericCell) as info:
        encode(pd.DataFrame({"x": ["1.5", "two"]}), schema)
    assert info.value.row == 1


def test_schema_validation():
    with pytest.raises(SchemaMismatch):
        ColumnSpec("c", "categorical", ("a", "a"))
    with pytest.raises(SchemaMismatch):
        DatasetSchema((ColumnSpec("y", role="response"), ColumnSpec("z", role="response")))
    with pytest.raises(SchemaMismatch):
        DatasetSchema.from_dict({"columns": [{"name": "a", "colour": "red"}]})


def test_schema_file_round_trip(tmp_path):
    schema = DatasetSchema.load(data_path("heart.schema.json"))
    schema.save(tmp_path / "s.json")
    assert DatasetSchema.load(tmp_path / "s.json") == schema


def test_inferred_schema_sorts_levels():
    table = pd.DataFrame({"x": ["1", "2.5"], "c": ["pear", "apple"]})
    schema = infer_schema(table)
    assert schema["x"].kind == "numeric"
    assert schema["c"].levels == ("apple", "pear")


def test_numeric_round_trip():
    rng = np.random.default_rng(40)
    table = pd.DataFrame(rng.normal(size=(6, 3)), columns=["a", "b", "c"])
    enc = encode(table, infer_schema(table))
    back = decode(enc.X, enc.colmap)
    pd.testing.assert_frame_equal(back, table)


GROUP = DatasetSchema((ColumnSpec("g", "categorical", ("l1", "l2", "l3", "l4")),))


def _rounded(row):
    colmap = encode(pd.DataFrame({"g": ["l1"]}), GROUP).colmap
    return decode(np.array([row]), colmap, mode="rounded")["g"][0]


def test_rounded_argmax():
    assert _rounded([0.9, 0.1, 0.05]) == "l2"
    assert _rounded([0.2, 0.7, 0.6]) == "l3"


def test_rounded_all_small_is_reference():
    # the third dummy is the largest, but no dummy reaches 0.5
    assert _rounded([0.1, 0.2, 0.3]) == "l1"


def test_rounded_against_nearest_code_on_lattice():
    # brute force in exact rationals: the level whose 0/1 code is nearest
    codes = {"l1": (0, 0, 0), "l2": (1, 0, 0), "l3": (0, 1, 0), "l4": (0, 0, 1)}
    grid = [Fraction(i, 20) for i in range(21)]
    rows, expected = [], []
    for row in product(grid, repeat=3):
        dist = {lv: sum((r - c) ** 2 for r, c in zip(row, code)) for lv, code in codes.items()}
        best = min(dist.values())
        winners = [lv for lv, d in dist.items() if d == best]
        if len(winners) > 1:
            continue  # ties are resolved by convention, not by distance
        rows.append([float(r) for r in row])
        expected.append(winners[0])
    colmap = encode(pd.DataFrame({"g": ["l1"]}), GROUP).colmap
    got = decode(np.array(rows), colmap, mode="rounded")["g"].tolist()
    assert got == expected
    assert len(rows) > 8000


@st.composite
def schemas(draw):
    n = draw(st.integers(1, 8))
    cols = []
    for i in range(n):
        if draw(st.booleans()):
            cols.append(ColumnSpec(f"n{i}"))
        else:
            L = draw(st.integers(1, 6))
            cols.append(ColumnSpec(f"c{i}", "categorical", tuple(f"v{j}" for j in range(L))))
    return DatasetSchema(tuple(cols))


@given(schemas(), st.integers(1, 10), st.integers(0, 1000))
def test_encoded_width_property(schema, nrows, seed):
    rng = np.random.default_rng(seed)
    table = {}
    for col in schema.columns:
        if col.kind == "numeric":
            table[col.name] = rng.normal(size=nrows)
        else:
            table[col.name] = rng.choice(list(col.levels), size=nrows)
    enc = encode(pd.DataFrame(table), schema)
    expected = sum(1 if c.kind == "numeric" else len(c.levels) - 1 for c in schema.columns)
    assert enc.X.shape == (nrows, expected)
    for col in schema.columns:
        if col.kind == "categorical" and len(col.levels) > 1:
            block = enc.X[:, [j for j, c in enumerate(enc.colmap) if c.source == col.name]]
            assert np.all(block.sum(axis=1) <= 1)
