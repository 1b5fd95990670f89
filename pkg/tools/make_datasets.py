"""Build the canonical Tecator and Heart CSV files under ``data/``.

Sources are the copies bundled in two PyPI distributions, so no access to
StatLib or UCI is needed::

    pip download --no-deps -d /tmp/wheels rdatasets orange3
    python tools/make_datasets.py /tmp/wheels

Tecator comes from ``modeldata::meats`` (rdatasets), rows in StatLib order.
The first 170 rows form the training set, the last 45 the test set.

Heart comes from Orange's ``heart_disease.tab`` (Cleveland clinic, 303 rows).
Rows with missing values (6) and with the rare "ST-T abnormal" resting ECG
level (4) are removed, as is record 45 of the source file, which leaves 292
rows whose level counts agree with the published variable overview.
"""

import argparse
import glob
import io
import json
import lzma
import os
import pickle
import sys
import zipfile

import pandas as pd

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(os.path.dirname(HERE), "data")

N_TRAIN = 170

# zero-based index (in the 303-row source) of the extra record to drop
HEART_EXTRA_DROP = 44

HEART_COLUMNS = {
    "age": "age",
    "gender": "sex",
    "chest pain": "chest_pain",
    "rest SBP": "rest_bp",
    "cholesterol": "cholesterol",
    "fasting blood sugar > 120": "sugar",
    "rest ECG": "rest_ecg",
    "max HR": "max_hr",
    "exerc ind ang": "ex_angina",
    "ST by exercise": "oldpeak",
    "slope peak exc ST": "slope",
    "major vessels colored": "vessels",
    "thal": "thal",
    "diameter narrowing": "class",
}

HEART_LEVELS = {
    "chest_pain": {"atypical ang": "abnang", "typical ang": "angina",
                   "asymptomatic": "asympt", "non-anginal": "notang"},
    "sugar": {0: "normal", 1: "high"},
    "rest_ecg": {"left vent hypertrophy": "hyper", "normal": "normal"},
    "ex_angina": {0: "false", 1: "true"},
    "slope": {"downsloping": "down", "flat": "flat", "upsloping": "up"},
    "thal": {"fixed defect": "fix", "normal": "normal",
             "reversable defect": "rev"},
    "class": {0: "healthy", 1: "sick"},
}

HEART_SCHEMA = [
    {"name": "age", "kind": "numeric"},
    {"name": "sex", "kind": "categorical", "levels": ["male", "female"]},
    {"name": "chest_pain", "kind": "categorical",
     "levels": ["abnang", "angina", "asympt", "notang"]},
    {"name": "rest_bp", "kind": "numeric"},
    {"name": "cholesterol", "kind": "numeric"},
    {"name": "sugar", "kind": "categorical", "levels": ["normal", "high"]},
    {"name": "rest_ecg", "kind": "categorical", "levels": ["hyper", "normal"]},
    {"name": "max_hr", "kind": "numeric"},
    {"name": "ex_angina", "kind": "categorical", "levels": ["false", "true"]},
    {"name": "oldpeak", "kind": "numeric"},
    {"name": "slope", "kind": "categorical", "levels": ["down", "flat", "up"]},
    {"name": "vessels", "kind": "numeric"},
    {"name": "thal", "kind": "categorical", "levels": ["fix", "normal", "rev"]},
    {"name": "class", "kind": "categorical", "role": "class",
     "levels": ["healthy", "sick"]},
]


def _find(wheels, pattern):
    hits = sorted(glob.glob(os.path.join(wheels, pattern)))
    if not hits:
        sys.exit(f"no file matching {pattern} in {wheels}")
    return hits[-1]


def make_tecator(wheels):
    with zipfile.ZipFile(_find(wheels, "rdatasets-*.whl")) as z:
        raw = z.read("rdatasets/_data/modeldata/meats.pkl.compress")
    df = pickle.loads(lzma.decompress(raw))
    absorb = [c for c in df.columns if c.startswith("x_")]
    assert len(df) == 215 and len(absorb) == 100
    out = df[absorb + ["fat"]].copy()
    out.columns = [c.replace("_", "") for c in absorb] + ["fat"]
    schema = [{"name": c, "kind": "numeric"} for c in out.columns[:-1]]
    schema.append({"name": "fat", "kind": "numeric", "role": "response"})
    return out.iloc[:N_TRAIN], out.iloc[N_TRAIN:], schema


def make_heart(wheels):
    with zipfile.ZipFile(_find(wheels, "orange3-*.whl")) as z:
        text = z.read("Orange/datasets/heart_disease.tab").decode()
    df = pd.read_csv(io.StringIO(text), sep="\t", skiprows=[1, 2])
    df = df.rename(columns=HEART_COLUMNS)
    keep = ((df["vessels"] != "?") & (df["thal"] != "?")
            & (df["rest_ecg"] != "ST-T abnormal"))
    keep.iloc[HEART_EXTRA_DROP] = False
    df = df[keep].copy()
    for col, mapping in HEART_LEVELS.items():
        df[col] = df[col].map(mapping)
    df["vessels"] = df["vessels"].astype(int)
    assert len(df) == 292 and not df.isna().any().any()
    return df


def write(df, name):
    path = os.path.join(DATA, name)
    df.to_csv(path, index=False, float_format=None, lineterminator="\n")
    print(f"wrote {path} ({len(df)} rows)")


def write_schema(columns, name):
    path = os.path.join(DATA, name)
    with open(path, "w") as fh:
        json.dump({"columns": columns}, fh, indent=1)
        fh.write("\n")
    print(f"wrote {path}")


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("wheels", help="directory holding the downloaded wheels")
    args = parser.parse_args()
    os.makedirs(DATA, exist_ok=True)

    train, test, schema = make_tecator(args.wheels)
    write(train, "tecator_train.csv")
    write(test, "tecator_test.csv")
    write_schema(schema, "tecator.schema.json")

    write(make_heart(args.wheels), "heart.csv")
    write_schema(HEART_SCHEMA, "heart.schema.json")


if __name__ == "__main__":
    main()
