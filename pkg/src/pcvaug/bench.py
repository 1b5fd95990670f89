"""Benchmark harness: train small networks on original vs augmented data.

An experiment is described by a JSON config (a dict once loaded):

    {
      "dataset": "tecator",
      "train": "data/tecator_train.csv",      # fixed split ...
      "test": "data/tecator_test.csv",
      "data": "data/heart.csv",               # ... or one file split per run
      "test_fraction": 0.25,                  # (stratified when classes exist)
      "schema": "data/tecator.schema.json",
      "method": "pls",                        # or "svd", or a list of both
      "grid": {"n_sets": [1, 10], "A": [10], "K": [4]},
      "baseline": true, "repeats": 5, "seed": 0,
      "model": "tecator", "lr": 1e-4, "epochs": 300, "batch_size": 10
    }

Only dataset, schema, method, grid and one of data/train+test are required.
Relative paths are resolved against the directory of the config file.
"""

import json
import logging
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
import pandas as pd

from .dataio import read_csv
from .engine import augment
from .errors import CRatioExceeded, DivergedLoss, PcvError
from .mixed import encode
from .mlp import MlpSpec, evaluate, heart_spec, mlp_train, tecator_spec
from .resampling import derive_seeds, rng_from_seed

log = logging.getLogger(__name__)

RESULT_COLUMNS = ["dataset", "method", "n_sets", "A", "K", "lr", "repeat", "metric", "value"]
PRESETS = {"tecator": tecator_spec, "heart": heart_spec}
_KNOWN_KEYS = {"dataset", "train", "test", "data", "test_fraction", "schema", "method",
               "grid", "baseline", "repeats", "seed", "scheme", "standardize",
               "scale_scores", "per_class", "cratio_max", "model", "layers", "lr",
               "epochs", "batch_size", "jobs"}


class ConfigError(PcvError, ValueError):
    pass


class CellDiverged(PcvError, FloatingPointError):
    """Training diverged; names the grid cell and repeat."""

    def __init__(self, cell, repeat, epoch):
        self.cell, self.repeat, self.epoch = cell, repeat, epoch
        super().__init__(f"training diverged at epoch {epoch} in grid cell {cell}, "
                         f"repeat {repeat}")


@dataclass(frozen=True)
class Cell:
    method: str
    n_sets: int
    A: int | None
    K: int | None

    def label(self):
        if self.n_sets == 0:
            return "n_sets=0"
        return f"method={self.method}, n_sets={self.n_sets}, A={self.A}, K={self.K}"


def _int_list(grid, key):
    v = grid.get(key)
    if v is None:
        raise ConfigError(f"grid is missing {key!r}")
    v = v if isinstance(v, list) else [v]
    if not v or not all(isinstance(x, int) and not isinstance(x, bool) for x in v):
        raise ConfigError(f"grid[{key!r}] must be an integer or a list of integers")
    return v


def load_config(path):
    try:
        with open(path) as fh:
            cfg = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    cfg = validate_config(cfg)
    base = os.path.dirname(os.path.abspath(path))
    for key in ("train", "test", "data", "schema"):
        if key in cfg and not os.path.isabs(cfg[key]):
            cfg[key] = os.path.join(base, cfg[key])
    return cfg


def validate_config(cfg):
    """Check a config dict and fill in defaults. Raises ConfigError."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(cfg) - _KNOWN_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys {sorted(unknown)}")
    for key in ("dataset", "schema", "method", "grid"):
        if key not in cfg:
            raise ConfigError(f"config is missing {key!r}")
    cfg = dict(cfg)
    pair = ("train" in cfg) + ("test" in cfg)
    if pair == 1 or (pair == 2) == ("data" in cfg):
        raise ConfigError("give either 'data' or both 'train' and 'test'")
    methods = cfg["method"] if isinstance(cfg["method"], list) else [cfg["method"]]
    if not methods or any(m not in ("svd", "pls") for m in methods):
        raise ConfigError("method must be 'svd', 'pls' or a list of them")
    cfg["method"] = methods
    if not isinstance(cfg["grid"], dict):
        raise ConfigError("grid must be an object with n_sets, A and K")
    grid = {k: _int_list(cfg["grid"], k) for k in ("n_sets", "A", "K")}
    if any(n < 1 for n in grid["n_sets"]):
        raise ConfigError("grid n_sets must be >= 1 (the baseline is a separate switch)")
    cfg["grid"] = grid
    cfg.setdefault("baseline", True)
    cfg.setdefault("repeats", 5)
    cfg.setdefault("seed", 0)
    cfg.setdefault("scheme", "random")
    cfg.setdefault("standardize", True)
    cfg.setdefault("scale_scores", True)
    cfg.setdefault("per_class", None)
    cfg.setdefault("cratio_max", 2.0)
    cfg.setdefault("test_fraction", 0.25)
    cfg.setdefault("epochs", 300)
    cfg.setdefault("batch_size", 10)
    cfg.setdefault("jobs", 1)
    if not isinstance(cfg["repeats"], int) or cfg["repeats"] < 1:
        raise ConfigError("repeats must be a positive integer")
    if not 0 < float(cfg["test_fraction"]) < 1:
        raise ConfigError("test_fraction must lie in (0, 1)")
    if "model" in cfg and cfg["model"] not in PRESETS:
        raise ConfigError(f"model must be one of {sorted(PRESETS)}")
    if "model" not in cfg and "layers" not in cfg:
        raise ConfigError("config needs a 'model' preset or a 'layers' list")
    return cfg


def grid_cells(cfg):
    cells = [Cell("none", 0, None, None)] if cfg["baseline"] else []
    for method in cfg["method"]:
        for n in cfg["grid"]["n_sets"]:
            for A in cfg["grid"]["A"]:
                for K in cfg["grid"]["K"]:
                    cells.append(Cell(method, n, A, K))
    return cells


def _spec(cfg, task, n_inputs, seed):
    kw = {"epochs": cfg["epochs"], "batch_size": cfg["batch_size"], "seed": seed}
    if "lr" in cfg:
        kw["learning_rate"] = float(cfg["lr"])
    if "model" in cfg:
        return PRESETS[cfg["model"]](**kw)
    sizes = [n_inputs] + list(cfg["layers"]) + [1]
    layers = list(zip(sizes[:-1], sizes[1:]))
    head = "sigmoid" if task == "classification" else "none"
    return MlpSpec(layers=layers, activations=["relu"] * (len(layers) - 1) + [head],
                   loss="bce" if task == "classification" else "mse", **kw)


def stratified_split(labels, test_fraction, seed):
    """Boolean train mask taking round((1 - f) * n_c) random rows from every group."""
    rng = rng_from_seed(seed)
    train = np.zeros(len(labels), dtype=bool)
    for level in np.unique(labels):
        idx = np.flatnonzero(labels == level)
        rng.shuffle(idx)
        train[idx[:int(round((1 - test_fraction) * idx.size))]] = True
    return train


def load_data(cfg):
    """Encoded (train, test) tables, or (table, None) for a file split per run."""
    if "data" in cfg:
        table, schema = read_csv(cfg["data"], cfg["schema"])
        return encode(table, schema), None
    tr, schema = read_csv(cfg["train"], cfg["schema"])
    te, _ = read_csv(cfg["test"], cfg["schema"])
    return encode(tr, schema), encode(te, schema)


def _task(enc):
    if enc.y is not None:
        return "regression"
    if enc.classes is not None:
        return "classification"
    raise ConfigError("schema declares neither a response nor a class column")


def run_one(cfg, enc_train, enc_test, cell, cell_index, repeat):
    """Train and evaluate one (grid cell, repeat). Returns result records."""
    task = _task(enc_train)
    split_seed, aug_seed, init_seed = derive_seeds(cfg["seed"], 3, cell_index, repeat)
    if enc_test is None:
        strata = enc_train.classes if enc_train.classes is not None else np.zeros(
            enc_train.X.shape[0])
        mask = stratified_split(strata, float(cfg["test_fraction"]), split_seed)
        Xtr, Xte = enc_train.X[mask], enc_train.X[~mask]
        ytr_raw = None if enc_train.y is None else enc_train.y[mask]
        yte_raw = None if enc_train.y is None else enc_train.y[~mask]
        ctr = None if enc_train.classes is None else enc_train.classes[mask]
        cte = None if enc_train.classes is None else enc_train.classes[~mask]
    else:
        Xtr, Xte = enc_train.X, enc_test.X
        ytr_raw, yte_raw = enc_train.y, enc_test.y
        ctr, cte = enc_train.classes, enc_test.classes

    positive = None
    if task == "classification":
        positive = enc_train.schema.target.levels[-1]
    # preprocessing statistics come from the original training rows only
    mean = Xtr.mean(axis=0)
    sd = Xtr.std(axis=0, ddof=1)
    sd[sd == 0] = 1.0
    y_offset = float(ytr_raw.mean()) if task == "regression" else 0.0

    if cell.n_sets:
        with warnings.catch_warnings():
            # large c-ratios are expected at high A, they are not an error here
            warnings.simplefilter("ignore", CRatioExceeded)
            aug = augment(Xtr, y=ytr_raw, classes=ctr, method=cell.method, ncomp=cell.A,
                          K=cell.K, n_sets=cell.n_sets, seed=aug_seed, scheme=cfg["scheme"],
                          standardize=cfg["standardize"], scale_scores=cfg["scale_scores"],
                          per_class=cfg["per_class"] if cell.method == "svd" else None,
                          cratio_max=cfg["cratio_max"])
        Xfit = aug.X
        yfit = aug.y if task == "regression" else (aug.classes == positive).astype(float)
    else:
        Xfit = Xtr
        yfit = ytr_raw if task == "regression" else (ctr == positive).astype(float)
    if task == "regression":
        yfit = yfit - y_offset
        ytest = yte_raw
    else:
        ytest = (cte == positive).astype(float)

    spec = _spec(cfg, task, Xtr.shape[1], init_seed)
    try:
        res = mlp_train(spec, (Xfit - mean) / sd, yfit)
    except DivergedLoss as exc:
        raise CellDiverged(cell.label(), repeat, exc.epoch) from exc
    metrics = evaluate(res.model, (Xte - mean) / sd, ytest, task, y_offset=y_offset)
    return [{"dataset": cfg["dataset"], "method": cell.method, "n_sets": cell.n_sets,
             "A": cell.A, "K": cell.K, "lr": spec.learning_rate, "repeat": repeat,
             "metric": name, "value": value} for name, value in metrics.items()]


def _run_task(args):
    return run_one(*args)


def run_experiment(cfg):
    """Run every grid cell `repeats` times. Returns the long-format results table."""
    cfg = validate_config(cfg)
    enc_train, enc_test = load_data(cfg)
    _task(enc_train)
    tasks = []
    for ci, cell in enumerate(grid_cells(cfg)):
        for r in range(cfg["repeats"]):
            tasks.append((cfg, enc_train, enc_test, cell, ci, r))
    records = []
    if cfg["jobs"] > 1:
        with ProcessPoolExecutor(max_workers=cfg["jobs"]) as pool:
            for recs in pool.map(_run_task, tasks):
                records.extend(recs)
    else:
        for t in tasks:
            log.info("%s, repeat %d", t[3].label(), t[5])
            records.extend(_run_task(t))
    return pd.DataFrame.from_records(records, columns=RESULT_COLUMNS)


def summarize(results):
    """Median of every metric per grid cell (baseline rows have blank A and K)."""
    keys = ["dataset", "method", "n_sets", "A", "K", "lr", "metric"]
    df = results.copy()
    df[["A", "K"]] = df[["A", "K"]].astype("Int64")
    out = (df.groupby(keys, dropna=False, sort=False)["value"]
           .agg(median="median", runs="size").reset_index())
    return out


def format_summary(summary):
    lines = []
    for _, row in summary.iterrows():
        parts = [f"n_sets={row['n_sets']}"]
        if row["n_sets"]:
            parts += [f"method={row['method']}", f"A={row['A']}", f"K={row['K']}"]
        name = "RMSEP" if row["metric"] == "rmsep" else row["metric"]
        parts.append(f"median {name}={row['median']:.4g}")
        parts.append(f"runs={row['runs']}")
        lines.append(", ".join(parts))
    return "\n".join(lines) + "\n"


def write_outputs(results, out_dir, figures=True):
    """results.csv, summary.txt and (optionally) box plots in `out_dir`."""
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, "results.csv")
    df = results.copy()
    df[["A", "K"]] = df[["A", "K"]].astype("Int64")
    df.to_csv(results_path, index=False, lineterminator="\n")
    summary = summarize(results)
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(format_summary(summary))
    paths = [results_path, os.path.join(out_dir, "summary.txt")]
    if figures:
        from .plotting import plot_results
        paths += plot_results(results, out_dir)
    return paths
