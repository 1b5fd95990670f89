import json
import subprocess
import sys

import numpy as np
import pytest

from pcvaug.cli import main
from pcvaug.dataio import read_csv, read_meta, write_csv

from conftest import data_path

TEC = ["--data", data_path("tecator_train.csv"), "--schema", data_path("tecator.schema.json")]
HEART = ["--data", data_path("heart.csv"), "--schema", data_path("heart.schema.json")]


def gen(tmp_path, name, *extra, base=TEC):
    out = str(tmp_path / name)
    return main(["generate", *base, *extra, "--out", out]), out


def test_generate_tecator_rows(tmp_path):
    code, out = gen(tmp_path, "aug.csv", "--method", "pls", "--nlv", "10", "--nseg", "4",
                    "--nsets", "20", "--seed", "1")
    assert code == 0
    table, _ = read_csv(out)
    assert table.shape == (3570, 101)
    meta = read_meta(out[:-4] + ".json")
    assert meta["n_sets"] == 20 and len(meta["set_seeds"]) == 20
    assert meta["A"] == 10 and meta["K"] == 4 and meta["method"] == "pls"


def test_bad_segment_count(tmp_path, capsys):
    code, _ = gen(tmp_path, "x.csv", "--method", "svd", "--nlv", "2", "--nseg", "1")
    assert code == 2
    err = capsys.readouterr().err
    assert "--nseg" in err and "BadSegmentCount" in err


def test_too_many_components(tmp_path, capsys):
    code, _ = gen(tmp_path, "x.csv", "--method", "svd", "--nlv", "150")
    assert code == 2
    assert "--nlv" in capsys.readouterr().err


def test_missing_data_file(tmp_path, capsys):
    code = main(["generate", "--data", str(tmp_path / "nope.csv"), "--method", "svd",
                 "--nlv", "2", "--out", str(tmp_path / "o.csv")])
    assert code == 2 and "--data" in capsys.readouterr().err


def test_argparse_errors_exit_2(tmp_path):
    with pytest.raises(SystemExit) as info:
        main(["generate", *TEC, "--method", "lda", "--nlv", "2", "--out", "o.csv"])
    assert info.value.code == 2


def test_same_command_identical_files(tmp_path):
    args = ["--method", "svd", "--nlv", "4", "--nsets", "3", "--seed", "9", "--standardize"]
    _, a = gen(tmp_path, "a.csv", *args, base=HEART)
    _, b = gen(tmp_path, "b.csv", *args, base=HEART)
    assert open(a, "rb").read() == open(b, "rb").read()
    ma = json.load(open(a[:-4] + ".json"))
    mb = json.load(open(b[:-4] + ".json"))
    assert ma == mb


def test_diagnose_engine_output(tmp_path, capsys):
    _, out = gen(tmp_path, "a.csv", "--method", "pls", "--nlv", "6", "--nsets", "2",
                 "--standardize")
    rep = str(tmp_path / "rep.json")
    assert main(["diagnose", *TEC, "--pvset", out, "--report", rep]) == 0
    assert "PASS" in capsys.readouterr().out
    assert json.load(open(rep))["passed"] is True


def test_diagnose_per_class_svd(tmp_path):
    _, out = gen(tmp_path, "h.csv", "--method", "svd", "--nlv", "5", "--nsets", "2",
                 base=HEART)
    assert main(["diagnose", *HEART, "--pvset", out]) == 0


def test_diagnose_perturbed(tmp_path):
    _, out = gen(tmp_path, "a.csv", "--method", "svd", "--nlv", "3", "--nsets", "1")
    table, _ = read_csv(out)
    X = table.drop(columns="fat").to_numpy()
    X[170:] += np.random.default_rng(0).normal(scale=0.1, size=(170, 100))
    table.iloc[:, :100] = X
    write_csv(table, out)
    assert main(["diagnose", *TEC, "--pvset", out]) == 3


def test_diagnose_wrong_seed_fails_rules(tmp_path):
    _, out = gen(tmp_path, "a.csv", "--method", "pls", "--nlv", "3", "--seed", "5")
    assert main(["diagnose", *TEC, "--pvset", out, "--seed", "5"]) == 0
    assert main(["diagnose", *TEC, "--pvset", out, "--seed", "6"]) == 3


def test_diagnose_without_plan(tmp_path, capsys):
    _, out = gen(tmp_path, "a.csv", "--method", "svd", "--nlv", "3")
    (tmp_path / "a.json").unlink()
    assert main(["diagnose", *TEC, "--pvset", out, "--method", "svd", "--nlv", "3"]) == 2
    assert "--seed" in capsys.readouterr().err


def test_diagnose_shape_mismatch(tmp_path):
    _, out = gen(tmp_path, "a.csv", "--method", "svd", "--nlv", "3")
    table, _ = read_csv(out)
    write_csv(table.iloc[:-5], out)
    assert main(["diagnose", *TEC, "--pvset", out]) == 2


def benchmark_config(tmp_path, **kw):
    cfg = {"dataset": "heart", "data": data_path("heart.csv"),
           "schema": data_path("heart.schema.json"), "method": ["pls", "svd"],
           "grid": {"n_sets": [1], "A": [3], "K": [4]}, "repeats": 1, "model": "heart",
           "epochs": 1}
    cfg.update(kw)
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_benchmark_writes_outputs(tmp_path, capsys):
    cfg = benchmark_config(tmp_path)
    assert main(["benchmark", "--config", cfg, "--out", str(tmp_path / "res")]) == 0
    out = capsys.readouterr().out
    assert "n_sets=0, median accuracy=" in out
    assert "n_sets=1, method=svd" in out
    assert (tmp_path / "res" / "results.csv").exists()
    assert (tmp_path / "res" / "box_accuracy_by_n_sets.png").exists()


def test_benchmark_malformed(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["benchmark", "--config", str(bad)]) == 2
    assert main(["benchmark", "--config", benchmark_config(tmp_path, grid=[])]) == 2
    assert main(["benchmark", "--config", str(tmp_path / "missing.json")]) == 2


def test_benchmark_divergence_exit_1(tmp_path, monkeypatch, capsys):
    from pcvaug import bench
    from pcvaug.errors import DivergedLoss

    def boom(spec, X, y):
        raise DivergedLoss(1)

    monkeypatch.setattr(bench, "mlp_train", boom)
    assert main(["benchmark", "--config", benchmark_config(tmp_path), "--no-figures"]) == 1
    assert "grid cell n_sets=0" in capsys.readouterr().err


def test_console_script(tmp_path):
    res = subprocess.run([sys.executable, "-m", "pcvaug.cli", "--version"],
                         capture_output=True, text=True)
    assert res.returncode == 0 and "pcvaug" in res.stdout
