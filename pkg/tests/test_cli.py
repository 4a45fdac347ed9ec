import csv
import json

import pytest

from etdcnn.cli import main
from etdcnn.dataset import load_csv


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    cfg = {
        "bags": 3,
        "synth": {"n_consumers": 80, "n_days": 40, "theft_fraction": 0.2, "seed": 4},
        "train": {"epochs": 3, "batch_size": 16},
        "architecture": [
            {"type": "Conv1D", "filters": 4, "kernel": 5, "activation": "relu"},
            {"type": "MaxPool1D", "pool": 2},
            {"type": "Flatten"},
            {"type": "Dense", "units": 8, "activation": "relu"},
            {"type": "Dense", "units": 1, "activation": "sigmoid"},
        ],
    }
    (root / "cfg.json").write_text(json.dumps(cfg))
    assert main(["synth", "--config", str(root / "cfg.json"), "--out", str(root / "data")]) == 0
    return root


def run_train(root, out):
    return main(
        ["train", "--config", str(root / "cfg.json"), "--data", str(root / "data" / "dataset.csv"), "--out", str(out)]
    )


def test_synth_outputs(workspace):
    ds = load_csv(workspace / "data" / "dataset.csv")
    assert len(ds) == 80 and ds.n_days == 40 and ds.labels.sum() == 16
    assert (workspace / "data" / "dataset.csv.manifest.json").is_file()


def test_preprocess(workspace):
    out = workspace / "pre"
    assert main(["preprocess", "--data", str(workspace / "data" / "dataset.csv"), "--out", str(out)]) == 0
    rows = list(csv.reader((out / "processed.csv").open()))
    vals = [float(v) for r in rows[1:] for v in r[2:]]
    assert all(0 <= v <= 1 or v == -1 for v in vals)


def test_train_eval_predict(workspace):
    out = workspace / "run1"
    assert run_train(workspace, out) == 0
    report = json.loads((out / "run_report.json").read_text())
    assert report["config"]["bags"] == 3 and report["config"]["train"]["epochs"] == 3
    assert len(report["models"]) == 3 and len(report["models"][0]["history"]) == 3
    assert set(report["config"]) >= {"seed", "preprocess", "architecture", "train_fraction"}

    common = ["--config", str(workspace / "cfg.json"), "--data", str(workspace / "data" / "dataset.csv"), "--model", str(out / "ensemble")]
    assert main(["eval", *common, "--out", str(out)]) == 0
    metrics = json.loads((out / "metrics.json").read_text())
    assert metrics["positive_class"] == "normal" and 0 <= metrics["auc"] <= 1
    assert metrics["confusion"]["tp"] + metrics["confusion"]["fn"] + metrics["confusion"]["fp"] + metrics["confusion"]["tn"] == 24
    assert (out / "roc.csv").read_text().startswith("fpr,tpr\n")

    assert main(["eval", *common, "--out", str(out / "t"), "--positive-class", "theft"]) == 0
    assert json.loads((out / "t" / "metrics.json").read_text())["positive_class"] == "theft"

    assert main(["predict", *common, "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "predictions.csv").open()))
    assert len(rows) == 80
    assert all(int(r["votes_attack"]) + int(r["votes_normal"]) == 3 for r in rows)


def test_train_is_byte_reproducible(workspace):
    a, b = workspace / "ra", workspace / "rb"
    assert run_train(workspace, a) == 0 and run_train(workspace, b) == 0
    for f in sorted((a / "ensemble").iterdir()):
        assert f.read_bytes() == (b / "ensemble" / f.name).read_bytes()
    assert (a / "run_report.json").read_bytes() == (b / "run_report.json").read_bytes()


def test_eval_missing_model_is_usage_error(workspace, capsys):
    code = main(["eval", "--data", str(workspace / "data" / "dataset.csv"), "--model", str(workspace / "nope"), "--out", str(workspace / "x")])
    assert code == 2
    assert "model" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv",
    [["train", "--bags", "4"], ["train", "--epochs", "0"], ["train", "--config", "/does/not/exist.json"]],
)
def test_invalid_config_exit_2(workspace, argv):
    assert main([*argv, "--data", str(workspace / "data" / "dataset.csv"), "--out", str(workspace / "y")]) == 2


def test_bad_data_exit_1(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("CONS_NO,FLAG,2014/1/1\nu1,0,abc\n")
    assert main(["preprocess", "--data", str(bad), "--out", str(tmp_path)]) == 1
    assert "[dataset]" in capsys.readouterr().err


def test_unknown_config_key(tmp_path, workspace):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"bogus": 1}))
    assert main(["train", "--config", str(cfg), "--data", str(workspace / "data" / "dataset.csv"), "--out", str(tmp_path)]) == 2
