import csv
import json

import pytest

from odhd_cim.cli import atomic_write_text, main

FAST = ["--dims", "500", "--epochs", "2"]


def test_eval_output_is_reproducible(tmp_path):
    outputs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        assert main(["eval", "--dataset", "synthetic", "--repeats", "2", *FAST, "--out", str(out)]) == 0
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    doc = json.loads(outputs[0])
    assert set(doc["metrics"]) == {"acc", "f1", "auc"}
    assert doc["config"]["repeats"] == 2


def test_eval_on_csv(synthetic_csv, tmp_path, capsys):
    out = tmp_path / "summary.json"
    assert main(["eval", "--dataset", str(synthetic_csv), "--variant", "cim", "--repeats", "1", *FAST,
                 "--out", str(out)]) == 0
    assert json.loads(out.read_text())["dataset"]["name"] == "synthetic"
    assert "EVALUATION" in capsys.readouterr().err


def test_train_then_detect(synthetic_csv, tmp_path):
    model = tmp_path / "model.json"
    scores = tmp_path / "scores.csv"
    assert main(["train", "--dataset", str(synthetic_csv), "--variant", "cim", *FAST, "--out", str(model)]) == 0
    assert json.loads(model.read_text())["variant"] == "cim"

    assert main(["detect", "--model", str(model), "--dataset", str(synthetic_csv), "--out", str(scores)]) == 0
    with open(scores, newline="") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["index", "label", "score"]
    assert len(rows) == 221
    assert {r[1] for r in rows[1:]} <= {"0", "1"}
    assert all(r[2].lstrip("-").isdigit() for r in rows[1:])


def test_config_file_and_flag_override(tmp_path):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"dataset": "synthetic", "dims": 500, "epochs": 1, "repeats": 3}))
    out = tmp_path / "summary.json"
    assert main(["eval", "--config", str(config), "--repeats", "1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert doc["config"]["dims"] == 500
    assert doc["config"]["repeats"] == 1


def test_config_file_with_mistyped_value(tmp_path, capsys):
    config = tmp_path / "run.json"
    config.write_text(json.dumps({"dataset": "synthetic", "train_fraction": "0.5"}))
    out = tmp_path / "summary.json"
    assert main(["eval", "--config", str(config), "--out", str(out)]) == 2
    assert "train_fraction" in capsys.readouterr().err
    assert not out.exists()


def test_simulate_writes_json_and_text(tmp_path):
    out = tmp_path / "reports" / "wbc.json"
    assert main(["simulate", "--dataset", "wbc", "--design", "design1", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert set(doc) == {"training", "testing"}
    assert doc["training"]["workload"]["padded_n"] == 512
    assert doc["testing"]["workload"]["queries"] == 92
    text = out.with_suffix(".txt").read_text()
    assert "12.87" in text
    assert "Outlier Detection" in text


def test_simulate_to_stdout(capsys):
    assert main(["simulate", "--dataset", "lympho", "--queries", "5"]) == 0
    captured = capsys.readouterr()
    assert "Bndl+Thr+Tun" in captured.out
    assert "SIMULATION" in captured.err


def test_simulate_takes_one_design(tmp_path):
    assert main(["simulate", "--dataset", "wbc", "--design", "design1,design2"]) == 2


def test_sweep(tmp_path):
    out = tmp_path / "sweep.json"
    assert main(["sweep", "--dataset", "lympho", "--design", "design1,design2", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    assert sorted(doc["rank_by_latency"]) == ["design1", "design2"]
    assert len(doc["designs"]) == 2
    assert out.with_suffix(".txt").exists()


def test_missing_dataset_writes_nothing(tmp_path, capsys):
    out = tmp_path / "summary.json"
    code = main(["eval", "--dataset", str(tmp_path / "absent.csv"), "--out", str(out)])
    assert code == 2
    assert not out.exists()
    assert "Error:" in capsys.readouterr().err


def test_malformed_csv_exit_code(tmp_path):
    bad = tmp_path / "bad.csv"
    bad.write_text("f_1,label\n1,0\nx,1\n")
    assert main(["eval", "--dataset", str(bad), *FAST]) == 3


def test_capacity_exit_code(tmp_path):
    design = tmp_path / "tiny.json"
    design.write_text(json.dumps({"P": 1, "Q": 1, "M": 8, "N": 16}))
    code = main(["simulate", "--dataset", "wbc", "--design", str(design), "--cost-table", "design1"])
    assert code == 4


def test_unknown_flag():
    with pytest.raises(SystemExit) as err:
        main(["eval", "--colour", "blue"])
    assert err.value.code == 2


def test_help_lists_flags(capsys):
    with pytest.raises(SystemExit) as err:
        main(["eval", "--help"])
    assert err.value.code == 0
    text = capsys.readouterr().out
    for flag in ("--dataset", "--variant", "--dims", "--levels", "--epochs", "--design",
                 "--cost-table", "--repeats", "--seed", "--out", "--config"):
        assert flag in text


def test_atomic_write_replaces_file(tmp_path):
    target = tmp_path / "out.txt"
    target.write_text("old")
    atomic_write_text(target, "new")
    assert target.read_text() == "new"
    assert [p.name for p in tmp_path.iterdir()] == ["out.txt"]
