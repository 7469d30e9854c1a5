import json
from pathlib import Path

import pytest

from odhd_cim.config import RunConfig, load_config, merge
from odhd_cim.errors import ConfigError


def test_defaults():
    cfg = RunConfig()
    assert (cfg.dims, cfg.levels, cfg.epochs) == (10_000, 10, 10)
    assert cfg.variant == "software"
    assert cfg.repeats == 10
    assert cfg.train_fraction == 0.8
    assert cfg.deviation_scale == 2.0


def test_dict_roundtrip():
    cfg = RunConfig(command="simulate", dataset=Path("wbc"), design="design2", out=Path("r.json"))
    doc = cfg.to_dict()
    assert doc["dataset"] == "wbc"
    assert RunConfig.from_dict(doc) == cfg


def test_unknown_keys():
    with pytest.raises(ConfigError, match="colour"):
        RunConfig.from_dict({"colour": "blue"})


def test_load_config(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"dims": 2000, "levels": 5}))
    assert load_config(path) == {"dims": 2000, "levels": 5}

    path.write_text("[1, 2]")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text("{oops")
    with pytest.raises(ConfigError):
        load_config(path)
    path.write_text(json.dumps({"dimz": 1}))
    with pytest.raises(ConfigError):
        load_config(path)
    with pytest.raises(ConfigError):
        load_config(tmp_path / "absent.json")


def test_flags_override_file():
    cfg = merge({"dims": 2000, "levels": 5, "dataset": "synthetic"}, {"dims": 4000, "command": "eval", "seed": None})
    assert cfg.dims == 4000
    assert cfg.levels == 5
    assert cfg.epochs == 10
    assert cfg.seed == 0
    assert cfg.dataset == Path("synthetic")


def test_dataset_kinds(tmp_path):
    csv = tmp_path / "x.csv"
    csv.write_text("a,label\n1,0\n")
    assert RunConfig().dataset_kind == "none"
    assert RunConfig(dataset=Path("Synthetic")).dataset_kind == "synthetic"
    assert RunConfig(dataset=Path("wbc")).dataset_kind == "odds"
    assert RunConfig(dataset=csv).dataset_kind == "csv"


def test_design_names():
    assert RunConfig(command="sweep").design_names() == ["design1", "design2", "design3"]
    assert RunConfig(command="simulate").design_names() == ["design1"]
    assert RunConfig(command="sweep", design="design1, design3").design_names() == ["design1", "design3"]
    with pytest.raises(ConfigError):
        RunConfig(command="sweep", design=" , ").design_names()


@pytest.mark.parametrize("overrides", [
    {"command": "fit"},
    {"variant": "quantum"},
    {"levels": 1},
    {"dims": 15, "levels": 8},
    {"epochs": -1},
    {"repeats": 0},
    {"train_fraction": 1.0},
    {"update_fraction": 1.5},
    {"queries": -3},
    {"dims": 100.5},
    {"dataset": None},
    {"dataset": Path("missing.csv")},
    {"dataset": Path("wbc")},
    {"train_fraction": "0.5"},
    {"deviation_scale": "2"},
    {"deviation_scale": float("nan")},
    {"update_fraction": True},
    {"queries": "10"},
    {"queries": 2.5},
    {"epochs": True},
    {"seed": False},
    {"variant": 3},
    {"design": 1},
    {"hardware_division": "yes"},
])
def test_validation_errors(overrides):
    values = {"command": "eval", "dataset": Path("synthetic"), **overrides}
    with pytest.raises(ConfigError):
        RunConfig(**values).validate()


def test_detect_needs_model(synthetic_csv, tmp_path):
    with pytest.raises(ConfigError, match="--model"):
        RunConfig(command="detect", dataset=synthetic_csv).validate()
    with pytest.raises(ConfigError):
        RunConfig(command="detect", dataset=synthetic_csv, model=tmp_path / "none.json").validate()


def test_simulate_checks_designs():
    RunConfig(command="simulate", dataset=Path("wbc"), design="design3").validate()
    RunConfig(command="sweep").validate()
    with pytest.raises(ConfigError):
        RunConfig(command="simulate", dataset=Path("wbc"), design="design7").validate()
    with pytest.raises(ConfigError):
        RunConfig(command="sweep", cost_table=Path("nope")).validate()


def test_integral_reals_are_accepted():
    cfg = RunConfig(command="eval", dataset=Path("synthetic"), deviation_scale=-2, update_fraction=0).validate()
    assert cfg.deviation_scale == -2


def test_path_values_must_be_strings():
    with pytest.raises(ConfigError, match="dataset"):
        RunConfig.from_dict({"dataset": 5})
    with pytest.raises(ConfigError, match="out"):
        merge({"out": ["a", "b"]}, {"command": "eval"})
