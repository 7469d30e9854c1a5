"""
Run configuration for the `odhd` command.

A JSON config file may set any RunConfig field. Flags given on the command
line override the file; built-in defaults fill whatever neither sets.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Optional

from .cim.costs import load_cost_table, load_design, preset_names
from .data.dataset import load_odds_shapes
from .detector.model import Variant
from .errors import ConfigError, OdhdError

COMMANDS = ("train", "detect", "eval", "simulate", "sweep")
SYNTHETIC = "synthetic"

PATH_FIELDS = ("dataset", "out", "model", "cost_table")
INT_FIELDS = ("dims", "levels", "epochs", "repeats", "seed")
REAL_FIELDS = ("train_fraction", "deviation_scale", "update_fraction")


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_real(value) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


@dataclass
class RunConfig:
    """Everything one `odhd` invocation needs."""

    command: str = "eval"
    dataset: Optional[Path] = None        # CSV file, "synthetic" or an ODDS name (simulate/sweep)
    variant: str = "software"             # software | cim
    dims: int = 10_000
    levels: int = 10
    epochs: int = 10
    design: Optional[str] = None          # preset name or JSON path; comma list for sweep
    cost_table: Optional[Path] = None     # None = the design's preset table
    repeats: int = 10
    seed: int = 0
    out: Optional[Path] = None
    train_fraction: float = 0.8
    deviation_scale: float = 2.0
    update_fraction: float = 0.0          # simulate: share of samples re-bundled per epoch
    queries: Optional[int] = None         # simulate: test queries (default: the test split size)
    model: Optional[Path] = None          # detect: model JSON
    hardware_division: bool = False       # cim: floor right shifts for mean/MAD

    def to_dict(self) -> dict:
        d = asdict(self)
        for key in PATH_FIELDS:
            if d[key] is not None:
                d[key] = str(d[key])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config key(s): {', '.join(unknown)}")
        values = dict(d)
        for key in PATH_FIELDS:
            value = values.get(key)
            if value is None:
                continue
            if not isinstance(value, (str, Path)):
                raise ConfigError(f"{key} must be a path string (got {value!r})")
            values[key] = Path(value)
        return cls(**values)

    @property
    def variant_enum(self) -> Variant:
        return Variant.parse(self.variant)

    @property
    def dataset_kind(self) -> str:
        """One of "none", "synthetic", "odds" (shape metadata) or "csv"."""
        if self.dataset is None:
            return "none"
        name = str(self.dataset).lower()
        if name == SYNTHETIC:
            return SYNTHETIC
        if name in {s.name for s in load_odds_shapes()} and not Path(self.dataset).exists():
            return "odds"
        return "csv"

    def design_names(self) -> list[str]:
        if self.design is None:
            return preset_names() if self.command == "sweep" else ["design1"]
        names = [name.strip() for name in str(self.design).split(",") if name.strip()]
        if not names:
            raise ConfigError("--design names no design")
        return names

    def validate(self) -> "RunConfig":
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r} (expected one of: {', '.join(COMMANDS)})")
        if not isinstance(self.variant, (str, Variant)):
            raise ConfigError(f"variant must be a string (got {self.variant!r})")
        Variant.parse(self.variant)
        for name in INT_FIELDS:
            if not _is_int(getattr(self, name)):
                raise ConfigError(f"{name} must be an integer (got {getattr(self, name)!r})")
        for name in REAL_FIELDS:
            if not _is_real(getattr(self, name)):
                raise ConfigError(f"{name} must be a finite number (got {getattr(self, name)!r})")
        if self.queries is not None and not _is_int(self.queries):
            raise ConfigError(f"queries must be an integer (got {self.queries!r})")
        if not isinstance(self.hardware_division, bool):
            raise ConfigError(f"hardware_division must be true or false (got {self.hardware_division!r})")
        if self.design is not None and not isinstance(self.design, str):
            raise ConfigError(f"design must be a string (got {self.design!r})")
        if self.levels < 2:
            raise ConfigError(f"levels must be >= 2 (got {self.levels})")
        if self.dims < 2 * self.levels:
            raise ConfigError(f"dims must be >= 2 * levels (got D={self.dims}, k={self.levels})")
        if self.epochs < 0:
            raise ConfigError(f"epochs must be >= 0 (got {self.epochs})")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1 (got {self.repeats})")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0 (got {self.seed})")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError(f"train_fraction must be in (0, 1) (got {self.train_fraction})")
        if not 0.0 <= self.update_fraction <= 1.0:
            raise ConfigError(f"update_fraction must be in [0, 1] (got {self.update_fraction})")
        if self.queries is not None and self.queries < 0:
            raise ConfigError(f"queries must be >= 0 (got {self.queries})")
        self._validate_inputs()
        return self

    def _validate_inputs(self):
        kind = self.dataset_kind
        if self.command in ("train", "detect", "eval", "simulate") and kind == "none":
            raise ConfigError(f"{self.command} needs --dataset")
        if kind == "csv" and not Path(self.dataset).is_file():
            raise ConfigError(f"dataset file {self.dataset} does not exist")
        if kind == "odds" and self.command not in ("simulate", "sweep"):
            raise ConfigError(f"{self.command} needs a CSV dataset; {self.dataset} names shape metadata only")
        if kind == SYNTHETIC and self.command == "detect":
            raise ConfigError("detect needs a CSV dataset")
        if self.command == "detect":
            if self.model is None:
                raise ConfigError("detect needs --model")
            if not Path(self.model).is_file():
                raise ConfigError(f"model file {self.model} does not exist")
        if self.command in ("simulate", "sweep"):
            try:
                for name in self.design_names():
                    design = load_design(name)
                    if self.cost_table is None:
                        load_cost_table(design.name)
                if self.cost_table is not None:
                    load_cost_table(self.cost_table)
            except OdhdError as e:
                raise ConfigError(str(e)) from None


def load_config(path: Path) -> dict:
    """Read a JSON config file into a dict of RunConfig fields."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file {path} does not exist")
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"config file {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    RunConfig.from_dict(doc)  # rejects unknown keys
    return doc


def merge(file_values: dict, flags: dict) -> RunConfig:
    """Defaults < config file < explicitly given flags."""
    values = {**file_values, **{k: v for k, v in flags.items() if v is not None}}
    return RunConfig.from_dict(values)
