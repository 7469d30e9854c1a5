"""
One-class model schema and its JSON document.

The document is versioned; seeds are stored as +/-1 lists and the one-class
accumulator as an integer list, so a saved model reloads bit-identically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum, IntEnum
from pathlib import Path

import numpy as np

from ..errors import ConfigError, InvalidArgumentError
from ..hdc import Hypervector, Kind
from .quantizer import Quantizer
from .seeds import SeedSet

MODEL_FORMAT = "odhd-model"
MODEL_VERSION = 1


class Variant(Enum):
    SOFTWARE = "software"  # cosine similarity, mean + c * std
    CIM = "cim"            # dot similarity, mean + c * MAD, power-of-two padding

    @classmethod
    def parse(cls, value: "str | Variant") -> "Variant":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).lower())
        except ValueError:
            names = ", ".join(v.value for v in cls)
            raise ConfigError(f"unknown variant {value!r} (expected one of: {names})") from None


class Label(IntEnum):
    INLIER = 0
    OUTLIER = 1


@dataclass(frozen=True)
class DetectorConfig:
    """Hyperparameters of one detector fit."""
    dims: int = 10_000
    levels: int = 10
    epochs: int = 10
    variant: Variant = Variant.SOFTWARE
    deviation_scale: float = 2.0
    hardware_division: bool = False  # floor right shifts for mean/MAD (cim only)

    def __post_init__(self):
        if self.levels < 2:
            raise InvalidArgumentError(f"levels must be >= 2 (got {self.levels})")
        if self.dims < 2 * self.levels:
            raise InvalidArgumentError(f"dims must be >= 2 * levels (got D={self.dims}, k={self.levels})")
        if self.epochs < 0:
            raise InvalidArgumentError(f"epochs must be >= 0 (got {self.epochs})")
        object.__setattr__(self, "variant", Variant.parse(self.variant))


@dataclass(frozen=True)
class OneClassModel:
    h_oc: Hypervector
    threshold: float
    seeds: SeedSet
    quantizer: Quantizer
    variant: Variant
    epochs: int = 0
    deviation_scale: float = 2.0
    hardware_division: bool = False
    threshold_history: tuple[float, ...] = field(default_factory=tuple)
    updates_per_epoch: tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if not math.isfinite(self.threshold):
            raise InvalidArgumentError(f"threshold must be finite (got {self.threshold})")
        if self.h_oc.dims != self.seeds.dims:
            raise InvalidArgumentError(
                f"one-class HV has {self.h_oc.dims} dims but seeds have {self.seeds.dims}"
            )

    @property
    def dims(self) -> int:
        return self.seeds.dims

    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "dims": self.dims,
            "levels": self.seeds.k,
            "flips": self.seeds.flips,
            "variant": self.variant.value,
            "epochs": self.epochs,
            "deviation_scale": self.deviation_scale,
            "hardware_division": self.hardware_division,
            "quantizer": self.quantizer.to_dict(),
            "seeds": self.seeds.to_dict()["seeds"],
            "h_oc": self.h_oc.to_list(),
            "threshold": self.threshold,
            "threshold_history": list(self.threshold_history),
            "updates_per_epoch": list(self.updates_per_epoch),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "OneClassModel":
        if d.get("format") != MODEL_FORMAT:
            raise ConfigError(f"not an {MODEL_FORMAT} document (format={d.get('format')!r})")
        if d.get("version") != MODEL_VERSION:
            raise ConfigError(f"unsupported model version {d.get('version')!r} (expected {MODEL_VERSION})")
        try:
            seeds = SeedSet(np.array(d["seeds"]), int(d["flips"]))
            if seeds.k != int(d["levels"]) or seeds.dims != int(d["dims"]):
                raise ConfigError("model header does not match its seed matrix")
            return cls(
                h_oc=Hypervector(np.array(d["h_oc"]), Kind.ACCUMULATOR),
                threshold=float(d["threshold"]),
                seeds=seeds,
                quantizer=Quantizer.from_dict(d["quantizer"]),
                variant=Variant.parse(d["variant"]),
                epochs=int(d["epochs"]),
                deviation_scale=float(d.get("deviation_scale", 2.0)),
                hardware_division=bool(d.get("hardware_division", False)),
                threshold_history=tuple(float(v) for v in d.get("threshold_history", [])),
                updates_per_epoch=tuple(int(v) for v in d.get("updates_per_epoch", [])),
            )
        except KeyError as e:
            raise ConfigError(f"model document is missing field {e}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def load_model(path: Path) -> OneClassModel:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"model file {path} does not exist")
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"model file {path} is not valid JSON: {e}") from None
    return OneClassModel.from_dict(doc)
