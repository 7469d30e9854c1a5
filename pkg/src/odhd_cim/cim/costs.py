"""
Mat geometry and per-operation cost tables.

Three designs ship as presets (design1-3). A design or cost table can also
be read from a JSON file with the same schema as the presets.

Usage:
    design = load_design("design1")
    table = load_cost_table("design1")
    table.price(Op.ADD).latency  # 12.87 ns
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from importlib import resources
from pathlib import Path

from ..errors import ConfigError

PRESET_PACKAGE = "odhd_cim.presets"


class Op(Enum):
    READ = "read"
    NOT = "not"
    AND = "and"
    OR = "or"
    MULT = "mult"
    WRITE = "write"
    ADD = "add"
    SUB = "sub"
    SHIFT = "shift"
    PERMUTE = "permute"      # in-PE share of a permutation pair
    PE_TO_REG = "pe_to_reg"  # source PE -> register A/B leg
    REG_TO_PE = "reg_to_pe"  # register A/B -> destination PE leg


# Ops priced directly from a table row; the rest derive from the permutation row
TABLE_OPS = (Op.READ, Op.NOT, Op.AND, Op.OR, Op.MULT, Op.WRITE, Op.ADD, Op.SUB, Op.SHIFT)
TRANSFER_OPS = (Op.PE_TO_REG, Op.REG_TO_PE)


@dataclass(frozen=True)
class OpCost:
    latency: float  # ns
    energy: float   # nJ

    def __add__(self, other: "OpCost") -> "OpCost":
        return OpCost(self.latency + other.latency, self.energy + other.energy)

    def to_dict(self) -> dict:
        return {"latency_ns": self.latency, "energy_nj": self.energy}


@dataclass(frozen=True)
class MatDesign:
    """P x Q grid of processing elements, each an M x N cell array."""

    name: str
    P: int
    Q: int
    M: int  # rows per PE
    N: int  # columns per PE

    def __post_init__(self):
        for attr in ("P", "Q", "M", "N"):
            value = getattr(self, attr)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"design {self.name!r}: {attr} must be a positive integer (got {value!r})")

    @property
    def pe_count(self) -> int:
        return self.P * self.Q

    @property
    def capacity(self) -> int:
        return self.P * self.Q * self.M * self.N

    def span(self, dims: int) -> int:
        """PEs needed to hold one dims-wide hypervector row."""
        return -(-dims // self.N)

    def to_dict(self) -> dict:
        return {"name": self.name, "P": self.P, "Q": self.Q, "M": self.M, "N": self.N}

    @classmethod
    def from_dict(cls, d: dict, name: str | None = None) -> "MatDesign":
        try:
            return cls(
                name=str(d.get("name", name or "custom")),
                P=d["P"], Q=d["Q"], M=d["M"], N=d["N"],
            )
        except KeyError as e:
            raise ConfigError(f"design document is missing field {e}") from None


@dataclass(frozen=True)
class CostTable:
    """
    Latency/energy for each in-memory primitive plus the permutation total.

    The permutation row already includes register traffic. Its comm fractions
    split it into the in-PE share (PERMUTE) and two equal transfer legs.
    A table without a Sub row prices SUB as NOT + WRITE + ADD.
    """

    name: str
    entries: dict[Op, OpCost] = field(default_factory=dict)
    permutation: OpCost = OpCost(0.0, 0.0)
    comm_time_fraction: float = 0.562
    comm_energy_fraction: float = 0.377

    def __post_init__(self):
        for op, cost in self.entries.items():
            if op not in TABLE_OPS:
                raise ConfigError(f"cost table {self.name!r}: {op.value} cannot be priced directly")
            if not (cost.latency > 0 and cost.energy > 0):
                raise ConfigError(f"cost table {self.name!r}: {op.value} entries must be positive")
        if not (self.permutation.latency > 0 and self.permutation.energy > 0):
            raise ConfigError(f"cost table {self.name!r}: permutation entries must be positive")
        for attr in ("comm_time_fraction", "comm_energy_fraction"):
            value = getattr(self, attr)
            if not 0 < value < 1:
                raise ConfigError(f"cost table {self.name!r}: {attr} must be in (0, 1) (got {value})")

    def has(self, op: Op) -> bool:
        try:
            self.price(op)
        except ConfigError:
            return False
        return True

    def price(self, op: Op) -> OpCost:
        if op in self.entries:
            return self.entries[op]
        if op is Op.PERMUTE:
            return OpCost(
                self.permutation.latency * (1 - self.comm_time_fraction),
                self.permutation.energy * (1 - self.comm_energy_fraction),
            )
        if op in TRANSFER_OPS:
            return OpCost(
                self.permutation.latency * self.comm_time_fraction / 2,
                self.permutation.energy * self.comm_energy_fraction / 2,
            )
        if op is Op.SUB:
            return self.price(Op.NOT) + self.price(Op.WRITE) + self.price(Op.ADD)
        raise ConfigError(f"cost table {self.name!r} has no entry for {op.value}")

    def to_dict(self) -> dict:
        d = {op.value: cost.to_dict() for op, cost in self.entries.items()}
        d["name"] = self.name
        d["permutation"] = self.permutation.to_dict()
        d["comm_time_fraction"] = self.comm_time_fraction
        d["comm_energy_fraction"] = self.comm_energy_fraction
        return d

    @classmethod
    def from_dict(cls, d: dict, name: str | None = None) -> "CostTable":
        def parse(key: str) -> OpCost:
            raw = d[key]
            try:
                cost = OpCost(float(raw["latency_ns"]), float(raw["energy_nj"]))
            except (KeyError, TypeError, ValueError):
                raise ConfigError(f"cost entry {key!r} needs numeric latency_ns and energy_nj") from None
            if not (math.isfinite(cost.latency) and math.isfinite(cost.energy)):
                raise ConfigError(f"cost entry {key!r} must be finite")
            return cost

        if "permutation" not in d:
            raise ConfigError("cost table is missing the permutation entry")
        entries = {op: parse(op.value) for op in TABLE_OPS if op.value in d}
        return cls(
            name=str(d.get("name", name or "custom")),
            entries=entries,
            permutation=parse("permutation"),
            comm_time_fraction=float(d.get("comm_time_fraction", 0.562)),
            comm_energy_fraction=float(d.get("comm_energy_fraction", 0.377)),
        )


# ============================================================================
# Presets and JSON loading
# ============================================================================

def _read_preset(filename: str) -> dict:
    text = resources.files(PRESET_PACKAGE).joinpath(filename).read_text()
    return json.loads(text)


def _read_json(path: Path, what: str) -> dict:
    if not path.exists():
        raise ConfigError(f"{what} file {path} does not exist")
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as e:
        raise ConfigError(f"{what} file {path} is not valid JSON: {e}") from None
    if not isinstance(doc, dict):
        raise ConfigError(f"{what} file {path} must hold a JSON object")
    return doc


def preset_names() -> list[str]:
    return sorted(_read_preset("designs.json"))


def preset_designs() -> list[MatDesign]:
    presets = _read_preset("designs.json")
    return [MatDesign.from_dict(presets[name], name) for name in sorted(presets)]


def load_design(name_or_path: str | Path) -> MatDesign:
    """A preset name (case-insensitive) or a path to a design JSON file."""
    presets = _read_preset("designs.json")
    key = str(name_or_path).lower()
    if key in presets:
        return MatDesign.from_dict(presets[key], key)
    path = Path(name_or_path)
    if path.suffix.lower() != ".json":
        names = ", ".join(sorted(presets))
        raise ConfigError(f"unknown design {name_or_path!r} (presets: {names}, or a .json file)")
    return MatDesign.from_dict(_read_json(path, "design"), path.stem)


def load_cost_table(name_or_path: str | Path) -> CostTable:
    """A preset name (design1-3) or a path to a cost table JSON file."""
    presets = _read_preset("cost_tables.json")
    key = str(name_or_path).lower()
    if key in presets:
        return CostTable.from_dict(presets[key], key)
    path = Path(name_or_path)
    if path.suffix.lower() != ".json":
        names = ", ".join(sorted(presets))
        raise ConfigError(f"unknown cost table {name_or_path!r} (presets: {names}, or a .json file)")
    return CostTable.from_dict(_read_json(path, "cost table"), path.stem)
