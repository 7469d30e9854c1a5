"""Seed (level) hypervector chain."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..hdc import HV_DTYPE, Hypervector, Kind, new_random_bipolar


@dataclass(frozen=True, eq=False)
class SeedSet:
    """k bipolar seeds; consecutive seeds differ in exactly `flips` positions."""

    seeds: np.ndarray  # k x D, values -1/+1
    flips: int

    def __post_init__(self):
        seeds = np.asarray(self.seeds, dtype=HV_DTYPE)
        if seeds.ndim != 2 or seeds.shape[0] < 1:
            raise InvalidArgumentError("seed matrix must be k x D with k >= 1")
        if not np.all(np.abs(seeds) == 1):
            raise InvalidArgumentError("seed hypervectors must be bipolar")
        seeds.setflags(write=False)
        object.__setattr__(self, "seeds", seeds)

    @property
    def k(self) -> int:
        return int(self.seeds.shape[0])

    @property
    def dims(self) -> int:
        return int(self.seeds.shape[1])

    def seed(self, level: int) -> Hypervector:
        """Seed for a 1-based level index."""
        if not 1 <= level <= self.k:
            raise InvalidArgumentError(f"level {level} outside [1, {self.k}]")
        return Hypervector(self.seeds[level - 1], Kind.BIPOLAR)

    def to_dict(self) -> dict:
        return {"flips": self.flips, "seeds": self.seeds.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SeedSet":
        return cls(np.array(d["seeds"], dtype=HV_DTYPE), int(d["flips"]))


def flip_count(dims: int, k: int) -> int:
    return dims // (2 * k)


def generate_seeds(dims: int, k: int, rng: np.random.Generator) -> SeedSet:
    """
    s_1 is random bipolar; s_i is s_(i-1) with E = floor(D/2k) positions flipped.

    Flip positions are disjoint across the whole chain, so Hamming(s_1, s_i)
    grows by exactly E per step.
    """
    if k < 1:
        raise InvalidArgumentError(f"k must be >= 1 (got {k})")
    if dims < 2 * k:
        raise InvalidArgumentError(f"seed chain needs D >= 2k (got D={dims}, k={k})")
    flips = flip_count(dims, k)
    first = new_random_bipolar(dims, rng).elems
    order = rng.permutation(dims)

    seeds = np.empty((k, dims), dtype=HV_DTYPE)
    seeds[0] = first
    for i in range(1, k):
        seeds[i] = seeds[i - 1]
        positions = order[(i - 1) * flips:i * flips]
        seeds[i, positions] *= -1
    return SeedSet(seeds, flips)
