"""
Operation traces and their pricing.

A trace is a sequence of steps. Each step holds the events issued together;
events on distinct PEs overlap in time, events on the same PE serialize.

    step latency = max over PEs of sum(count * op latency)
    energy       = sum over all events of count * op energy
"""

from __future__ import annotations

from collections import Counter, defaultdict
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Callable, Iterable

from ..errors import InvalidArgumentError
from .costs import CostTable, Op, OpCost


class Phase(Enum):
    PERMUTATION = "encoding_permutation"
    BUNDLING = "encoding_bundling"
    REDUCTION = "bundling_threshold_tuning"
    DETECTION = "outlier_detection"


@dataclass(frozen=True, slots=True)
class Event:
    op: Op
    pe: int
    count: int = 1
    phase: Phase = Phase.REDUCTION

    def __post_init__(self):
        if self.count < 0:
            raise InvalidArgumentError(f"event count must be >= 0 (got {self.count})")


class Trace:
    """Ordered steps of events. Concatenation is additive in cost."""

    def __init__(self, steps: Iterable[Iterable[Event]] = ()):
        self.steps: list[tuple[Event, ...]] = []
        for events in steps:
            self.add_step(events)

    def add_step(self, events: Iterable[Event]) -> "Trace":
        events = tuple(e for e in events if e.count)
        if events:
            self.steps.append(events)
        return self

    def extend(self, other: "Trace") -> "Trace":
        self.steps.extend(other.steps)
        return self

    def __add__(self, other: "Trace") -> "Trace":
        return Trace().extend(self).extend(other)

    def __len__(self) -> int:
        return len(self.steps)

    def __bool__(self) -> bool:
        return bool(self.steps)

    def repeated(self, times: int) -> "Trace":
        """`times` back-to-back runs of this trace, folded into scaled counts."""
        if times < 0:
            raise InvalidArgumentError(f"repeat count must be >= 0 (got {times})")
        return Trace([replace(e, count=e.count * times) for e in step] for step in self.steps)

    def relabeled(self, pe_map: Callable[[int], int]) -> "Trace":
        return Trace([replace(e, pe=pe_map(e.pe)) for e in step] for step in self.steps)

    @classmethod
    def parallel(cls, traces: Iterable["Trace"]) -> "Trace":
        """Overlay traces that run side by side on disjoint PEs, step by step."""
        merged: list[list[Event]] = []
        for trace in traces:
            for i, step in enumerate(trace.steps):
                if i == len(merged):
                    merged.append([])
                merged[i].extend(step)
        return cls(merged)

    def events(self) -> Iterable[Event]:
        for step in self.steps:
            yield from step

    def op_counts(self, phase: Phase | None = None) -> Counter:
        counts: Counter = Counter()
        for e in self.events():
            if phase is None or e.phase is phase:
                counts[e.op] += e.count
        return counts


@dataclass
class Cost:
    """Priced trace. `breakdown` attributes latency along each step's critical PE."""

    latency: float = 0.0  # ns
    energy: float = 0.0   # nJ
    breakdown: dict[tuple[Phase, Op], OpCost] = field(default_factory=dict)

    def _charge(self, phase: Phase, op: Op, latency: float, energy: float):
        prev = self.breakdown.get((phase, op), OpCost(0.0, 0.0))
        self.breakdown[(phase, op)] = OpCost(prev.latency + latency, prev.energy + energy)

    def __add__(self, other: "Cost") -> "Cost":
        total = Cost(self.latency + other.latency, self.energy + other.energy, dict(self.breakdown))
        for (phase, op), c in other.breakdown.items():
            total._charge(phase, op, c.latency, c.energy)
        return total

    def select(self, phase: Phase, ops: Iterable[Op] | None = None) -> OpCost:
        wanted = set(ops) if ops is not None else None
        latency = energy = 0.0
        for (p, op), c in self.breakdown.items():
            if p is phase and (wanted is None or op in wanted):
                latency += c.latency
                energy += c.energy
        return OpCost(latency, energy)


def cost_of(trace: Trace, table: CostTable) -> Cost:
    """Price a trace; unpriced ops raise ConfigError."""
    cost = Cost()
    prices: dict[Op, OpCost] = {}
    for step in trace.steps:
        per_pe: dict[int, list[tuple[Event, float]]] = defaultdict(list)
        for e in step:
            price = prices.get(e.op)
            if price is None:
                price = prices[e.op] = table.price(e.op)
            per_pe[e.pe].append((e, e.count * price.latency))
            energy = e.count * price.energy
            cost.energy += energy
            cost._charge(e.phase, e.op, 0.0, energy)

        critical = max(sorted(per_pe), key=lambda pe: sum(lat for _, lat in per_pe[pe]))
        for e, lat in per_pe[critical]:
            cost.latency += lat
            cost._charge(e.phase, e.op, lat, 0.0)
    return cost
