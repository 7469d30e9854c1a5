"""
Training and testing cost schedules for the CiM-friendly detector on a mat.

Training (n' = n padded to a power of two, G PE groups):
  - encoding is sample-serial: the mat registers are shared, so one sample
    is encoded at a time and stored into its bundle-segment row
  - bundling, threshold estimation and tuning run G-way across PE groups,
    with log2(G) merge stages between groups
  - a tuning pass with updates scores samples one at a time, since each
    comparison must see the running H_OC

Testing: each query is encoded, scored with one dot product against H_OC
and compared with R, one query after another.

Usage:
    design = load_design("design1")
    table = load_cost_table("design1")
    report = simulate_training(Workload("wbc", 286, 30), ModelShape(), design, table)
    print(report.render_text())
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass
from typing import Sequence

from ..errors import InvalidArgumentError
from .costs import CostTable, MatDesign, Op
from .layout import LayoutPlan, layout
from .mat import (
    dot_trace,
    encode_trace,
    reduction_levels,
    shift_divide_trace,
    transfer_events,
)
from .report import TESTING, TRAINING, BreakdownReport, build_report, format_cost_table
from .trace import Event, Phase, Trace, cost_of

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Workload:
    name: str
    n: int            # training samples before padding
    m: int            # features
    queries: int = 0  # test samples

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.queries < 0:
            raise InvalidArgumentError(
                f"workload {self.name!r} needs n >= 1, m >= 1, queries >= 0 "
                f"(got n={self.n}, m={self.m}, queries={self.queries})"
            )

    @property
    def padded_n(self) -> int:
        return 1 << (self.n - 1).bit_length()

    def to_dict(self) -> dict:
        return {**asdict(self), "padded_n": self.padded_n}


@dataclass(frozen=True)
class ModelShape:
    dims: int = 10_000
    levels: int = 10
    epochs: int = 10
    update_fraction: float = 0.0  # share of samples bundled into H_OC per epoch

    def __post_init__(self):
        if self.dims < 1 or self.levels < 1 or self.epochs < 0:
            raise InvalidArgumentError(
                f"model needs D >= 1, k >= 1, epochs >= 0 "
                f"(got D={self.dims}, k={self.levels}, epochs={self.epochs})"
            )
        if not 0.0 <= self.update_fraction <= 1.0:
            raise InvalidArgumentError(f"update_fraction must be in [0, 1] (got {self.update_fraction})")

    def to_dict(self) -> dict:
        return asdict(self)


# ============================================================================
# Group-parallel building blocks
# ============================================================================

class _Groups:
    """Spreads per-sample unit traces over the active PE groups."""

    def __init__(self, plan: LayoutPlan, samples: int):
        self.plan = plan
        self.samples = samples
        self.active = max(1, min(plan.groups, samples))
        self.pes = plan.group_pes(0)
        self.leader = self.pes[0]

    def per_sample(self, unit: Trace) -> Trace:
        q, rem = divmod(self.samples, self.active)
        span = self.plan.span
        traces = []
        for g in range(self.active):
            count = q + (1 if g < rem else 0)
            if count:
                traces.append(unit.repeated(count).relabeled(lambda pe, off=g * span: pe + off))
        return Trace.parallel(traces)

    def _tree(self, receiver_events) -> Trace:
        trace = Trace()
        active = list(range(self.active))
        while len(active) > 1:
            receivers, senders = active[0::2], active[1::2]
            trace.add_step(e for g, _ in zip(receivers, senders) for e in receiver_events(g))
            active = receivers
        return trace

    def merge_rows(self) -> Trace:
        """Sum one partial row per group into group 0 (copy across, then ADD)."""
        span = self.plan.span
        return self._tree(lambda g: [
            e for pe in range(g * span, (g + 1) * span)
            for e in (Event(Op.WRITE, pe, 1, Phase.REDUCTION), Event(Op.ADD, pe, 1, Phase.REDUCTION))
        ])

    def merge_scalars(self) -> Trace:
        span = self.plan.span
        return self._tree(lambda g: [
            Event(Op.ADD, g * span, 1, Phase.REDUCTION), *transfer_events(g * span, Phase.REDUCTION),
        ])

    def broadcast_row(self) -> Trace:
        """Copy a group-0 row to every active group (doubling each stage)."""
        span = self.plan.span
        trace = Trace()
        have = 1
        while have < self.active:
            new = range(have, min(2 * have, self.active))
            trace.add_step(
                Event(Op.WRITE, pe, 1, Phase.REDUCTION)
                for g in new for pe in range(g * span, (g + 1) * span)
            )
            have *= 2
        return trace

    def broadcast_scalar(self) -> Trace:
        span = self.plan.span
        trace = Trace()
        have = 1
        while have < self.active:
            new = range(have, min(2 * have, self.active))
            trace.add_step(e for g in new for e in transfer_events(g * span, Phase.REDUCTION))
            have *= 2
        return trace


def _scalar_step(pe: int, *ops: Op) -> Trace:
    return Trace([[Event(op, pe, 1, Phase.REDUCTION) for op in ops]])


def _threshold_trace(groups: _Groups, samples: int) -> Trace:
    """Similarity array, mean, MAD and R = mu + 2 * MAD."""
    leader = groups.leader
    power = samples.bit_length() - 1
    divide = shift_divide_trace([leader], power) if power >= 1 else Trace()

    trace = groups.broadcast_row()
    trace.extend(groups.per_sample(dot_trace(groups.pes, groups.plan.design.N)))
    # mean
    trace.extend(groups.per_sample(_scalar_step(leader, Op.ADD)))
    trace.extend(groups.merge_scalars())
    trace.extend(divide)
    trace.extend(groups.broadcast_scalar())
    # MAD: subtract, absolute value (NOT + ADD one), accumulate
    trace.extend(groups.per_sample(_scalar_step(leader, Op.SUB, Op.NOT, Op.ADD, Op.ADD)))
    trace.extend(groups.merge_scalars())
    trace.extend(divide)
    # x2 as a one-bit shift, then add the mean
    trace.extend(_scalar_step(leader, Op.SHIFT, Op.ADD))
    return trace


def _tuning_epoch(groups: _Groups, samples: int, updates: int) -> Trace:
    """
    One fine-tuning pass: every stored sample is re-scored against H_OC and
    compared with R.

    Without updates H_OC is fixed, so scoring runs G-way. With updates each
    score must see the running H_OC: samples are scored one at a time, every
    update bundles the sample into H_OC and rebroadcasts it, and R is
    recomputed at the end of the pass.
    """
    score = dot_trace(groups.pes, groups.plan.design.N)
    score.extend(_scalar_step(groups.leader, Op.SUB))
    if not updates:
        return groups.per_sample(score)

    trace = score.repeated(samples)
    bundle = Trace([[
        e for pe in groups.pes
        for e in (Event(Op.WRITE, pe, 1, Phase.REDUCTION), Event(Op.ADD, pe, 1, Phase.REDUCTION))
    ]])
    bundle.extend(groups.broadcast_row())
    trace.extend(bundle.repeated(updates))
    trace.extend(_threshold_trace(groups, samples))
    return trace


def training_trace(workload: Workload, shape: ModelShape, design: MatDesign) -> Trace:
    samples = workload.padded_n
    plan = layout(design, shape.levels, shape.dims, samples)
    pes = plan.group_pes(0)
    groups = _Groups(plan, samples)

    trace = encode_trace(pes, shape.dims, design.N, workload.m, store=True).repeated(samples)

    # H_OC = sum of encoded rows, one partial sum per group
    trace.extend(groups.per_sample(Trace([[Event(Op.ADD, pe, 1, Phase.REDUCTION) for pe in pes]])))
    trace.extend(groups.merge_rows())
    trace.extend(_threshold_trace(groups, samples))

    updates = math.ceil(shape.update_fraction * samples)
    # A pass without updates leaves H_OC and R as they were, so every later
    # pass would repeat it; the mat stops after the first one.
    passes = shape.epochs if updates else min(shape.epochs, 1)
    for _ in range(passes):
        trace.extend(_tuning_epoch(groups, samples, updates))
    return trace


def testing_trace(workload: Workload, shape: ModelShape, design: MatDesign) -> Trace:
    plan = layout(design, shape.levels, shape.dims, 0)
    pes = plan.group_pes(0)
    unit = encode_trace(pes, shape.dims, design.N, workload.m, store=False)
    unit.extend(dot_trace(pes, design.N, Phase.DETECTION))
    unit.add_step([Event(Op.SUB, pes[0], 1, Phase.DETECTION)])
    return unit.repeated(workload.queries)


# ============================================================================
# Reports
# ============================================================================

def simulate_training(
    workload: Workload, shape: ModelShape, design: MatDesign, table: CostTable,
) -> BreakdownReport:
    cost = cost_of(training_trace(workload, shape, design), table)
    logger.debug(
        f"Training {workload.name} on {design.name}: {cost.latency / 1000:.3f} us, "
        f"{cost.energy / 1000:.3f} uJ"
    )
    return build_report(TRAINING, cost, design, table, workload.to_dict(), shape.to_dict())


def simulate_testing(
    workload: Workload, shape: ModelShape, design: MatDesign, table: CostTable,
) -> BreakdownReport:
    cost = cost_of(testing_trace(workload, shape, design), table)
    logger.debug(
        f"Testing {workload.name} ({workload.queries} queries) on {design.name}: "
        f"{cost.latency / 1000:.3f} us, {cost.energy / 1000:.3f} uJ"
    )
    return build_report(TESTING, cost, design, table, workload.to_dict(), shape.to_dict())


@dataclass(frozen=True)
class SweepEntry:
    design_index: int
    workload: Workload
    training: BreakdownReport
    testing: BreakdownReport


@dataclass(frozen=True)
class SweepReport:
    designs: tuple[MatDesign, ...]
    tables: tuple[CostTable, ...]
    shape: ModelShape
    entries: tuple[SweepEntry, ...]

    def training_totals(self) -> list[tuple[float, float]]:
        """(latency us, energy uJ) of training summed over workloads, per design."""
        totals = [(0.0, 0.0)] * len(self.designs)
        for entry in self.entries:
            lat, en = totals[entry.design_index]
            t = entry.training.total
            totals[entry.design_index] = (lat + t.latency_us, en + t.energy_uj)
        return totals

    def ranking(self, by: str) -> list[int]:
        """Design indices, cheapest first; ties keep listing order."""
        key = {"latency": 0, "energy": 1}[by]
        totals = self.training_totals()
        return sorted(range(len(self.designs)), key=lambda i: (totals[i][key], i))

    def to_dict(self) -> dict:
        totals = self.training_totals()
        designs = []
        for i, (design, table) in enumerate(zip(self.designs, self.tables)):
            designs.append({
                "design": design.to_dict(),
                "cost_table": table.to_dict(),
                "training_total": {"latency_us": totals[i][0], "energy_uj": totals[i][1]},
                "reports": [
                    {
                        "workload": e.workload.to_dict(),
                        "training": e.training.to_dict(),
                        "testing": e.testing.to_dict(),
                    }
                    for e in self.entries if e.design_index == i
                ],
            })
        names = [d.name for d in self.designs]
        return {
            "model": self.shape.to_dict(),
            "designs": designs,
            "rank_by_latency": [names[i] for i in self.ranking("latency")],
            "rank_by_energy": [names[i] for i in self.ranking("energy")],
        }

    def render_text(self) -> str:
        lines = [f"{'Design':<12}{'Train latency (us)':>22}{'Train energy (uJ)':>22}", "-" * 56]
        for design, (lat, en) in zip(self.designs, self.training_totals()):
            lines.append(f"{design.name:<12}{lat:>22.3f}{en:>22.3f}")
        lines.append("")
        for table in self.tables:
            lines.append(format_cost_table(table))
        return "\n".join(lines) + "\n"


def sweep(
    designs: Sequence[MatDesign],
    workloads: Sequence[Workload],
    shape: ModelShape,
    tables: Sequence[CostTable],
) -> SweepReport:
    """Training and testing reports for every (design, workload) pair."""
    if not designs:
        raise InvalidArgumentError("sweep needs at least one design")
    if len(tables) != len(designs):
        raise InvalidArgumentError(f"{len(designs)} designs but {len(tables)} cost tables")
    entries = []
    for i, (design, table) in enumerate(zip(designs, tables)):
        for workload in workloads:
            entries.append(SweepEntry(
                design_index=i,
                workload=workload,
                training=simulate_training(workload, shape, design, table),
                testing=simulate_testing(workload, shape, design, table),
            ))
    return SweepReport(tuple(designs), tuple(tables), shape, tuple(entries))
