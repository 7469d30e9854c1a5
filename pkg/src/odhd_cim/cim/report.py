"""Phase-level latency/energy breakdown reports (JSON and aligned text)."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidArgumentError
from .costs import TABLE_OPS, CostTable, MatDesign, Op, OpCost
from .trace import Cost, Phase

TRAINING = "training"
TESTING = "testing"

REDUCTION_LABELS = {TRAINING: "Bndl+Thr+Tun", TESTING: "Outlier Detection"}
REDUCTION_PHASES = {TRAINING: Phase.REDUCTION, TESTING: Phase.DETECTION}

OP_LABELS = {
    Op.READ: "Read",
    Op.NOT: "NOT",
    Op.AND: "AND",
    Op.OR: "OR",
    Op.MULT: "Mult",
    Op.WRITE: "Write",
    Op.ADD: "Add",
    Op.SUB: "Sub",
    Op.SHIFT: "Shift",
}


@dataclass(frozen=True)
class PhaseCost:
    latency_us: float = 0.0
    energy_uj: float = 0.0

    @classmethod
    def from_ns(cls, cost: OpCost) -> "PhaseCost":
        return cls(cost.latency / 1000.0, cost.energy / 1000.0)

    def __add__(self, other: "PhaseCost") -> "PhaseCost":
        return PhaseCost(self.latency_us + other.latency_us, self.energy_uj + other.energy_uj)

    def to_dict(self) -> dict:
        return {"latency_us": self.latency_us, "energy_uj": self.energy_uj}


def _share(part: float, whole: float) -> float:
    return part / whole if whole else 0.0


@dataclass(frozen=True)
class BreakdownReport:
    kind: str  # "training" or "testing"
    design: MatDesign
    table: CostTable
    workload: dict
    model: dict
    permutation_in_pe: PhaseCost
    permutation_pe_to_reg: PhaseCost
    permutation_reg_to_pe: PhaseCost
    bundling: PhaseCost
    reduction: PhaseCost  # Bndl+Thr+Tun (training) or Outlier Detection (testing)

    @property
    def reduction_label(self) -> str:
        return REDUCTION_LABELS[self.kind]

    @property
    def permutation(self) -> PhaseCost:
        return self.permutation_in_pe + self.permutation_pe_to_reg + self.permutation_reg_to_pe

    @property
    def communication(self) -> PhaseCost:
        return self.permutation_pe_to_reg + self.permutation_reg_to_pe

    @property
    def encoding(self) -> PhaseCost:
        return self.permutation + self.bundling

    @property
    def total(self) -> PhaseCost:
        return self.permutation + self.bundling + self.reduction

    def shares(self) -> dict:
        total, encoding, comm = self.total, self.encoding, self.communication
        return {
            "encoding_latency": _share(encoding.latency_us, total.latency_us),
            "encoding_energy": _share(encoding.energy_uj, total.energy_uj),
            "comm_latency_of_encoding": _share(comm.latency_us, encoding.latency_us),
            "comm_energy_of_encoding": _share(comm.energy_uj, encoding.energy_uj),
        }

    def rows(self) -> list[tuple[str, PhaseCost]]:
        return [
            ("Encoding: Permutation", self.permutation),
            ("  in-PE", self.permutation_in_pe),
            ("  PE->REG", self.permutation_pe_to_reg),
            ("  REG->PE", self.permutation_reg_to_pe),
            ("Encoding: Bundling", self.bundling),
            (self.reduction_label, self.reduction),
            ("Total", self.total),
        ]

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "design": self.design.to_dict(),
            "cost_table": self.table.to_dict(),
            "workload": self.workload,
            "model": self.model,
            "rows": [
                {
                    "phase": "Encoding: Permutation",
                    **self.permutation.to_dict(),
                    "in_pe": self.permutation_in_pe.to_dict(),
                    "pe_to_reg": self.permutation_pe_to_reg.to_dict(),
                    "reg_to_pe": self.permutation_reg_to_pe.to_dict(),
                },
                {"phase": "Encoding: Bundling", **self.bundling.to_dict()},
                {"phase": self.reduction_label, **self.reduction.to_dict()},
                {"phase": "Total", **self.total.to_dict()},
            ],
            "shares": self.shares(),
        }

    def render_text(self) -> str:
        d = self.design
        lines = [
            f"IM-ODHD {self.kind} breakdown: {self.workload.get('name', '?')} on {d.name} "
            f"({d.P}x{d.Q} PEs of {d.M}x{d.N})",
            "",
            format_cost_table(self.table),
            "",
            f"{'Phase':<26}{'Latency (us)':>16}{'Energy (uJ)':>16}",
            "-" * 58,
        ]
        for label, cost in self.rows():
            if label == "Total":
                lines.append("-" * 58)
            lines.append(f"{label:<26}{cost.latency_us:>16.3f}{cost.energy_uj:>16.3f}")
        shares = self.shares()
        lines.append("")
        lines.append(
            f"Encoding share of latency: {shares['encoding_latency']:.1%}; "
            f"communication share of encoding latency: {shares['comm_latency_of_encoding']:.1%}"
        )
        return "\n".join(lines) + "\n"


def format_cost_table(table: CostTable) -> str:
    lines = [f"Per-op costs ({table.name}): latency ns / energy nJ"]
    for op in TABLE_OPS:
        if op in table.entries:
            c = table.entries[op]
            lines.append(f"  {OP_LABELS[op]:<8}{c.latency:>10.2f} /{c.energy:>8.2f}")
        elif op is Op.SUB:
            c = table.price(op)
            lines.append(f"  {'Sub':<8}{c.latency:>10.2f} /{c.energy:>8.2f}  (NOT+Write+Add)")
    p = table.permutation
    lines.append(f"  {'Permut':<8}{p.latency:>10.2f} /{p.energy:>8.2f}")
    lines.append(
        f"  comm share of Permut: {table.comm_time_fraction:.1%} time, "
        f"{table.comm_energy_fraction:.1%} energy"
    )
    return "\n".join(lines)


def build_report(
    kind: str, cost: Cost, design: MatDesign, table: CostTable, workload: dict, model: dict,
) -> BreakdownReport:
    if kind not in REDUCTION_LABELS:
        raise InvalidArgumentError(f"report kind must be {TRAINING!r} or {TESTING!r} (got {kind!r})")
    in_pe_ops = [op for op in Op if op not in (Op.PE_TO_REG, Op.REG_TO_PE)]
    return BreakdownReport(
        kind=kind,
        design=design,
        table=table,
        workload=workload,
        model=model,
        permutation_in_pe=PhaseCost.from_ns(cost.select(Phase.PERMUTATION, in_pe_ops)),
        permutation_pe_to_reg=PhaseCost.from_ns(cost.select(Phase.PERMUTATION, [Op.PE_TO_REG])),
        permutation_reg_to_pe=PhaseCost.from_ns(cost.select(Phase.PERMUTATION, [Op.REG_TO_PE])),
        bundling=PhaseCost.from_ns(cost.select(Phase.BUNDLING)),
        reduction=PhaseCost.from_ns(cost.select(REDUCTION_PHASES[kind])),
    )
