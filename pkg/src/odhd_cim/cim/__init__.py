"""Functional and cost simulation of the in-memory detector mat."""

from .costs import CostTable, MatDesign, Op, OpCost, load_cost_table, load_design, preset_designs
from .layout import LayoutPlan, RowRef, layout
from .mat import (
    MatState,
    cim_bundle,
    cim_dot,
    cim_encode,
    cim_permute,
    cim_shift_divide,
    divide_by,
    load_seeds,
)
from .report import BreakdownReport, PhaseCost
from .simulate import ModelShape, SweepReport, Workload, simulate_testing, simulate_training, sweep
from .trace import Cost, Event, Phase, Trace, cost_of

__all__ = [
    "BreakdownReport",
    "Cost",
    "CostTable",
    "Event",
    "LayoutPlan",
    "MatDesign",
    "MatState",
    "ModelShape",
    "Op",
    "OpCost",
    "Phase",
    "PhaseCost",
    "RowRef",
    "SweepReport",
    "Trace",
    "Workload",
    "cim_bundle",
    "cim_dot",
    "cim_encode",
    "cim_permute",
    "cim_shift_divide",
    "cost_of",
    "divide_by",
    "layout",
    "load_cost_table",
    "load_design",
    "load_seeds",
    "preset_designs",
    "simulate_testing",
    "simulate_training",
    "sweep",
]
