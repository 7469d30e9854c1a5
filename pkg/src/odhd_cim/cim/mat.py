"""
Functional model of the CiM mat and the traces of its in-memory operations.

MatState keeps only the rows that have been written; an unwritten row reads
as blank (zeros). Every cim_* operation computes its data result through the
same row-level steps the hardware takes and returns the matching Trace.
The *_trace builders produce those traces without touching any state, so
the simulator can price whole workloads without materializing them.

Permutation works per destination segment. Each destination row is
assembled from runs of source elements:

  - a run already in place (whole-PE block rotation) is a free index remap
  - a run from the local PE that moves right is an in-PE shift (PERMUTE)
  - any other run is a pair: source PE -> register A/B -> destination PE

Pairs go in two rounds (even, then odd destination segments), two per step
since the mat has two registers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Sequence

import numpy as np

from ..detector.seeds import SeedSet
from ..errors import InvalidArgumentError, LayoutError
from ..hdc import HV_DTYPE
from .costs import MatDesign, Op
from .layout import SPARE_ROWS, LayoutPlan, RowRef
from .trace import Event, Phase, Trace

SHIFTER_BITS = 3  # widest single in-row shift


class MatState:
    """Sparse row storage for a P x Q grid of M x N PEs."""

    def __init__(self, design: MatDesign, dtype=HV_DTYPE):
        self.design = design
        self.dtype = np.dtype(dtype)
        self._rows: dict[tuple[int, int], np.ndarray] = {}
        self._sealed: set[tuple[int, int]] = set()

    @property
    def blank(self) -> np.ndarray:
        return np.zeros(self.design.N, dtype=self.dtype)

    def _check(self, pe: int, row: int):
        if not 0 <= pe < self.design.pe_count:
            raise LayoutError(f"PE {pe} outside [0, {self.design.pe_count})")
        if not 0 <= row < self.design.M:
            raise LayoutError(f"row {row} outside [0, {self.design.M})")

    def read(self, pe: int, row: int) -> np.ndarray:
        self._check(pe, row)
        stored = self._rows.get((pe, row))
        return self.blank if stored is None else stored.copy()

    def write(self, pe: int, row: int, values: np.ndarray):
        self._check(pe, row)
        if (pe, row) in self._sealed:
            raise LayoutError(f"row {row} of PE {pe} is read-only")
        values = np.asarray(values, dtype=self.dtype)
        if values.shape != (self.design.N,):
            raise LayoutError(f"row write needs {self.design.N} values (got shape {values.shape})")
        self._rows[(pe, row)] = values.copy()

    def store(self, ref: RowRef, values) -> None:
        values = np.asarray(values, dtype=self.dtype).reshape(-1)
        N = self.design.N
        if values.shape[0] != ref.dims:
            raise InvalidArgumentError(f"row holds {ref.dims} elements (got {values.shape[0]})")
        if len(ref.pes) * N < ref.dims:
            raise LayoutError(f"{len(ref.pes)} PEs of {N} columns cannot hold {ref.dims} elements")
        for j, pe in enumerate(ref.pes):
            chunk = self.blank
            part = values[j * N:(j + 1) * N]
            chunk[:part.shape[0]] = part
            self.write(pe, ref.row, chunk)

    def load(self, ref: RowRef) -> np.ndarray:
        return np.concatenate([self.read(pe, ref.row) for pe in ref.pes])[:ref.dims]

    def seal(self, ref: RowRef):
        self._sealed.update((pe, ref.row) for pe in ref.pes)

    def is_sealed(self, ref: RowRef) -> bool:
        return all((pe, ref.row) in self._sealed for pe in ref.pes)


def load_seeds(state: MatState, plan: LayoutPlan, seeds: SeedSet):
    """Write the seed segment and make it read-only."""
    if seeds.k != plan.k or seeds.dims != plan.dims:
        raise LayoutError(f"plan is for k={plan.k}, D={plan.dims}; seeds are k={seeds.k}, D={seeds.dims}")
    for level in range(1, seeds.k + 1):
        ref = plan.seed_row(level)
        state.store(ref, seeds.seeds[level - 1])
        state.seal(ref)


def _require_aligned(rows: Sequence[RowRef]):
    first = rows[0]
    for ref in rows[1:]:
        if not ref.aligned_with(first):
            raise LayoutError(
                f"rows are not column-aligned: PEs {ref.pes[:1]}.. dims {ref.dims} "
                f"vs PEs {first.pes[:1]}.. dims {first.dims}"
            )


def _spare_rows(state: MatState, ref: RowRef) -> tuple[int, int, int]:
    first = state.design.M - SPARE_ROWS
    if ref.row >= first:
        raise LayoutError(
            f"permutation of row {ref.row} needs {SPARE_ROWS} free spare rows "
            f"below it; PEs have only M={state.design.M} rows"
        )
    return first, first + 1, first + 2


# ============================================================================
# Permutation
# ============================================================================

class RunKind(Enum):
    FREE = "free"    # block rotation, index remap only
    LOCAL = "local"  # in-PE shift
    PAIR = "pair"    # through register A/B


@dataclass(frozen=True)
class Run:
    dst_seg: int
    src_seg: int
    src_off: int
    dst_off: int
    length: int
    kind: RunKind


def permutation_runs(dims: int, cols: int, shift: int) -> list[Run]:
    """Source runs that assemble each destination segment of a right rotation."""
    if dims < 1 or cols < 1:
        raise InvalidArgumentError(f"need dims >= 1 and cols >= 1 (got {dims}, {cols})")
    if shift < 0:
        raise InvalidArgumentError(f"shift must be >= 0 (got {shift})")
    s = shift % dims
    if s == 0:
        return []
    span = -(-dims // cols)
    block = s // cols if dims % cols == 0 else 0

    runs = []
    for j in range(span):
        start, end = j * cols, min((j + 1) * cols, dims)
        local = (j - block) % span
        p = start
        while p < end:
            src = (p - s) % dims
            src_seg, src_off = divmod(src, cols)
            src_end = min((src_seg + 1) * cols, dims)
            length = min(end - p, src_end - src)
            dst_off = p - start
            delta = dst_off - src_off
            if src_seg == local and delta == 0:
                kind = RunKind.FREE
            elif src_seg == local and delta > 0:
                kind = RunKind.LOCAL
            else:
                kind = RunKind.PAIR
            runs.append(Run(j, src_seg, src_off, dst_off, length, kind))
            p += length
    return runs


def extra_shifts(dims: int, cols: int, shift: int) -> int:
    """Shift events beyond the first 3-bit step, per moved run."""
    residual = (shift % dims) % cols
    return max(0, math.ceil(residual / SHIFTER_BITS) - 1)


def pair_events(pe: int, phase: Phase, extra: int = 0) -> list[Event]:
    """One source-run -> destination-PE transfer, charged to the destination PE."""
    return [
        Event(Op.PERMUTE, pe, 1, phase),
        Event(Op.PE_TO_REG, pe, 1, phase),
        Event(Op.REG_TO_PE, pe, 1, phase),
        Event(Op.SHIFT, pe, extra, phase),
    ]


def _local_events(pe: int, phase: Phase, extra: int) -> list[Event]:
    return [Event(Op.PERMUTE, pe, 1, phase), Event(Op.SHIFT, pe, extra, phase)]


def permute_trace(
    pes: Sequence[int], dims: int, cols: int, shift: int, phase: Phase = Phase.PERMUTATION,
) -> Trace:
    runs = permutation_runs(dims, cols, shift)
    extra = extra_shifts(dims, cols, shift)
    pairs: tuple[list[int], list[int]] = ([], [])
    local: tuple[list[int], list[int]] = ([], [])
    for run in runs:
        pe = pes[run.dst_seg]
        if run.kind is RunKind.PAIR:
            pairs[run.dst_seg % 2].append(pe)
        elif run.kind is RunKind.LOCAL:
            local[run.dst_seg % 2].append(pe)

    trace = Trace()
    for parity in (0, 1):
        steps = [pairs[parity][i:i + 2] for i in range(0, len(pairs[parity]), 2)]
        # In-PE shifts run on PEs that are not destinations in this round
        idle = local[1 - parity]
        if idle and not steps:
            steps = [[]]
        for i, chunk in enumerate(steps):
            events = [e for pe in chunk for e in pair_events(pe, phase, extra)]
            if i == 0:
                events += [e for pe in idle for e in _local_events(pe, phase, extra)]
            trace.add_step(events)
    return trace


def cim_permute(
    state: MatState, ref: RowRef, shift: int, phase: Phase = Phase.PERMUTATION,
) -> tuple[RowRef, Trace]:
    """
    Rotate the row right by `shift` into spare row 3 of the same PEs.

    Source rows are only read. Each run is masked (AND), shifted into place
    on spare row 1 (in-PE) or spare row 2 (via register), then ORed into
    spare row 3.
    """
    if len(ref.pes) * state.design.N < ref.dims:
        raise LayoutError(f"{len(ref.pes)} PEs cannot hold {ref.dims} elements")
    runs = permutation_runs(ref.dims, state.design.N, shift)
    if not runs:
        return ref, Trace()
    in_pe_row, from_reg_row, result_row = _spare_rows(state, ref)
    N = state.design.N

    for pe in ref.pes:
        state.write(pe, result_row, state.blank)
    for run in runs:
        src = state.read(ref.pes[run.src_seg], ref.row)
        mask = np.zeros(N, dtype=bool)
        mask[run.src_off:run.src_off + run.length] = True
        selected = np.where(mask, src, state.blank)
        delta = run.dst_off - run.src_off
        moved = np.roll(selected, delta)
        dst_pe = ref.pes[run.dst_seg]
        state.write(dst_pe, from_reg_row if run.kind is RunKind.PAIR else in_pe_row, moved)
        acc = state.read(dst_pe, result_row)
        state.write(dst_pe, result_row, np.where(np.roll(mask, delta), moved, acc))

    result = RowRef(ref.pes, result_row, ref.dims)
    return result, permute_trace(ref.pes, ref.dims, N, shift, phase)


# ============================================================================
# Bundling, dot product and shift division
# ============================================================================

def bundle_trace(pes: Sequence[int], rows: int, phase: Phase = Phase.BUNDLING) -> Trace:
    """A lone row is copied (WRITE); otherwise rows - 1 ADD steps."""
    if rows < 1:
        raise InvalidArgumentError(f"bundling needs at least one row (got {rows})")
    if rows == 1:
        return Trace([[Event(Op.WRITE, pe, 1, phase) for pe in pes]])
    return Trace([[Event(Op.ADD, pe, rows - 1, phase) for pe in pes]])


def cim_bundle(
    state: MatState, rows: Sequence[RowRef], out: RowRef, phase: Phase = Phase.BUNDLING,
) -> tuple[RowRef, Trace]:
    """Element-wise sum of aligned rows written to `out`."""
    rows = list(rows)
    if not rows:
        raise InvalidArgumentError("bundling needs at least one row")
    _require_aligned(rows + [out])
    for pe in out.pes:
        acc = state.read(pe, rows[0].row)
        for ref in rows[1:]:
            acc = acc + state.read(pe, ref.row)
        state.write(pe, out.row, acc)
    return out, bundle_trace(out.pes, len(rows), phase)


def reduction_levels(width: int) -> int:
    """ceil(log2(width)) pairwise stages, 0 for width 1."""
    return (width - 1).bit_length()


def transfer_events(pe: int, phase: Phase) -> list[Event]:
    return [Event(Op.PE_TO_REG, pe, 1, phase), Event(Op.REG_TO_PE, pe, 1, phase)]


def dot_trace(pes: Sequence[int], cols: int, phase: Phase = Phase.REDUCTION) -> Trace:
    """
    Pointwise MULT, an in-row shift-add pop-count tree, then a cross-PE tree
    whose receivers ADD a partial sum moved through the registers.
    """
    trace = Trace([[Event(Op.MULT, pe, 1, phase) for pe in pes]])
    for _ in range(reduction_levels(cols)):
        trace.add_step(e for pe in pes for e in (Event(Op.SHIFT, pe, 1, phase), Event(Op.ADD, pe, 1, phase)))
    active = list(pes)
    while len(active) > 1:
        receivers = active[0::2]
        senders = active[1::2]
        events = []
        for recv, _ in zip(receivers, senders):
            events.append(Event(Op.ADD, recv, 1, phase))
            events += transfer_events(recv, phase)
        trace.add_step(events)
        active = receivers
    return trace


def cim_dot(
    state: MatState, a: RowRef, b: RowRef, phase: Phase = Phase.REDUCTION,
) -> tuple[int, Trace]:
    _require_aligned([a, b])
    value = int(np.dot(state.load(a).astype(HV_DTYPE), state.load(b).astype(HV_DTYPE)))
    return value, dot_trace(a.pes, state.design.N, phase)


def shift_divide_trace(pes: Sequence[int], power: int, phase: Phase = Phase.REDUCTION) -> Trace:
    if power < 1:
        raise InvalidArgumentError(f"shift power must be >= 1 (got {power})")
    steps = math.ceil(power / SHIFTER_BITS)
    return Trace([[Event(Op.SHIFT, pe, 1, phase) for pe in pes] for _ in range(steps)])


def cim_shift_divide(
    state: MatState,
    ref: RowRef,
    power: int,
    out: RowRef | None = None,
    phase: Phase = Phase.REDUCTION,
) -> tuple[RowRef, Trace]:
    """Arithmetic right shift by `power` bits (floor division by 2**power)."""
    trace = shift_divide_trace(ref.pes, power, phase)
    out = out or ref
    _require_aligned([ref, out])
    for pe in ref.pes:
        state.write(pe, out.row, np.right_shift(state.read(pe, ref.row), power))
    return out, trace


def divide_by(
    state: MatState, ref: RowRef, divisor: int, out: RowRef | None = None,
) -> tuple[RowRef, Trace]:
    if divisor < 2 or divisor & (divisor - 1):
        raise InvalidArgumentError(f"in-memory division needs a power-of-two divisor >= 2 (got {divisor})")
    return cim_shift_divide(state, ref, divisor.bit_length() - 1, out)


# ============================================================================
# Encoding
# ============================================================================

def encode_trace(pes: Sequence[int], dims: int, cols: int, features: int, store: bool) -> Trace:
    """
    Horner-form encoding of one sample: copy the last feature's seed, then
    for each remaining feature rotate the accumulator by one and ADD the
    seed. `store` appends the WRITE into the bundle segment.
    """
    if features < 1:
        raise InvalidArgumentError(f"encoding needs at least one feature (got {features})")
    step = permute_trace(pes, dims, cols, 1) + bundle_trace(pes, 2)
    trace = bundle_trace(pes, 1) + step.repeated(features - 1)
    if store:
        trace.extend(bundle_trace(pes, 1))
    return trace


def cim_encode(
    state: MatState, plan: LayoutPlan, levels: Sequence[int], out: RowRef | None = None,
) -> tuple[RowRef, Trace]:
    """Encode one level-index vector (1-based) in the work row; optionally store it."""
    levels = [int(v) for v in levels]
    if not levels:
        raise InvalidArgumentError("encoding needs at least one feature")
    work = plan.work_row
    _, trace = cim_bundle(state, [plan.seed_row(levels[-1])], work)
    for level in reversed(levels[:-1]):
        rotated, t = cim_permute(state, work, 1)
        trace.extend(t)
        _, t = cim_bundle(state, [rotated, plan.seed_row(level)], work)
        trace.extend(t)
    if out is not None:
        _, t = cim_bundle(state, [work], out)
        trace.extend(t)
        return out, trace
    return work, trace
