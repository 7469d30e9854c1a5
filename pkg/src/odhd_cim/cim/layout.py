"""
Placement of hypervectors on the mat.

One D-wide hypervector occupies the same row index in `span` = ceil(D/N)
consecutive PEs (row-major PE order). PEs are grouped into
G = floor(P*Q / span) groups that can each hold whole hypervectors.

Group 0 holds the seed segment (rows 0..k-1, read-only once loaded), the
encoding work row and the one-class model row. The bundle segment (one row
per encoded training sample) is spread round-robin over the groups. The
last three rows of every PE are reserved as spare rows for permutation.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

from ..errors import CapacityError, InvalidArgumentError, LayoutError
from .costs import MatDesign

logger = logging.getLogger(__name__)

SPARE_ROWS = 3


@dataclass(frozen=True)
class RowRef:
    """Row `row` across the PEs `pes`, holding `dims` elements in PE order."""

    pes: tuple[int, ...]
    row: int
    dims: int

    def aligned_with(self, other: "RowRef") -> bool:
        return self.pes == other.pes and self.dims == other.dims


@dataclass(frozen=True)
class LayoutPlan:
    design: MatDesign
    k: int
    dims: int
    n_train: int
    span: int
    groups: int

    def group_pes(self, group: int) -> tuple[int, ...]:
        if not 0 <= group < self.groups:
            raise LayoutError(f"group {group} outside [0, {self.groups})")
        start = group * self.span
        return tuple(range(start, start + self.span))

    def row(self, group: int, row: int) -> RowRef:
        return RowRef(self.group_pes(group), row, self.dims)

    def seed_row(self, level: int) -> RowRef:
        """Seed segment row for a 1-based level index."""
        if not 1 <= level <= self.k:
            raise InvalidArgumentError(f"level {level} outside [1, {self.k}]")
        return self.row(0, level - 1)

    @property
    def work_row(self) -> RowRef:
        return self.row(0, self.k)

    @property
    def model_row(self) -> RowRef:
        return self.row(0, self.k + 1)

    def bundle_row(self, index: int) -> RowRef:
        """Row holding encoded training sample `index` (0-based)."""
        if not 0 <= index < self.n_train:
            raise InvalidArgumentError(f"sample index {index} outside [0, {self.n_train})")
        group, slot = index % self.groups, index // self.groups
        first = self.k + 2 if group == 0 else 0
        return self.row(group, first + slot)


def layout(design: MatDesign, k: int, dims: int, n_train: int) -> LayoutPlan:
    if k < 1 or dims < 1 or n_train < 0:
        raise InvalidArgumentError(f"layout needs k >= 1, D >= 1, n >= 0 (got k={k}, D={dims}, n={n_train})")
    needed = k * dims
    if design.capacity < needed:
        raise CapacityError(
            f"capacity P*Q*M*N={design.capacity} < k*D={needed} on design {design.name!r}"
        )
    span = design.span(dims)
    if span > design.pe_count:
        raise CapacityError(
            f"one hypervector needs {span} PEs but design {design.name!r} has P*Q={design.pe_count}"
        )
    groups = design.pe_count // span
    usable = design.M - SPARE_ROWS
    if k + 2 > usable:
        raise LayoutError(
            f"seed segment needs k+2={k + 2} rows but PEs offer M-{SPARE_ROWS}={usable}"
        )
    # Group 0 receives the most bundle rows under round-robin placement
    if -(-n_train // groups) > usable - (k + 2):
        raise LayoutError(
            f"bundle segment for n={n_train} does not fit: {groups} groups of "
            f"{usable} rows with {k + 2} rows reserved in group 0"
        )
    plan = LayoutPlan(design, k, dims, n_train, span, groups)
    logger.debug(
        f"Layout on {design.name}: span={span} PEs, {groups} groups, "
        f"{-(-n_train // groups) if n_train else 0} bundle rows per group"
    )
    return plan
