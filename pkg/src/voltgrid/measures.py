"""Point-charge measures and their load vectors.

A measure is a finite list of (node, weight) charges on interior nodes.
Because operator rows are current balances, to_rhs is trivial: the load
at a node is the total charge weight there, in amperes.  A charge is
placed with its full weight on a single node, nothing is spread; that
keeps surface-flux bookkeeping exact.

Sign conventions live here.  The assembled operator is the positive
definite form (unit load at y produces the nonnegative unit-source
response), while driven conduction problems follow the opposite
orientation: injecting +I at a node means the potential dips there and
the outward current through any enclosing surface is +I.  injection_rhs
produces the right-hand side realizing that convention, so solver and
operator stay sign-agnostic.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import Grid, NodeRef


@dataclass
class MeasureData:
    grid: Grid
    charges: tuple[tuple[NodeRef, float], ...]  # distinct nodes; zero weights kept


def dirac(grid: Grid, point, weight: float) -> MeasureData:
    """Single point charge at the interior node nearest to `point`.

    `point` is a coordinate sequence; an already-resolved NodeRef is
    accepted too.  Weight zero is legal and represents the zero measure
    pinned at a location.
    """
    if isinstance(point, NodeRef):
        node = point
        if not grid.is_interior(node):
            raise ValidationError(f"charge node {node.indices} is not interior")
    else:
        node = grid.nearest_node(point)
    weight = float(weight)
    if not np.isfinite(weight):
        raise ValidationError(f"charge weight must be finite, got {weight}")
    return MeasureData(grid, ((node, weight),))


def combine(m1: MeasureData, m2: MeasureData, c1: float = 1.0, c2: float = 1.0) -> MeasureData:
    """Scaled sum c1 * m1 + c2 * m2 on a common grid.

    Charge lists concatenate with scaled weights; co-located charges
    merge by addition.  Exact cancellations stay in the list as charges
    of weight zero (they load nothing).
    """
    if m1.grid != m2.grid:
        raise ValidationError("measures live on different grids")
    for c in (c1, c2):
        if not np.isfinite(c):
            raise ValidationError(f"scale factor must be finite, got {c}")
    merged: dict[NodeRef, float] = {}
    for m, c in ((m1, c1), (m2, c2)):
        for node, w in m.charges:
            merged[node] = merged.get(node, 0.0) + c * w
    return MeasureData(m1.grid, tuple(merged.items()))


def to_rhs(measure: MeasureData) -> np.ndarray:
    """Interior load vector: entry equals the total charge weight at that
    node, zero elsewhere.  Linear in the measure by construction."""
    grid = measure.grid
    rhs = np.zeros(grid.num_interior)
    interior_index = grid.interior_index()
    for node, w in measure.charges:
        rhs[interior_index[node.linear]] += w
    return rhs


def injection_rhs(measure: MeasureData) -> np.ndarray:
    """Right-hand side of the positive definite system whose solution is
    the grounded potential driven by injecting the measure's currents."""
    return -to_rhs(measure)


def total_weight(measure: MeasureData) -> float:
    return float(sum(w for _, w in measure.charges))


def total_variation(measure: MeasureData) -> float:
    return float(sum(abs(w) for _, w in measure.charges))
