"""Discrete Green's functions: columns, identities, representation.

A Green column g(., y) is the potential response to a unit load at node
y.  Matrix symmetry makes g(x, y) = g(y, x) up to solver tolerance, and
for isotropic (scalar) fields the interior matrix is an M-matrix, so
columns are nonnegative.  Both facts are checked here rather than
assumed.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import ValidationError
from .fields import ConductivityField, mollify
from .grid import NodeRef
from .measures import MeasureData, to_rhs
from .operator import DiscreteOperator, assemble
from .solver import Potential, solve_dirichlet

GREEN_TOL = 1e-12


@dataclass
class GreenColumn:
    source: NodeRef
    potential: Potential
    residual: float

    def value_at(self, node: NodeRef) -> float:
        return self.potential.value_at(node)


@dataclass
class SymmetryReport:
    max_defect: float
    scale: float  # max |g| over the computed columns
    pairs: int
    tol: float


@dataclass
class PositivityReport:
    min_value: float
    verdict: bool
    enforced: bool  # True when the field kind guarantees nonnegativity


def green_column(op: DiscreteOperator, source: NodeRef, tol: float = GREEN_TOL) -> GreenColumn:
    """Solve for the response to a unit load at `source`."""
    grid = op.grid
    if not grid.is_interior(source):
        raise ValidationError(f"source node {source.indices} is not interior")
    rhs = np.zeros(grid.num_interior)
    rhs[grid.interior_index()[source.linear]] = 1.0
    result = solve_dirichlet(op, rhs, tol=tol)
    return GreenColumn(source=source, potential=result.potential, residual=result.residual)


def check_symmetry(
    op: DiscreteOperator, points: Sequence[NodeRef], tol: float = GREEN_TOL
) -> SymmetryReport:
    """Max |g(x, y) - g(y, x)| over all pairs of the given points.

    One solve per point; the defect should sit at the solver-tolerance
    level (asserted in tests as 10x), far below discretization error.
    """
    if len(points) < 2:
        raise ValidationError("need at least two points to compare")
    if len({p.indices for p in points}) != len(points):
        raise ValidationError("symmetry points must be distinct")
    columns = [green_column(op, p, tol=tol) for p in points]
    scale = max(float(np.abs(c.potential.values).max()) for c in columns)
    defect = 0.0
    pairs = 0
    for i in range(len(points)):
        for j in range(i + 1, len(points)):
            gij = columns[j].value_at(points[i])
            gji = columns[i].value_at(points[j])
            defect = max(defect, abs(gij - gji))
            pairs += 1
    return SymmetryReport(max_defect=defect, scale=scale, pairs=pairs, tol=tol)


def is_isotropic(field: ConductivityField) -> bool:
    """True when every off-diagonal tensor entry vanishes."""
    d = field.grid.dim
    for i in range(d):
        for j in range(i + 1, d):
            if np.any(field.entry(i, j) != 0.0):
                return False
    return True


def check_positivity(column: GreenColumn, isotropic: bool) -> PositivityReport:
    """Nonnegativity of a Green column.

    For isotropic fields the discretization is an M-matrix and the column
    must satisfy min >= -10 * residual scale; for full tensors the sign
    can genuinely break, so the verdict is informational only.
    """
    min_value = float(column.potential.values.min())
    floor = -10.0 * max(column.residual, np.finfo(float).eps)
    return PositivityReport(
        min_value=min_value,
        verdict=min_value >= floor,
        enforced=bool(isotropic),
    )


def represent(op: DiscreteOperator, measure: MeasureData, tol: float = GREEN_TOL) -> Potential:
    """Potential of a charge measure as a weighted sum of Green columns.

    Agrees with directly solving to_rhs(measure) up to combined solver
    tolerances; the direct route is one solve, this one costs a solve per
    charge and exists to exercise the superposition identity.
    """
    if not measure.charges:
        raise ValidationError("measure has no charges")
    if measure.grid != op.grid:
        raise ValidationError("measure lives on a different grid")
    values = np.zeros(op.grid.num_full)
    for node, w in measure.charges:
        values += w * green_column(op, node, tol=tol).potential.values
    return Potential(op.grid, values)


def represent_continuous(
    op: DiscreteOperator, density: np.ndarray, tol: float = GREEN_TOL
) -> Potential:
    """Potential of a per-node density, loaded as density * cell volume.

    The density is given on interior nodes.  Values match the
    quadrature sum over Green columns by matrix symmetry (cross-checked
    in tests at sampled nodes).
    """
    density = np.asarray(density, dtype=np.float64).reshape(-1)
    n = op.grid.num_interior
    if density.size != n:
        raise ValidationError(f"density must have {n} entries, got {density.size}")
    rhs = density * op.grid.cell_volume
    return solve_dirichlet(op, rhs, tol=tol).potential


def smoothing_convergence(
    field: ConductivityField,
    measure: MeasureData,
    widths: Sequence[float],
    tol: float = GREEN_TOL,
) -> list[tuple[float, float]]:
    """Solutions under progressively narrower mollification.

    For each width, assemble the operator for mollify(field, width) and
    solve the measure's load; the table pairs each width with the discrete
    L2 distance to the unsmoothed solution.  Width zero reproduces the
    rough field, hence (deterministic solves) a distance of exactly zero.
    """
    grid = field.grid
    if measure.grid != grid:
        raise ValidationError("measure lives on a different grid")
    rough = solve_dirichlet(assemble(grid, field), to_rhs(measure), tol=tol)
    weight = np.sqrt(grid.cell_volume)
    table = []
    for width in widths:
        smoothed = mollify(field, width)
        sol = solve_dirichlet(assemble(grid, smoothed), to_rhs(measure), tol=tol)
        dist = weight * float(
            np.linalg.norm(sol.potential.values - rough.potential.values)
        )
        table.append((float(width), dist))
    return table
