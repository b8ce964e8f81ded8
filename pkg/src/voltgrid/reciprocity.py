"""Reciprocity of point-current injection on discrete conductors.

The experiment: drive current I into node a and out of node b, measure
the potential difference between c and d; then swap the roles of the
pairs.  For symmetric conductivity tensors the two measurements agree.
The quantitative version compares

    lhs = phi2(a) - phi2(b) - [phi1(c) - phi1(d)]

(phi1 driven at (a, b) with sources scaled by measured flux coefficients,
phi2 at (c, d)) against a right-hand side built from Green values and the
same coefficients.  On a conservative discretization every flux
coefficient equals the enclosed unit load exactly, so both sides vanish
at solver tolerance; the machinery still measures everything rather than
assuming it.

Driven potentials follow the injection orientation (see measures): they
dip at the inflow node, and the outward current through a surface is the
negated divergence-flux of the operator module.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .green import GreenColumn, green_column
from .grid import Grid, NodeRef
from .measures import combine, dirac, injection_rhs
from .operator import DiscreteOperator, FluxSurface, box_surface, flux_through_surface
from .solver import Potential, solve_dirichlet

RECIPROCITY_TOL = 1e-12
ALPHA_FLOOR = 1e-12  # guard against division by a vanishing coefficient
DEFAULT_SURFACE_RADIUS = 2


@dataclass(frozen=True)
class InjectionSpec:
    """Four distinct interior nodes and the drive current.

    Surface boxes of the given radius (in cells) around the four points
    must stay interior and pairwise disjoint, so each box encloses
    exactly one charge.
    """

    points: tuple[NodeRef, NodeRef, NodeRef, NodeRef]
    current: float = 1.0
    surface_radius: int = DEFAULT_SURFACE_RADIUS

    def __post_init__(self):
        if len(self.points) != 4:
            raise ValidationError("need exactly four points (a, b, c, d)")
        if len({p.indices for p in self.points}) != 4:
            raise ValidationError("injection points must be pairwise distinct")
        if not np.isfinite(self.current) or self.current == 0.0:
            raise ValidationError(f"current must be finite and nonzero, got {self.current}")
        if self.surface_radius < 1:
            raise ValidationError("surface radius must be >= 1")
        for p, q in ((0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)):
            a, b = self.points[p], self.points[q]
            gap = max(abs(i - j) for i, j in zip(a.indices, b.indices))
            if gap <= 2 * self.surface_radius:
                raise ValidationError(
                    f"surface boxes of radius {self.surface_radius} around "
                    f"{a.indices} and {b.indices} overlap"
                )

    def surfaces(self, grid: Grid) -> list[FluxSurface]:
        return [box_surface(grid, p, self.surface_radius) for p in self.points]


@dataclass
class ReciprocityReport:
    alpha: list[float]
    lhs: float
    rhs: float
    g_ac: float
    g_bd: float
    currents: dict[str, float]
    residuals: dict[str, float]
    verdict: bool
    tolerances: dict[str, float] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "alpha": [float(a) for a in self.alpha],
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "g_ac": float(self.g_ac),
            "g_bd": float(self.g_bd),
            "currents": {k: float(v) for k, v in self.currents.items()},
            "residuals": {k: float(v) for k, v in self.residuals.items()},
            "verdict": bool(self.verdict),
            "tolerances": {k: float(v) for k, v in self.tolerances.items()},
        }


def surface_current(op: DiscreteOperator, potential, surface: FluxSurface) -> float:
    """Outward current of a driven potential through a box surface.

    Sums conductance times (outside minus inside) potential over crossing
    edges, mirroring the surface integral of the conormal derivative.  For
    a potential driven by injection_rhs this returns +I around the inflow
    node; it is the negation of the divergence-oriented flux.
    """
    return -flux_through_surface(op, potential, surface)


def flux_coefficient(
    op: DiscreteOperator,
    point: NodeRef,
    radius: int = DEFAULT_SURFACE_RADIUS,
    tol: float = RECIPROCITY_TOL,
) -> float:
    """Current through a box around `point` for a unit source there.

    By the discrete divergence theorem this equals the enclosed load, so
    the value is 1 up to solver residual for any admissible radius; it is
    measured, not assumed, and reports record it.
    """
    surface = box_surface(op.grid, point, radius)
    col = green_column(op, point, tol=tol)
    return flux_through_surface(op, col.potential, surface)


def _column_flux(op: DiscreteOperator, col: GreenColumn, surface: FluxSurface) -> float:
    return flux_through_surface(op, col.potential, surface)


def two_point_potential(
    op: DiscreteOperator,
    a: NodeRef,
    b: NodeRef,
    current: float,
    radius: int = DEFAULT_SURFACE_RADIUS,
    tol: float = RECIPROCITY_TOL,
):
    """Grounded potential for injection of `current` at a, extraction at b.

    Built by superposition of the two unit-source responses, each scaled
    by current over its measured flux coefficient.  Solving the scaled
    two-charge problem directly gives the same field up to combined
    solver tolerances (asserted in tests).

    Returns (Potential, coeff_a, coeff_b).
    """
    if a == b:
        raise ValidationError("injection and extraction nodes must differ")
    grid = op.grid
    col_a = green_column(op, a, tol=tol)
    col_b = green_column(op, b, tol=tol)
    surf_a = box_surface(grid, a, radius)
    surf_b = box_surface(grid, b, radius)
    coeff_a = _column_flux(op, col_a, surf_a)
    coeff_b = _column_flux(op, col_b, surf_b)
    for name, coeff in (("a", coeff_a), ("b", coeff_b)):
        if abs(coeff) < ALPHA_FLOOR:
            raise ValidationError(
                f"flux coefficient at point {name} is below {ALPHA_FLOOR:g}; "
                "cannot scale the source"
            )
    # Injection orientation: the unit-source response enters negated.
    values = -(current / coeff_a) * col_a.potential.values + (
        current / coeff_b
    ) * col_b.potential.values
    return Potential(grid, values), coeff_a, coeff_b


def verify_injection(
    op: DiscreteOperator,
    potential,
    a: NodeRef,
    b: NodeRef,
    radius: int = DEFAULT_SURFACE_RADIUS,
) -> tuple[float, float]:
    """Outward currents through boxes around the inflow and outflow nodes.

    For a two-point drive of strength I the pair is (+I, -I) up to solver
    residual; a box around an uncharged region carries zero.
    """
    grid = op.grid
    return (
        surface_current(op, potential, box_surface(grid, a, radius)),
        surface_current(op, potential, box_surface(grid, b, radius)),
    )


def _driven_pair(op, a, b, w_a, w_b, tol):
    """Solve the injection problem with charges w_a at a, w_b at b."""
    m = combine(dirac(op.grid, a, w_a), dirac(op.grid, b, w_b))
    return solve_dirichlet(op, injection_rhs(m), tol=tol)


def reciprocity_defect(
    op: DiscreteOperator, spec: InjectionSpec, tol: float = RECIPROCITY_TOL
) -> ReciprocityReport:
    """Full reciprocity measurement for four points.

    Solves the two driven problems with flux-coefficient scaling, forms
    lhs and the Green-value rhs, and records currents, coefficients and
    residuals.  The verdict asserts the reciprocity law: when the
    coefficient pairs match (they always do here, all equal 1 up to
    solver residual), lhs must vanish at the combined tolerance scale.
    """
    grid = op.grid
    a, b, c, d = spec.points
    current = spec.current
    cols = {name: green_column(op, p, tol=tol) for name, p in zip("abcd", spec.points)}
    surfaces = dict(zip("abcd", spec.surfaces(grid)))
    coeff = {name: _column_flux(op, cols[name], surfaces[name]) for name in "abcd"}
    for name, value in coeff.items():
        if abs(value) < ALPHA_FLOOR:
            raise ValidationError(
                f"flux coefficient at point {name} is below {ALPHA_FLOOR:g}"
            )

    phi1 = _driven_pair(op, a, b, current / coeff["a"], -current / coeff["b"], tol)
    phi2 = _driven_pair(op, c, d, current / coeff["c"], -current / coeff["d"], tol)

    lhs = (
        phi2.potential.value_at(a)
        - phi2.potential.value_at(b)
        - (phi1.potential.value_at(c) - phi1.potential.value_at(d))
    )
    g_ac = cols["c"].value_at(a)
    g_bd = cols["d"].value_at(b)
    rhs = current * (1.0 / coeff["c"] - 1.0 / coeff["a"]) * g_ac - current * (
        1.0 / coeff["d"] - 1.0 / coeff["b"]
    ) * g_bd

    in1, out1 = verify_injection(op, phi1.potential, a, b, spec.surface_radius)
    in2, out2 = verify_injection(op, phi2.potential, c, d, spec.surface_radius)

    g_scale = max(float(np.abs(cols[n].potential.values).max()) for n in "abcd")
    defect_tol = 50.0 * tol * max(g_scale * abs(current), 1.0)
    coeff_values = [coeff[n] for n in "abcd"]
    pairs_match = (
        abs(coeff["c"] - coeff["a"]) <= defect_tol and abs(coeff["d"] - coeff["b"]) <= defect_tol
    )
    # Law: matching coefficient pairs force the measurement swap to agree.
    verdict = abs(lhs - rhs) <= defect_tol and (not pairs_match or abs(lhs) <= defect_tol)

    return ReciprocityReport(
        alpha=coeff_values,
        lhs=float(lhs),
        rhs=float(rhs),
        g_ac=float(g_ac),
        g_bd=float(g_bd),
        currents={
            "phi1_in": in1,
            "phi1_out": out1,
            "phi2_in": in2,
            "phi2_out": out2,
        },
        residuals={
            **{f"column_{n}": cols[n].residual for n in "abcd"},
            "phi1": phi1.residual,
            "phi2": phi2.residual,
        },
        verdict=bool(verdict),
        tolerances={"defect": defect_tol, "lhs": defect_tol, "alpha_match": defect_tol},
    )


def unit_strength_reciprocity(
    op: DiscreteOperator, spec: InjectionSpec, tol: float = RECIPROCITY_TOL
) -> ReciprocityReport:
    """Reciprocity with plain unit sources, no coefficient scaling.

    The swap identity phi2(a) - phi2(b) = phi1(c) - phi1(d) is a direct
    consequence of Green symmetry, so lhs must vanish at solver scale;
    the injected currents are recorded (discretely they equal the loads
    exactly, so no continuum contrast survives the grid).
    """
    grid = op.grid
    a, b, c, d = spec.points
    phi1 = _driven_pair(op, a, b, 1.0, -1.0, tol)
    phi2 = _driven_pair(op, c, d, 1.0, -1.0, tol)

    lhs = (
        phi2.potential.value_at(a)
        - phi2.potential.value_at(b)
        - (phi1.potential.value_at(c) - phi1.potential.value_at(d))
    )
    cols = {name: green_column(op, p, tol=tol) for name, p in zip("abcd", spec.points)}
    surfaces = dict(zip("abcd", spec.surfaces(grid)))
    coeff = [_column_flux(op, cols[n], surfaces[n]) for n in "abcd"]
    in1, out1 = verify_injection(op, phi1.potential, a, b, spec.surface_radius)
    in2, out2 = verify_injection(op, phi2.potential, c, d, spec.surface_radius)

    g_scale = max(float(np.abs(cols[n].potential.values).max()) for n in "abcd")
    lhs_tol = 50.0 * tol * max(g_scale, 1.0)

    return ReciprocityReport(
        alpha=coeff,
        lhs=float(lhs),
        rhs=0.0,
        g_ac=cols["c"].value_at(a),
        g_bd=cols["d"].value_at(b),
        currents={
            "phi1_in": in1,
            "phi1_out": out1,
            "phi2_in": in2,
            "phi2_out": out2,
        },
        residuals={
            **{f"column_{n}": cols[n].residual for n in "abcd"},
            "phi1": phi1.residual,
            "phi2": phi2.residual,
        },
        verdict=bool(abs(lhs) <= lhs_tol),
        tolerances={"lhs": lhs_tol},
    )
