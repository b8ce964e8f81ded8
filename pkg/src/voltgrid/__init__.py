"""Grounded-grid current injection toolkit.

Finite-volume discretization of anisotropic conduction on rectilinear
grids with point-current sources, plus the verification machinery built
on top of it: discrete Green columns, flux bookkeeping around injection
points, four-point reciprocity checks, closed-form oracles and field
generators.
"""

from .analytic import (
    OneDimConfig,
    RegularPartReport,
    fundamental_3d,
    heaviside,
    phi_1d,
    reciprocity_1d,
    regular_part_check,
)
from .errors import NonSPDOperatorError, SolverFailureError, ValidationError
from .fields import (
    ConductivityField,
    ValidationReport,
    dump_field,
    load_field,
    make_scalar_field,
    mollify,
    per_cell_min_eigenvalue,
    validate_tensor,
)
from .green import (
    GreenColumn,
    PositivityReport,
    SymmetryReport,
    check_positivity,
    check_symmetry,
    green_column,
    is_isotropic,
    represent,
    represent_continuous,
    smoothing_convergence,
)
from .grid import Grid, NodeRef, build_grid
from .measures import (
    MeasureData,
    combine,
    dirac,
    injection_rhs,
    to_rhs,
    total_variation,
    total_weight,
)
from .operator import (
    DiscreteOperator,
    FluxSurface,
    assemble,
    boundary_coupling_load,
    box_surface,
    dump_matrix,
    flux_through_surface,
)
from .reciprocity import (
    DEFAULT_SURFACE_RADIUS,
    InjectionSpec,
    ReciprocityReport,
    flux_coefficient,
    reciprocity_defect,
    surface_current,
    two_point_potential,
    unit_strength_reciprocity,
    verify_injection,
)
from .scenarios import (
    MaterialLaws,
    heat_balance_residual,
    kirchhoff_conductivity,
    random_spd_field,
)
from .solver import DEFAULT_TOL, Potential, SolveResult, active_backend, solve_dirichlet

__version__ = "0.1.0"

__all__ = [
    "ConductivityField",
    "DEFAULT_SURFACE_RADIUS",
    "DEFAULT_TOL",
    "DiscreteOperator",
    "FluxSurface",
    "GreenColumn",
    "Grid",
    "InjectionSpec",
    "MaterialLaws",
    "MeasureData",
    "NodeRef",
    "NonSPDOperatorError",
    "OneDimConfig",
    "Potential",
    "PositivityReport",
    "ReciprocityReport",
    "RegularPartReport",
    "SolveResult",
    "SolverFailureError",
    "SymmetryReport",
    "ValidationError",
    "ValidationReport",
    "active_backend",
    "assemble",
    "boundary_coupling_load",
    "box_surface",
    "build_grid",
    "check_positivity",
    "check_symmetry",
    "combine",
    "dirac",
    "dump_field",
    "dump_matrix",
    "flux_coefficient",
    "flux_through_surface",
    "fundamental_3d",
    "green_column",
    "heat_balance_residual",
    "heaviside",
    "injection_rhs",
    "is_isotropic",
    "kirchhoff_conductivity",
    "load_field",
    "make_scalar_field",
    "mollify",
    "per_cell_min_eigenvalue",
    "phi_1d",
    "random_spd_field",
    "reciprocity_1d",
    "reciprocity_defect",
    "regular_part_check",
    "represent",
    "represent_continuous",
    "smoothing_convergence",
    "solve_dirichlet",
    "surface_current",
    "to_rhs",
    "total_variation",
    "total_weight",
    "two_point_potential",
    "unit_strength_reciprocity",
    "validate_tensor",
    "verify_injection",
]
