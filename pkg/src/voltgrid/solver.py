"""Dirichlet solves on assembled operators.

The only algorithm is Jacobi-preconditioned conjugate gradients with a
fixed iteration schedule, so repeated solves of the same system produce
bitwise-identical potentials.  Two interchangeable kernels exist: a
compiled Cython extension and a numpy fallback.  Import-time selection
prefers the compiled one; set VOLTGRID_PURE_PYTHON=1 to force the
fallback.

Potentials are full-node vectors with hard zeros on the boundary layer.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .errors import NonSPDOperatorError, SolverFailureError, ValidationError
from .grid import Grid, NodeRef
from .operator import DiscreteOperator

if os.environ.get("VOLTGRID_PURE_PYTHON"):
    from . import _pcg_python as _kernel
else:
    try:
        from . import _pcg as _kernel  # type: ignore[attr-defined]
    except ImportError:
        from . import _pcg_python as _kernel

DEFAULT_TOL = 1e-10
ITERATION_CAP_FACTOR = 20


def active_backend() -> str:
    """Name of the kernel in use: 'cython' or 'python'."""
    return _kernel.BACKEND


@dataclass
class Potential:
    grid: Grid
    values: np.ndarray  # full-node vector, boundary entries are zero

    def value_at(self, node: NodeRef) -> float:
        return float(self.values[node.linear])

    def interior(self) -> np.ndarray:
        return self.values[self.grid.interior_nodes()]


@dataclass
class SolveResult:
    potential: Potential
    residual: float  # relative two-norm of b - A x
    iterations: int


def solve_dirichlet(
    op: DiscreteOperator,
    rhs: np.ndarray,
    tol: float = DEFAULT_TOL,
    max_iterations: int | None = None,
    trace=None,
) -> SolveResult:
    """Solve op.matrix * u = rhs for the interior potential.

    rhs is interior-length, in ampere units (one load per interior node).
    Convergence means ||b - A x||_2 <= tol * ||b||_2; a zero rhs returns
    the zero potential without iterating.  Exceeding the iteration cap
    (default 20x the interior node count) raises SolverFailureError with
    the best residual reached; a direction of non-positive curvature
    raises NonSPDOperatorError, naming the operator invalid.

    `trace`, if given, is a path; one JSON line per solve records the
    convergence data.
    """
    rhs = np.asarray(rhs, dtype=np.float64)
    n = op.grid.num_interior
    if rhs.shape != (n,):
        raise ValidationError(f"rhs must have length {n}, got {rhs.shape}")
    if not np.isfinite(rhs).all():
        raise ValidationError("rhs entries must be finite")
    if not tol > 0:
        raise ValidationError(f"tol must be positive, got {tol}")
    cap = ITERATION_CAP_FACTOR * n if max_iterations is None else int(max_iterations)

    m = op.matrix
    x, residual, iterations, flag = _kernel.pcg(
        np.asarray(m.indptr, dtype=np.int32),
        np.asarray(m.indices, dtype=np.int32),
        np.asarray(m.data, dtype=np.float64),
        op.diagonal,
        rhs,
        float(tol),
        cap,
    )

    if trace is not None:
        with open(trace, "a") as fh:
            fh.write(
                json.dumps(
                    {
                        "n": n,
                        "tol": tol,
                        "iterations": int(iterations),
                        "residual": float(residual),
                        "flag": int(flag),
                        "backend": active_backend(),
                    }
                )
                + "\n"
            )

    if flag == 2:
        raise NonSPDOperatorError(
            "operator is not positive definite: non-positive curvature encountered",
            best_residual=float(residual),
            iterations=int(iterations),
        )
    if flag == 1:
        raise SolverFailureError(
            f"no convergence to tol={tol:g} within {cap} iterations "
            f"(best residual {residual:.3e})",
            best_residual=float(residual),
            iterations=int(iterations),
        )

    full = np.zeros(op.grid.num_full)
    full[op.grid.interior_nodes()] = x
    return SolveResult(
        potential=Potential(op.grid, full),
        residual=float(residual),
        iterations=int(iterations),
    )
