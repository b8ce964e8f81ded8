"""Error types shared across the package.

Two families matter to callers: invalid inputs (configs, geometry, field
data) and numerical failures of the linear solver.  The CLI maps them to
distinct exit codes.
"""


class ValidationError(ValueError):
    """Raised when inputs violate a documented precondition."""


class SolverFailureError(RuntimeError):
    """Raised when the iterative solver gives up.

    Carries the best relative residual reached so callers can report it.
    """

    def __init__(self, message: str, best_residual: float, iterations: int):
        super().__init__(message)
        self.best_residual = best_residual
        self.iterations = iterations


class NonSPDOperatorError(SolverFailureError):
    """Raised when the operator is detected to be invalid (not positive
    definite) through a non-positive curvature direction."""
