"""Field generators for stress-testing the reciprocity machinery.

random_spd_field draws a fresh symmetric positive definite tensor per
cell: random rotation, eigenvalues uniform in [lam, lam * anisotropy].
kirchhoff_conductivity manufactures an isotropic field from a nonlinear
heat problem: temperature-dependent conductivity k(u) linearizes under
the substitution w(u) = integral of k, so the solve happens in w and the
temperature is recovered nodewise by inverting the monotone map.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import ValidationError
from .fields import ConductivityField, make_scalar_field, upper_triangle_size, upper_triangle_index
from .grid import Grid
from .operator import assemble, boundary_coupling_load
from .solver import solve_dirichlet

KIRCHHOFF_TOL = 1e-12
_GAUSS_ORDER = 64
# computing the rule is far more expensive than applying it, so do it once
_GAUSS_NODES, _GAUSS_WEIGHTS = np.polynomial.legendre.leggauss(_GAUSS_ORDER)


def random_spd_field(
    grid: Grid, lam: float, anisotropy: float, seed: int
) -> ConductivityField:
    """Seeded per-cell random SPD tensors with eigenvalues in
    [lam, lam * anisotropy].

    anisotropy = 1 short-circuits to the exact scalar field lam * I; the
    declared ellipticity constant is lam in every case.
    """
    if not lam > 0:
        raise ValidationError(f"lam must be positive, got {lam}")
    if not anisotropy >= 1:
        raise ValidationError(f"anisotropy must be >= 1, got {anisotropy}")
    if anisotropy == 1:
        return make_scalar_field(grid, lam)

    rng = np.random.default_rng(seed)
    n = grid.num_cells
    d = grid.dim
    evals = lam * (1.0 + (anisotropy - 1.0) * rng.random((n, d)))

    if d == 1:
        dense = evals[:, :, None]
    else:
        if d == 2:
            theta = rng.random(n) * 2.0 * np.pi
            c, s = np.cos(theta), np.sin(theta)
            rot = np.empty((n, 2, 2))
            rot[:, 0, 0] = c
            rot[:, 0, 1] = -s
            rot[:, 1, 0] = s
            rot[:, 1, 1] = c
        else:
            # Orthogonalized Gaussians; sign-fixing the R factor makes the
            # draw a deterministic function of the seed.
            q, r = np.linalg.qr(rng.standard_normal((n, 3, 3)))
            signs = np.sign(np.einsum("nii->ni", r))
            signs[signs == 0] = 1.0
            rot = q * signs[:, None, :]
        dense = np.einsum("nij,nj,nkj->nik", rot, evals, rot)
        dense = 0.5 * (dense + dense.transpose(0, 2, 1))

    tensors = np.empty((n, upper_triangle_size(d)))
    for i in range(d):
        for j in range(i, d):
            tensors[:, upper_triangle_index(d, i, j)] = dense[:, i, j]
    return ConductivityField(grid, tensors, lam=lam)


@dataclass
class MaterialLaws:
    """Temperature-dependent material data for the Kirchhoff scenario.

    sigma_of_u: electrical conductivity as a function of temperature.
    k_of_u: thermal conductivity (must stay positive for monotonicity).
    u_boundary: one temperature per wall, ordered (axis0 low, axis0 high,
    axis1 low, ...), length 2 * dim.
    """

    sigma_of_u: Callable[[float], float]
    k_of_u: Callable[[float], float]
    u_boundary: tuple[float, ...]


def _gauss_integral(f: Callable[[float], float], upper: float) -> float:
    """Integral of f from 0 to upper by fixed-order Gauss-Legendre."""
    half = 0.5 * upper
    pts = half * (_GAUSS_NODES + 1.0)
    return float(half * np.sum(_GAUSS_WEIGHTS * np.array([f(p) for p in pts])))


def kirchhoff_conductivity(
    grid: Grid, laws: MaterialLaws, tol: float = KIRCHHOFF_TOL
) -> ConductivityField:
    """Conductivity field sigma(u(x)) from a nonlinear heat balance.

    Steps: map the wall temperatures through w = integral of k; solve the
    linear balance for w (identity tensors, per-wall Dirichlet data, wall
    intersections average their walls); invert the map at every node by
    bisection to tolerance `tol` in w; evaluate sigma at cell centers
    using the mean of the surrounding nodes' temperatures.

    Rejects non-positive k or sigma anywhere on the temperature range
    spanned by the walls.
    """
    if len(laws.u_boundary) != 2 * grid.dim:
        raise ValidationError(
            f"need {2 * grid.dim} wall temperatures, got {len(laws.u_boundary)}"
        )
    u_lo = min(laws.u_boundary)
    u_hi = max(laws.u_boundary)
    probe = np.linspace(u_lo, u_hi, 257)
    if any(laws.k_of_u(u) <= 0 for u in probe):
        raise ValidationError("thermal conductivity must stay positive on the wall range")
    if any(laws.sigma_of_u(u) <= 0 for u in probe):
        raise ValidationError("sigma must stay positive on the wall range")

    transform = lambda u: _gauss_integral(laws.k_of_u, u)

    # Per-wall Dirichlet data; nodes on several walls take the average.
    shape = grid.full_shape
    acc = np.zeros(shape)
    cnt = np.zeros(shape)
    for axis in range(grid.dim):
        for side, pos in ((0, 0), (1, shape[axis] - 1)):
            sl = [slice(None)] * grid.dim
            sl[axis] = pos
            acc[tuple(sl)] += laws.u_boundary[2 * axis + side]
            cnt[tuple(sl)] += 1.0
    boundary_u = np.zeros(shape)
    wall = cnt > 0
    boundary_u[wall] = acc[wall] / cnt[wall]
    boundary_w = np.zeros(grid.num_full)
    flat_wall = wall.ravel()
    boundary_w[flat_wall] = [transform(u) for u in boundary_u.ravel()[flat_wall]]

    op = assemble(grid, make_scalar_field(grid, 1.0))
    rhs = boundary_coupling_load(op, boundary_w)
    w_int = solve_dirichlet(op, rhs, tol=tol).potential.interior()
    w_full = boundary_w.copy()
    w_full[grid.interior_nodes()] = w_int

    u_full = np.array([_invert(transform, w, u_lo, u_hi, tol) for w in w_full])

    # Temperature at each cell center: mean over the cell's corner nodes.
    u_grid = u_full.reshape(shape)
    centers = u_grid
    for axis in range(grid.dim):
        lead = [slice(None)] * grid.dim
        lag = [slice(None)] * grid.dim
        lead[axis] = slice(1, None)
        lag[axis] = slice(None, -1)
        centers = 0.5 * (centers[tuple(lead)] + centers[tuple(lag)])
    sigma = np.array([laws.sigma_of_u(u) for u in centers.ravel()])
    return make_scalar_field(grid, sigma)


def _invert(transform: Callable[[float], float], target: float, u_lo: float, u_hi: float, tol: float) -> float:
    """Bisection for transform(u) = target on the wall range.

    The discrete solution obeys the max principle, so the bracket always
    contains the root; a tiny pad absorbs roundoff at the ends.
    """
    pad = 1e-9 * (abs(u_hi - u_lo) + 1.0)
    lo, hi = u_lo - pad, u_hi + pad
    f_lo = transform(lo) - target
    f_hi = transform(hi) - target
    if f_lo > 0 or f_hi < 0:
        raise ValidationError("inversion target escapes the wall range")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        f_mid = transform(mid) - target
        if abs(f_mid) <= tol:
            return mid
        if f_mid < 0:
            lo = mid
        else:
            hi = mid
    raise ValidationError("bisection failed to reach tolerance")


def heat_balance_residual(grid: Grid, laws: MaterialLaws, u_full: np.ndarray) -> float:
    """Max nodal residual of the nonlinear balance for a temperature field.

    Uses secant conductivities (divided differences of the Kirchhoff map)
    on faces, under which the discrete nonlinear balance coincides
    algebraically with the linear balance in w.  Useful as an a
    posteriori check of kirchhoff_conductivity's inversion.
    """
    transform = lambda u: _gauss_integral(laws.k_of_u, u)
    w = np.array([transform(u) for u in u_full])
    op = assemble(grid, make_scalar_field(grid, 1.0))
    lap = op.full_matrix @ w
    return float(np.abs(lap[grid.interior_mask()]).max())
