"""Conductivity fields: symmetric tensors attached to grid cells.

Tensors are stored as the upper triangle per cell, row-major over the
entries (1D: a11; 2D: a11, a12, a22; 3D: a11, a12, a13, a22, a23, a33).
Potentials live on nodes; the operator module averages cell tensors onto
edges and corners when assembling.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .grid import Grid

# Relative slack for eigenvalue comparisons.  Tensors rebuilt from
# rotations carry O(eps) asymmetry in their eigenvalues and must still
# pass their own declared bound.
_EIG_SLACK = 1e-12


def upper_triangle_size(dim: int) -> int:
    return dim * (dim + 1) // 2


def upper_triangle_index(dim: int, i: int, j: int) -> int:
    """Column of entry (i, j), i <= j, in the per-cell storage."""
    if i > j:
        i, j = j, i
    # row-major upper triangle: offsets of row i plus (j - i)
    return i * dim - i * (i - 1) // 2 + (j - i)


@dataclass
class ConductivityField:
    grid: Grid
    tensors: np.ndarray  # shape (num_cells, upper_triangle_size(dim))
    lam: float  # declared ellipticity constant (lower eigenvalue bound)

    def __post_init__(self):
        expected = (self.grid.num_cells, upper_triangle_size(self.grid.dim))
        self.tensors = np.asarray(self.tensors, dtype=np.float64)
        if self.tensors.shape != expected:
            raise ValidationError(
                f"tensor array has shape {self.tensors.shape}, expected {expected}"
            )
        if not np.isfinite(self.tensors).all():
            raise ValidationError("tensor entries must be finite")
        if not self.lam > 0:
            raise ValidationError(f"ellipticity constant must be positive, got {self.lam}")

    def entry(self, i: int, j: int) -> np.ndarray:
        """Per-cell values of tensor entry (i, j)."""
        return self.tensors[:, upper_triangle_index(self.grid.dim, i, j)]

    def dense_tensors(self) -> np.ndarray:
        """Full symmetric matrices per cell, shape (num_cells, dim, dim)."""
        d = self.grid.dim
        out = np.empty((self.grid.num_cells, d, d))
        for i in range(d):
            for j in range(i, d):
                col = self.tensors[:, upper_triangle_index(d, i, j)]
                out[:, i, j] = col
                out[:, j, i] = col
        return out


@dataclass
class ValidationReport:
    ok: bool
    min_eigenvalue: float
    failing_cells: np.ndarray  # flat cell indices below the declared bound
    per_cell_min: np.ndarray


def make_scalar_field(grid: Grid, sigma) -> ConductivityField:
    """Isotropic field sigma(x) * identity from a constant or per-cell array.

    The declared ellipticity constant is the minimum of sigma, which is
    exact for scalar data.  Non-positive values are rejected.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    if sigma.ndim == 0:
        sigma = np.full(grid.num_cells, float(sigma))
    else:
        sigma = sigma.reshape(-1)
        if sigma.size != grid.num_cells:
            raise ValidationError(
                f"sigma has {sigma.size} entries, grid has {grid.num_cells} cells"
            )
    if not np.isfinite(sigma).all() or (sigma <= 0).any():
        raise ValidationError("sigma must be finite and strictly positive")
    d = grid.dim
    tensors = np.zeros((grid.num_cells, upper_triangle_size(d)))
    for i in range(d):
        tensors[:, upper_triangle_index(d, i, i)] = sigma
    return ConductivityField(grid, tensors, lam=float(sigma.min()))


def per_cell_min_eigenvalue(field: ConductivityField) -> np.ndarray:
    d = field.grid.dim
    if d == 1:
        return field.entry(0, 0).copy()
    if d == 2:
        a, b, c = field.entry(0, 0), field.entry(0, 1), field.entry(1, 1)
        mean = 0.5 * (a + c)
        radius = np.sqrt(0.25 * (a - c) ** 2 + b**2)
        return mean - radius
    return np.linalg.eigvalsh(field.dense_tensors())[:, 0]


def validate_tensor(field: ConductivityField) -> ValidationReport:
    """Check per-cell ellipticity against the declared constant.

    Symmetry holds structurally (only the upper triangle is stored).  The
    eigenvalue comparison carries a small relative slack so that fields
    assembled from rotations are not rejected for roundoff.
    """
    mins = per_cell_min_eigenvalue(field)
    scale = np.abs(field.tensors).max(axis=1)
    slack = _EIG_SLACK * np.maximum(scale, 1.0)
    failing = np.flatnonzero(mins < field.lam - slack)
    return ValidationReport(
        ok=failing.size == 0,
        min_eigenvalue=float(mins.min()),
        failing_cells=failing,
        per_cell_min=mins,
    )


def _axis_kernel(width: float, h: float) -> np.ndarray:
    """Normalized triangular weights for one axis.

    The half-width in cells is round(width / h); weight of offset k is
    proportional to (half_width + 1 - |k|).  Width zero gives the identity
    kernel.
    """
    if width < 0:
        raise ValidationError(f"mollification width must be >= 0, got {width}")
    half = int(round(width / h))
    if half == 0:
        return np.array([1.0])
    w = half + 1.0 - np.abs(np.arange(-half, half + 1)).astype(np.float64)
    return w / w.sum()


def mollify(field: ConductivityField, width: float) -> ConductivityField:
    """Smooth the field entrywise with a tensor-product triangular kernel.

    Applied axis by axis; weights falling outside the cell range are
    dropped and the remainder renormalized, so every output tensor is a
    convex combination of input tensors.  That keeps symmetry exactly and
    never lowers the minimum eigenvalue below the pre-smoothing minimum.
    """
    grid = field.grid
    if width == 0:
        return field
    data = field.tensors.reshape(grid.cells_shape + (-1,))
    for axis in range(grid.dim):
        kernel = _axis_kernel(width, grid.spacing[axis])
        half = (len(kernel) - 1) // 2
        if half == 0:
            continue
        n = grid.cells_shape[axis]
        moved = np.moveaxis(data, axis, 0)
        out = np.zeros_like(moved)
        norm = np.zeros(n)
        for k in range(-half, half + 1):
            w = kernel[k + half]
            lo, hi = max(0, -k), min(n, n - k)
            out[lo:hi] += w * moved[lo + k : hi + k]
            norm[lo:hi] += w
        out /= norm.reshape((n,) + (1,) * (out.ndim - 1))
        data = np.moveaxis(out, 0, axis)
    return ConductivityField(grid, data.reshape(grid.num_cells, -1), lam=field.lam)


def dump_field(field: ConductivityField, path) -> None:
    """Write the field as CSV: per-axis cell index, then tensor entries."""
    d = field.grid.dim
    names = [f"a_{i + 1}{j + 1}" for i in range(d) for j in range(i, d)]
    header = ",".join([f"cell_{k}" for k in range(d)] + names)
    idx = np.stack(
        np.unravel_index(np.arange(field.grid.num_cells), field.grid.cells_shape), axis=1
    )
    body = np.hstack([idx.astype(np.float64), field.tensors])
    np.savetxt(path, body, delimiter=",", header=header, comments="")


def load_field(grid: Grid, path, lam: float) -> ConductivityField:
    """Read a field written by dump_field; declared lambda is supplied."""
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    d = grid.dim
    expected_cols = d + upper_triangle_size(d)
    if raw.shape[1] != expected_cols:
        raise ValidationError(
            f"field file has {raw.shape[1]} columns, expected {expected_cols}"
        )
    idx = raw[:, :d].astype(np.int64)
    flat = np.ravel_multi_index(idx.T, grid.cells_shape)
    tensors = np.empty((grid.num_cells, upper_triangle_size(d)))
    tensors[flat] = raw[:, d:]
    if np.unique(flat).size != grid.num_cells:
        raise ValidationError("field file does not cover every cell exactly once")
    return ConductivityField(grid, tensors, lam=lam)
