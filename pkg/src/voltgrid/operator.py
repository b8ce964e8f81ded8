"""Flux-balance discretization of -div(A grad u) with Dirichlet walls.

Every interior node gets one row stating that the net current leaving it
equals the load there, in ampere units: rows are never divided by cell
volume.  The stencil has two ingredients:

* Diagonal tensor entries couple axis neighbors through faces.  The face
  transmissivity is the harmonic mean of the a_dd entries of the cells
  touching that edge, times face area over spacing.
* Off-diagonal entries come from the per-cell energy form with
  corner-averaged cell gradients: vol * a_pq * (g_p(u) g_q(v) +
  g_q(u) g_p(v)).  This couples the corner pairs of each cell that differ
  in both involved axes, is symmetric by construction, and vanishes for
  diagonal tensors (classical 5/7-point stencils fall out unchanged).

Both ingredients annihilate constants over the full node set, which makes
the discrete divergence theorem an algebraic identity: for any solution of
op * u = rhs, the flux through a closed surface equals the sum of enclosed
loads, exactly.

The assembled object keeps three views: the interior SPD matrix (what the
solver sees), the full-node matrix with zero row sums, and the coalesced
edge table (node pair + conductance) that flux evaluation walks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError
from .fields import ConductivityField, upper_triangle_index
from .grid import Grid, NodeRef


@dataclass
class DiscreteOperator:
    grid: Grid
    field: ConductivityField
    matrix: sp.csr_matrix  # interior x interior, SPD
    full_matrix: sp.csr_matrix  # all nodes, zero row sums
    edge_p: np.ndarray  # full linear indices, edge_p < edge_q
    edge_q: np.ndarray
    edge_t: np.ndarray  # conductance of the pair; off-diagonal entry is -t

    @property
    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()


@dataclass(frozen=True)
class FluxSurface:
    """Axis-aligned box of interior nodes; flux is measured through the
    dual surface separating the box from the rest of the grid."""

    grid: Grid
    lo: tuple[int, ...]  # inclusive per-axis node index bounds
    hi: tuple[int, ...]

    def __post_init__(self):
        g = self.grid
        if len(self.lo) != g.dim or len(self.hi) != g.dim:
            raise ValidationError("surface bounds must match grid dimension")
        for lo, hi, r in zip(self.lo, self.hi, g.resolution):
            if lo > hi:
                raise ValidationError(f"empty surface box: lo {self.lo} hi {self.hi}")
            if lo < 1 or hi > r:
                raise ValidationError(
                    f"surface box {self.lo}..{self.hi} touches the boundary layer"
                )

    def inside_mask(self) -> np.ndarray:
        """Boolean over full linear indices, True inside the box."""
        m = np.zeros(self.grid.full_shape, dtype=bool)
        m[tuple(slice(lo, hi + 1) for lo, hi in zip(self.lo, self.hi))] = True
        return m.ravel()

    def contains(self, node: NodeRef) -> bool:
        return all(lo <= i <= hi for i, lo, hi in zip(node.indices, self.lo, self.hi))


def box_surface(grid: Grid, center: NodeRef, radius: int) -> FluxSurface:
    """Box of half-width `radius` cells around an interior node."""
    if radius < 1:
        raise ValidationError(f"surface radius must be >= 1, got {radius}")
    lo = tuple(i - radius for i in center.indices)
    hi = tuple(i + radius for i in center.indices)
    return FluxSurface(grid, lo, hi)


def _face_edges(grid: Grid, field: ConductivityField, axis: int):
    """Axis-neighbor edges with harmonic-mean face transmissivities."""
    d = grid.dim
    shape = grid.full_shape
    h = grid.spacing
    # Edge origins: nodes n with n_axis in 0..res, any position transverse.
    origin_ranges = [
        np.arange(shape[a] - 1) if a == axis else np.arange(shape[a]) for a in range(d)
    ]
    mesh = np.meshgrid(*origin_ranges, indexing="ij")
    origin = np.stack([m.ravel() for m in mesh], axis=1)

    # Cells adjacent to the edge: along the edge axis the cell index equals
    # the origin index; transverse axes contribute the cells on either
    # side, skipping positions outside the cell range.
    inv_sum = np.zeros(len(origin))
    count = np.zeros(len(origin))
    a_dd = field.entry(axis, axis).reshape(grid.cells_shape)
    transverse = [a for a in range(d) if a != axis]
    for offsets in itertools.product((-1, 0), repeat=len(transverse)):
        cell_idx = origin.copy()
        valid = np.ones(len(origin), dtype=bool)
        for a, off in zip(transverse, offsets):
            cell_idx[:, a] += off
            valid &= (cell_idx[:, a] >= 0) & (cell_idx[:, a] <= grid.resolution[a])
        vals = a_dd[tuple(cell_idx[valid].T)]
        inv_sum[valid] += 1.0 / vals
        count[valid] += 1.0
    hmean = count / inv_sum

    face_area = np.prod([h[a] for a in transverse]) if transverse else 1.0
    t = hmean * (face_area / h[axis])

    p = np.ravel_multi_index(origin.T, shape)
    step = origin.copy()
    step[:, axis] += 1
    q = np.ravel_multi_index(step.T, shape)
    return p, q, t


def _corner_edges(grid: Grid, field: ConductivityField, ax_p: int, ax_q: int):
    """Cross-term edges for tensor entry (ax_p, ax_q), ax_p < ax_q.

    The per-cell energy is vol * a_pq * g_p * g_q with g_a the mean of the
    corner differences along axis a.  Its Hessian couples a corner pair
    with conductance 2 * w * s_p * s_q when the pair flips both axes and
    -2 * w * s_p * s_q when it flips neither (possible only through a
    third axis); pairs flipping exactly one of the two axes drop out.
    Here w = vol * a_pq / (2^(2(dim-1)) h_p h_q) and s_a is the corner's
    sign along axis a.  The node diagonal is recovered as the sum of
    incident conductances, which per cell telescopes to the Hessian's own
    diagonal.
    """
    d = grid.dim
    a_pq = field.entry(ax_p, ax_q)
    active = np.flatnonzero(a_pq != 0.0)
    if active.size == 0:
        return []
    cells = np.stack(np.unravel_index(active, grid.cells_shape), axis=1)
    h = grid.spacing
    w = a_pq[active] * grid.cell_volume / (2.0 ** (2 * (d - 1)) * h[ax_p] * h[ax_q])

    corners = list(itertools.product((0, 1), repeat=d))
    out = []
    for ci, cj in itertools.combinations(corners, 2):
        flip_p = ci[ax_p] != cj[ax_p]
        flip_q = ci[ax_q] != cj[ax_q]
        if flip_p != flip_q:
            continue
        s_p = 1.0 if ci[ax_p] == 1 else -1.0
        s_q = 1.0 if ci[ax_q] == 1 else -1.0
        sign = 1.0 if flip_p else -1.0
        t = sign * 2.0 * w * s_p * s_q
        pi = np.ravel_multi_index((cells + np.array(ci)).T, grid.full_shape)
        pj = np.ravel_multi_index((cells + np.array(cj)).T, grid.full_shape)
        out.append((pi, pj, t))
    return out


def assemble(grid: Grid, field: ConductivityField) -> DiscreteOperator:
    """Build the discrete operator for a conductivity field on its grid."""
    if field.grid is not grid and field.grid != grid:
        raise ValidationError("field was built for a different grid")

    ps, qs, ts = [], [], []
    for axis in range(grid.dim):
        p, q, t = _face_edges(grid, field, axis)
        ps.append(p)
        qs.append(q)
        ts.append(t)
    for ax_p in range(grid.dim):
        for ax_q in range(ax_p + 1, grid.dim):
            for p, q, t in _corner_edges(grid, field, ax_p, ax_q):
                ps.append(p)
                qs.append(q)
                ts.append(t)

    p = np.concatenate(ps)
    q = np.concatenate(qs)
    t = np.concatenate(ts)

    # Canonical orientation, then coalesce duplicate pairs so that the two
    # triangles of the matrix receive bitwise-identical values.
    swap = p > q
    p2 = np.where(swap, q, p)
    q2 = np.where(swap, p, q)
    order = np.lexsort((q2, p2))
    p2, q2, t = p2[order], q2[order], t[order]
    boundaries = np.flatnonzero(
        np.diff(p2, prepend=p2[0] - 1) | np.diff(q2, prepend=q2[0] - 1)
    )
    edge_p = p2[boundaries]
    edge_q = q2[boundaries]
    edge_t = np.add.reduceat(t, boundaries)

    # Drop edges between two boundary nodes and exact zeros; neither can
    # influence interior rows or admissible flux surfaces.
    interior = grid.interior_mask()
    keep = (interior[edge_p] | interior[edge_q]) & (edge_t != 0.0)
    edge_p, edge_q, edge_t = edge_p[keep], edge_q[keep], edge_t[keep]

    n_full = grid.num_full
    diag_full = np.bincount(edge_p, weights=edge_t, minlength=n_full) + np.bincount(
        edge_q, weights=edge_t, minlength=n_full
    )
    rows = np.concatenate([edge_p, edge_q, np.arange(n_full)])
    cols = np.concatenate([edge_q, edge_p, np.arange(n_full)])
    vals = np.concatenate([-edge_t, -edge_t, diag_full])
    full = sp.csr_matrix((vals, (rows, cols)), shape=(n_full, n_full))

    interior_index = grid.interior_index()
    both = interior[edge_p] & interior[edge_q]
    ip = interior_index[edge_p[both]]
    iq = interior_index[edge_q[both]]
    n_int = grid.num_interior
    diag_int = diag_full[grid.interior_nodes()]
    rows = np.concatenate([ip, iq, np.arange(n_int)])
    cols = np.concatenate([iq, ip, np.arange(n_int)])
    vals = np.concatenate([-edge_t[both], -edge_t[both], diag_int])
    matrix = sp.csr_matrix((vals, (rows, cols)), shape=(n_int, n_int))

    return DiscreteOperator(
        grid=grid,
        field=field,
        matrix=matrix,
        full_matrix=full,
        edge_p=edge_p,
        edge_q=edge_q,
        edge_t=edge_t,
    )


def flux_through_surface(op: DiscreteOperator, potential, surface: FluxSurface) -> float:
    """Net current into the box: sum over crossing edges of conductance
    times (inside potential minus outside potential).

    For any u with op * u = rhs this equals the sum of rhs over enclosed
    nodes, exactly, because the full-node operator annihilates constants.
    `potential` is a Potential or a full-node vector (boundary included).
    """
    if surface.grid != op.grid:
        raise ValidationError("surface was built for a different grid")
    values = np.asarray(getattr(potential, "values", potential))
    if values.shape != (op.grid.num_full,):
        raise ValidationError(
            f"expected full-node vector of length {op.grid.num_full}, got {values.shape}"
        )
    inside = surface.inside_mask()
    crossing = inside[op.edge_p] != inside[op.edge_q]
    if not crossing.any():
        return 0.0
    p = op.edge_p[crossing]
    q = op.edge_q[crossing]
    t = op.edge_t[crossing]
    sign = np.where(inside[p], 1.0, -1.0)
    return float(np.sum(t * sign * (values[p] - values[q])))


def boundary_coupling_load(op: DiscreteOperator, boundary_values: np.ndarray) -> np.ndarray:
    """Interior load induced by inhomogeneous Dirichlet data.

    For the full system K u = 0 with u fixed on the boundary, the interior
    block satisfies A u_int = sum over interior-boundary edges of t * u_b.
    `boundary_values` is a full-node vector; interior entries are ignored.
    """
    grid = op.grid
    interior = grid.interior_mask()
    rhs = np.zeros(grid.num_full)
    pb = ~interior[op.edge_p]
    qb = ~interior[op.edge_q]
    # edge with boundary endpoint contributes t * u_boundary to the other end
    m = qb & interior[op.edge_p]
    np.add.at(rhs, op.edge_p[m], op.edge_t[m] * boundary_values[op.edge_q[m]])
    m = pb & interior[op.edge_q]
    np.add.at(rhs, op.edge_q[m], op.edge_t[m] * boundary_values[op.edge_p[m]])
    return rhs[grid.interior_nodes()]


def dump_matrix(op: DiscreteOperator, path) -> None:
    """Write the interior matrix as text triplets: row col value."""
    coo = op.matrix.tocoo()
    with open(path, "w") as fh:
        for r, c, v in zip(coo.row, coo.col, coo.data):
            fh.write(f"{int(r)} {int(c)} {float(v)!r}\n")
