"""Structured rectilinear grids in one, two or three dimensions.

A grid covers the box (0, extent_d) per axis.  Interior nodes sit at
k * h_d for k = 1..resolution_d with spacing h_d = extent_d /
(resolution_d + 1); the surrounding boundary layer (k = 0 and
k = resolution_d + 1) carries Dirichlet data.  Cells are the intervals
between consecutive nodes, so each axis has resolution_d + 1 cells.

Node bookkeeping uses two linearizations: the "full" index runs row-major
over all nodes including the boundary layer, the "interior" index over
interior nodes only (the dimension of assembled systems).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import ValidationError


@dataclass(frozen=True)
class NodeRef:
    """A single grid node: per-axis indices plus derived positions."""

    indices: tuple[int, ...]
    linear: int
    coordinates: tuple[float, ...]

    def __eq__(self, other):
        if not isinstance(other, NodeRef):
            return NotImplemented
        return self.indices == other.indices

    def __hash__(self):
        return hash(self.indices)


@dataclass(frozen=True)
class Grid:
    dim: int
    extents: tuple[float, ...]
    resolution: tuple[int, ...]
    spacing: tuple[float, ...] = field(init=False)

    def __post_init__(self):
        h = tuple(e / (r + 1) for e, r in zip(self.extents, self.resolution))
        object.__setattr__(self, "spacing", h)

    # --- shapes -------------------------------------------------------

    @property
    def full_shape(self) -> tuple[int, ...]:
        """Node counts per axis including the boundary layer."""
        return tuple(r + 2 for r in self.resolution)

    @property
    def cells_shape(self) -> tuple[int, ...]:
        return tuple(r + 1 for r in self.resolution)

    @property
    def num_full(self) -> int:
        return int(np.prod(self.full_shape))

    @property
    def num_interior(self) -> int:
        return int(np.prod(self.resolution))

    @property
    def num_cells(self) -> int:
        return int(np.prod(self.cells_shape))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    # --- node construction --------------------------------------------

    def node(self, indices: Sequence[int]) -> NodeRef:
        idx = tuple(int(i) for i in indices)
        if len(idx) != self.dim:
            raise ValidationError(f"expected {self.dim} indices, got {len(idx)}")
        for i, n in zip(idx, self.full_shape):
            if not 0 <= i < n:
                raise ValidationError(f"node index {idx} outside grid")
        linear = int(np.ravel_multi_index(idx, self.full_shape))
        coords = tuple(i * h for i, h in zip(idx, self.spacing))
        return NodeRef(idx, linear, coords)

    def node_from_linear(self, linear: int) -> NodeRef:
        idx = np.unravel_index(int(linear), self.full_shape)
        return self.node(idx)

    def is_interior(self, node: NodeRef) -> bool:
        return all(1 <= i <= r for i, r in zip(node.indices, self.resolution))

    def nearest_node(self, point: Sequence[float]) -> NodeRef:
        """Interior node closest to a point strictly inside the domain.

        Equidistant points break toward the lower index on each axis.
        Points on or outside the boundary are rejected: the boundary layer
        is not addressable this way.
        """
        pt = tuple(float(x) for x in point)
        if len(pt) != self.dim:
            raise ValidationError(f"expected {self.dim} coordinates, got {len(pt)}")
        idx = []
        for x, e, h, r in zip(pt, self.extents, self.spacing, self.resolution):
            if not 0.0 < x < e:
                raise ValidationError(f"point {pt} is not strictly inside the domain")
            s = x / h
            k = int(np.floor(s))
            frac = s - k
            if frac > 0.5:
                k += 1
            idx.append(min(max(k, 1), r))
        return self.node(idx)

    # --- linear index maps ---------------------------------------------

    def interior_mask(self) -> np.ndarray:
        """Boolean mask over full linear indices, True at interior nodes."""
        m = np.zeros(self.full_shape, dtype=bool)
        m[tuple(slice(1, -1) for _ in range(self.dim))] = True
        return m.ravel()

    def interior_nodes(self) -> np.ndarray:
        """Full linear indices of interior nodes, ascending."""
        return np.flatnonzero(self.interior_mask())

    def interior_index(self) -> np.ndarray:
        """Map full linear index -> interior index, -1 on the boundary."""
        out = np.full(self.num_full, -1, dtype=np.int64)
        out[self.interior_nodes()] = np.arange(self.num_interior)
        return out

    def node_coordinates(self) -> np.ndarray:
        """Coordinates of every full node, shape (num_full, dim)."""
        axes = [np.arange(n) * h for n, h in zip(self.full_shape, self.spacing)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)

    def cell_centers(self) -> np.ndarray:
        """Coordinates of cell centers, shape (num_cells, dim)."""
        axes = [(np.arange(n) + 0.5) * h for n, h in zip(self.cells_shape, self.spacing)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=1)


def build_grid(dim: int, extents: Iterable[float], resolution: Iterable[int]) -> Grid:
    """Construct a validated grid.

    Requires 1 <= dim <= 3, positive extents, and at least 3 interior nodes
    per axis (anything coarser cannot hold a surface around an interior
    point).
    """
    extents = tuple(float(e) for e in extents)
    resolution = tuple(int(r) for r in resolution)
    if dim not in (1, 2, 3):
        raise ValidationError(f"dim must be 1, 2 or 3, got {dim}")
    if len(extents) != dim or len(resolution) != dim:
        raise ValidationError(
            f"need {dim} extents and resolutions, got {len(extents)} and {len(resolution)}"
        )
    if any(e <= 0 for e in extents):
        raise ValidationError(f"extents must be positive, got {extents}")
    if any(r < 3 for r in resolution):
        raise ValidationError(f"resolution must be >= 3 per axis, got {resolution}")
    return Grid(dim, extents, resolution)
