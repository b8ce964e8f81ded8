import numpy as np
import pytest

from voltgrid import assemble, build_grid, make_scalar_field, random_spd_field


@pytest.fixture
def grid_1d():
    return build_grid(1, [1.0], [15])


@pytest.fixture
def grid_2d():
    return build_grid(2, [1.0, 1.0], [9, 9])


@pytest.fixture
def grid_3d():
    return build_grid(3, [1.0, 1.0, 1.0], [5, 5, 5])


@pytest.fixture
def op_1d(grid_1d):
    return assemble(grid_1d, make_scalar_field(grid_1d, 1.0))


@pytest.fixture
def op_2d(grid_2d):
    return assemble(grid_2d, make_scalar_field(grid_2d, 1.0))


@pytest.fixture
def op_2d_random(grid_2d):
    return assemble(grid_2d, random_spd_field(grid_2d, 1.0, 5.0, seed=3))


def dense_interior(op):
    """Dense copy of the interior matrix, for brute-force oracles."""
    return np.asarray(op.matrix.todense())
