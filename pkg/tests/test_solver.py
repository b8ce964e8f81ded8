import json

import numpy as np
import pytest

from voltgrid import (
    NonSPDOperatorError,
    SolverFailureError,
    ValidationError,
    active_backend,
    assemble,
    build_grid,
    make_scalar_field,
    random_spd_field,
    solve_dirichlet,
)

from conftest import dense_interior


def test_backend_reported():
    assert active_backend() in ("cython", "python")


def test_tent_shape(op_1d, grid_1d):
    g = grid_1d
    rhs = np.zeros(g.num_interior)
    center = g.num_interior // 2
    rhs[center] = 1.0
    result = solve_dirichlet(op_1d, rhs, tol=1e-13)
    u = result.potential.values[g.interior_mask()]
    assert u.argmax() == center
    assert u[: center + 1] == pytest.approx(np.sort(u[: center + 1]))
    assert u[center:] == pytest.approx(np.sort(u[center:])[::-1])
    # symmetric about the center
    assert u == pytest.approx(u[::-1], rel=1e-10)


def test_matches_dense_solve(op_2d_random, grid_2d):
    rng = np.random.default_rng(0)
    rhs = rng.standard_normal(grid_2d.num_interior)
    result = solve_dirichlet(op_2d_random, rhs, tol=1e-13)
    expected = np.linalg.solve(dense_interior(op_2d_random), rhs)
    got = result.potential.values[grid_2d.interior_mask()]
    assert got == pytest.approx(expected, abs=1e-10)


def test_boundary_stays_grounded(op_2d, grid_2d):
    rhs = np.ones(grid_2d.num_interior)
    result = solve_dirichlet(op_2d, rhs)
    assert (result.potential.values[~grid_2d.interior_mask()] == 0.0).all()


def test_zero_rhs_zero_iterations(op_2d, grid_2d):
    result = solve_dirichlet(op_2d, np.zeros(grid_2d.num_interior))
    assert result.iterations == 0
    assert result.residual == 0.0
    assert (result.potential.values == 0.0).all()


def test_deterministic_bitwise(op_2d_random, grid_2d):
    rng = np.random.default_rng(7)
    rhs = rng.standard_normal(grid_2d.num_interior)
    a = solve_dirichlet(op_2d_random, rhs, tol=1e-12)
    b = solve_dirichlet(op_2d_random, rhs, tol=1e-12)
    assert np.array_equal(a.potential.values, b.potential.values)
    assert a.iterations == b.iterations
    assert a.residual == b.residual


def test_scaling_invariance(op_2d_random, grid_2d):
    """Relative convergence: scaling the load scales the answer exactly."""
    rng = np.random.default_rng(8)
    rhs = rng.standard_normal(grid_2d.num_interior)
    a = solve_dirichlet(op_2d_random, rhs, tol=1e-12)
    b = solve_dirichlet(op_2d_random, 2.0 * rhs, tol=1e-12)
    assert b.iterations == a.iterations
    assert b.potential.values == pytest.approx(2.0 * a.potential.values, rel=1e-13)


def test_residual_below_tol(op_2d_random, grid_2d):
    rng = np.random.default_rng(9)
    rhs = rng.standard_normal(grid_2d.num_interior)
    tol = 1e-11
    result = solve_dirichlet(op_2d_random, rhs, tol=tol)
    assert result.residual <= tol
    # reported residual is the true one, not the recurrence estimate
    u = result.potential.values[grid_2d.interior_mask()]
    true = np.linalg.norm(rhs - dense_interior(op_2d_random) @ u) / np.linalg.norm(rhs)
    assert true <= 2 * tol


def test_iteration_cap_failure(op_2d, grid_2d):
    rhs = np.ones(grid_2d.num_interior)
    with pytest.raises(SolverFailureError) as err:
        solve_dirichlet(op_2d, rhs, tol=1e-30, max_iterations=3)
    assert err.value.iterations == 3
    assert 0.0 < err.value.best_residual


def test_non_spd_rejected(op_1d, grid_1d):
    import scipy.sparse as sp

    bad = op_1d.matrix - 20.0 * sp.eye(grid_1d.num_interior, format="csr")
    fake = type(op_1d)(
        grid=op_1d.grid,
        field=op_1d.field,
        matrix=bad.tocsr(),
        full_matrix=op_1d.full_matrix,
        edge_p=op_1d.edge_p,
        edge_q=op_1d.edge_q,
        edge_t=op_1d.edge_t,
    )
    rhs = np.ones(grid_1d.num_interior)
    with pytest.raises(NonSPDOperatorError):
        solve_dirichlet(fake, rhs)


def test_rhs_validation(op_1d, grid_1d):
    with pytest.raises(ValidationError):
        solve_dirichlet(op_1d, np.ones(grid_1d.num_interior - 1))
    bad = np.ones(grid_1d.num_interior)
    bad[0] = np.inf
    with pytest.raises(ValidationError):
        solve_dirichlet(op_1d, bad)
    with pytest.raises(ValidationError):
        solve_dirichlet(op_1d, np.ones(grid_1d.num_interior), tol=0.0)


def test_trace_file(tmp_path, op_1d, grid_1d):
    rhs = np.ones(grid_1d.num_interior)
    trace = tmp_path / "trace.jsonl"
    result = solve_dirichlet(op_1d, rhs, tol=1e-12, trace=trace)
    lines = [json.loads(l) for l in trace.read_text().splitlines()]
    assert len(lines) == 1
    entry = lines[0]
    assert entry["iterations"] == result.iterations
    assert entry["residual"] == pytest.approx(result.residual)
    assert entry["backend"] == active_backend()
    # appends, never truncates
    solve_dirichlet(op_1d, rhs, tol=1e-12, trace=trace)
    assert len(trace.read_text().splitlines()) == 2


def test_value_at(op_1d, grid_1d):
    rhs = np.zeros(grid_1d.num_interior)
    rhs[3] = 1.0
    result = solve_dirichlet(op_1d, rhs)
    node = grid_1d.node([4])
    assert result.potential.value_at(node) == result.potential.values[node.linear]


def test_large_3d_solve_converges():
    g = build_grid(3, [1.0] * 3, [7] * 3)
    f = random_spd_field(g, 1.0, 6.0, seed=17)
    op = assemble(g, f)
    rng = np.random.default_rng(2)
    rhs = rng.standard_normal(g.num_interior)
    result = solve_dirichlet(op, rhs, tol=1e-11)
    assert result.residual <= 1e-11
    assert result.iterations < 20 * g.num_interior
