import numpy as np
import pytest

from voltgrid import (
    InjectionSpec,
    MaterialLaws,
    ValidationError,
    assemble,
    build_grid,
    heat_balance_residual,
    kirchhoff_conductivity,
    make_scalar_field,
    per_cell_min_eigenvalue,
    random_spd_field,
    reciprocity_defect,
    validate_tensor,
)


# --- random tensor fields -------------------------------------------------


def test_random_field_validation(grid_2d):
    for lam in (0.0, -1.0):
        with pytest.raises(ValidationError):
            random_spd_field(grid_2d, lam, 2.0, seed=0)
    with pytest.raises(ValidationError):
        random_spd_field(grid_2d, 1.0, 0.5, seed=0)


def test_random_field_isotropic_limit(grid_2d):
    f = random_spd_field(grid_2d, 1.5, 1.0, seed=9)
    ref = make_scalar_field(grid_2d, 1.5)
    assert np.array_equal(f.tensors, ref.tensors)
    assert f.lam == ref.lam


def test_random_field_deterministic(grid_2d):
    a = random_spd_field(grid_2d, 1.0, 6.0, seed=4)
    b = random_spd_field(grid_2d, 1.0, 6.0, seed=4)
    c = random_spd_field(grid_2d, 1.0, 6.0, seed=5)
    assert np.array_equal(a.tensors, b.tensors)
    assert not np.array_equal(a.tensors, c.tensors)


@pytest.mark.parametrize("dim,res", [(2, [9, 9]), (3, [5, 5, 5])])
def test_random_field_eigenvalue_bounds(dim, res):
    g = build_grid(dim, [1.0] * dim, res)
    lam, aniso = 0.7, 4.0
    f = random_spd_field(g, lam, aniso, seed=21)
    eigs = np.linalg.eigvalsh(f.dense_tensors())
    assert eigs.min() >= lam * (1 - 1e-12)
    assert eigs.max() <= lam * aniso * (1 + 1e-12)
    assert per_cell_min_eigenvalue(f).min() >= lam * (1 - 1e-12)
    assert validate_tensor(f).ok


def test_random_field_tensors_symmetric():
    g = build_grid(3, [1.0] * 3, [4, 4, 4])
    f = random_spd_field(g, 1.0, 5.0, seed=2)
    dense = f.dense_tensors()
    assert np.array_equal(dense, dense.transpose(0, 2, 1))


# --- nonlinear heat balance ------------------------------------------------


def affine_laws():
    return MaterialLaws(
        sigma_of_u=lambda u: 1.0 + u,
        k_of_u=lambda u: 1.0,
        u_boundary=(0.0, 1.0),
    )


def test_kirchhoff_linear_temperature_profile():
    """k constant makes the temperature linear across the interval, so the
    conductivity picks up sigma(u) = 1 + x exactly at cell centers."""
    g = build_grid(1, [1.0], [31])
    field = kirchhoff_conductivity(g, affine_laws())
    x = g.cell_centers()[:, 0]
    assert field.entry(0, 0) == pytest.approx(1.0 + x, abs=1e-10)


def test_kirchhoff_nonlinear_conductivity():
    """k(u) = 1 + u: the transformed unknown w = u + u^2/2 is linear with
    w(1) = 3/2, so u(x) = sqrt(1 + 3x) - 1 at the nodes."""
    g = build_grid(1, [1.0], [31])
    laws = MaterialLaws(
        sigma_of_u=lambda u: 1.0 + u,
        k_of_u=lambda u: 1.0 + u,
        u_boundary=(0.0, 1.0),
    )
    field = kirchhoff_conductivity(g, laws)
    nodes_x = g.node_coordinates()[:, 0]
    u_nodes = np.sqrt(1.0 + 3.0 * nodes_x) - 1.0
    centers_u = 0.5 * (u_nodes[:-1] + u_nodes[1:])
    assert field.entry(0, 0) == pytest.approx(1.0 + centers_u, abs=1e-10)


def test_kirchhoff_constant_sigma_ignores_profile():
    g = build_grid(1, [1.0], [15])
    laws = MaterialLaws(
        sigma_of_u=lambda u: 2.0,
        k_of_u=lambda u: 1.0 + 0.5 * u,
        u_boundary=(0.0, 1.0),
    )
    field = kirchhoff_conductivity(g, laws)
    assert field.entry(0, 0) == pytest.approx(np.full(g.num_cells, 2.0), abs=1e-12)


def test_kirchhoff_uniform_walls_give_uniform_field():
    g = build_grid(2, [1.0, 1.0], [9, 9])
    laws = MaterialLaws(
        sigma_of_u=lambda u: np.exp(u),
        k_of_u=lambda u: 1.0,
        u_boundary=(0.3, 0.3, 0.3, 0.3),
    )
    field = kirchhoff_conductivity(g, laws)
    assert field.entry(0, 0) == pytest.approx(np.full(g.num_cells, np.exp(0.3)), abs=1e-8)


def test_kirchhoff_rejects_nonpositive_laws():
    g = build_grid(1, [1.0], [7])
    with pytest.raises(ValidationError):
        kirchhoff_conductivity(
            g,
            MaterialLaws(
                sigma_of_u=lambda u: u - 10.0,
                k_of_u=lambda u: 1.0,
                u_boundary=(0.0, 1.0),
            ),
        )
    with pytest.raises(ValidationError):
        kirchhoff_conductivity(
            g,
            MaterialLaws(
                sigma_of_u=lambda u: 1.0,
                k_of_u=lambda u: -1.0,
                u_boundary=(0.0, 1.0),
            ),
        )


def test_kirchhoff_wall_count_checked():
    g = build_grid(2, [1.0, 1.0], [5, 5])
    with pytest.raises(ValidationError):
        kirchhoff_conductivity(
            g,
            MaterialLaws(
                sigma_of_u=lambda u: 1.0,
                k_of_u=lambda u: 1.0,
                u_boundary=(0.0, 1.0),
            ),
        )


def test_heat_balance_residual_of_true_profile():
    g = build_grid(1, [1.0], [31])
    x = g.node_coordinates()[:, 0]
    assert heat_balance_residual(g, affine_laws(), x) <= 1e-10


def test_heat_balance_residual_flags_wrong_profile():
    g = build_grid(1, [1.0], [31])
    x = g.node_coordinates()[:, 0]
    assert heat_balance_residual(g, affine_laws(), x**2) > 0.01


def test_kirchhoff_field_is_reciprocal():
    """End to end: a temperature-derived conductivity still satisfies the
    four-point swap identity."""
    g = build_grid(2, [1.0, 1.0], [15, 15])
    laws = MaterialLaws(
        sigma_of_u=lambda u: 1.0 + u,
        k_of_u=lambda u: 1.0 + 0.25 * u,
        u_boundary=(0.0, 1.0, 0.25, 0.75),
    )
    op = assemble(g, kirchhoff_conductivity(g, laws))
    pts = tuple(g.node(ij) for ij in ([3, 3], [13, 13], [3, 13], [13, 3]))
    rep = reciprocity_defect(op, InjectionSpec(points=pts, surface_radius=2), tol=1e-13)
    assert rep.verdict
    assert rep.alpha == pytest.approx([1.0] * 4, abs=5e-12)
