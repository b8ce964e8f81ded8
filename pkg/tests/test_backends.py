import importlib.util
import os
import subprocess
import sys

import numpy as np
import pytest

import voltgrid._pcg_python as py_kernel
from voltgrid import active_backend, injection_rhs, combine, dirac

HAVE_COMPILED = importlib.util.find_spec("voltgrid._pcg") is not None


def kernel_args(op, rhs, tol=1e-12, cap=None):
    m = op.matrix
    if cap is None:
        cap = 20 * op.grid.num_interior
    return (
        np.asarray(m.indptr, dtype=np.int32),
        np.asarray(m.indices, dtype=np.int32),
        np.asarray(m.data, dtype=np.float64),
        op.diagonal,
        rhs,
        tol,
        cap,
    )


def two_charge_rhs(grid):
    m = combine(dirac(grid, [0.3] * grid.dim, 1.0), dirac(grid, [0.7] * grid.dim, -1.0))
    return injection_rhs(m)


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")
def test_kernels_agree(op_2d_random, grid_2d):
    import voltgrid._pcg as cy_kernel

    rhs = two_charge_rhs(grid_2d)
    args = kernel_args(op_2d_random, rhs)
    x_py, res_py, it_py, flag_py = py_kernel.pcg(*args)
    x_cy, res_cy, it_cy, flag_cy = cy_kernel.pcg(*args)
    assert flag_py == flag_cy == 0
    # identical algorithm, but dot products may associate differently,
    # so demand agreement at the tolerance scale rather than bitwise
    assert abs(it_py - it_cy) <= 2
    assert np.abs(np.asarray(x_py) - np.asarray(x_cy)).max() <= 1e-10
    assert res_py <= 1e-12 and res_cy <= 1e-12


@pytest.mark.skipif(not HAVE_COMPILED, reason="compiled kernel not built")
def test_backend_names():
    import voltgrid._pcg as cy_kernel

    assert cy_kernel.BACKEND == "cython"
    assert py_kernel.BACKEND == "python"
    assert active_backend() in {"cython", "python"}


@pytest.mark.parametrize("kernel_name", ["python", "cython"])
def test_kernel_determinism(kernel_name, op_2d_random, grid_2d):
    if kernel_name == "cython":
        if not HAVE_COMPILED:
            pytest.skip("compiled kernel not built")
        import voltgrid._pcg as kernel
    else:
        kernel = py_kernel
    rhs = two_charge_rhs(grid_2d)
    args = kernel_args(op_2d_random, rhs)
    x1, res1, it1, _ = kernel.pcg(*args)
    x2, res2, it2, _ = kernel.pcg(*args)
    assert np.array_equal(np.asarray(x1), np.asarray(x2))
    assert res1 == res2 and it1 == it2


def backend_in_subprocess(env_override):
    env = dict(os.environ)
    env.pop("VOLTGRID_PURE_PYTHON", None)
    env.update(env_override)
    out = subprocess.run(
        [sys.executable, "-c", "import voltgrid; print(voltgrid.active_backend())"],
        capture_output=True,
        text=True,
        env=env,
        check=True,
    )
    return out.stdout.strip()


def test_pure_python_env_override():
    assert backend_in_subprocess({"VOLTGRID_PURE_PYTHON": "1"}) == "python"


def test_default_backend_prefers_compiled():
    expected = "cython" if HAVE_COMPILED else "python"
    assert backend_in_subprocess({}) == expected
