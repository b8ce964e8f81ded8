"""Timing comparison of the two conjugate-gradient kernels.

Assembles the same anisotropic problem at a range of resolutions, then
solves it with the compiled kernel and the numpy fallback, reporting
wall time, iteration counts and the speedup.  Iteration counts may
differ by a step or two between kernels (dot products associate
differently); anything larger points at a kernel bug.

Run from the repository root:

    python3 benchmarks/bench_solver.py
    python3 benchmarks/bench_solver.py --dim 3 --resolutions 15,23,31
"""

import argparse
import time

import numpy as np

from voltgrid import assemble, build_grid, combine, dirac, injection_rhs, random_spd_field
import voltgrid._pcg_python as py_kernel

try:
    import voltgrid._pcg as cy_kernel
except ImportError:
    cy_kernel = None


def kernel_args(op, rhs, tol):
    m = op.matrix
    return (
        np.asarray(m.indptr, dtype=np.int32),
        np.asarray(m.indices, dtype=np.int32),
        np.asarray(m.data, dtype=np.float64),
        op.diagonal,
        rhs,
        tol,
        20 * op.grid.num_interior,
    )


def time_kernel(kernel, args, repeats):
    kernel.pcg(*args)  # warm up
    best = float("inf")
    iterations = residual = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        _, residual, iterations, flag = kernel.pcg(*args)
        best = min(best, time.perf_counter() - t0)
        if flag != 0:
            raise RuntimeError(f"kernel {kernel.BACKEND} failed with flag {flag}")
    return best, iterations, residual


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--dim", type=int, default=2, choices=(1, 2, 3))
    parser.add_argument(
        "--resolutions", default="31,63,127", help="comma-separated interior sizes per axis"
    )
    parser.add_argument("--repeats", type=int, default=5)
    parser.add_argument("--tol", type=float, default=1e-10)
    parser.add_argument("--anisotropy", type=float, default=8.0)
    parser.add_argument("--seed", type=int, default=1)
    args = parser.parse_args()

    if cy_kernel is None:
        print("compiled kernel not available; timing the numpy fallback only")

    resolutions = [int(tok) for tok in args.resolutions.split(",")]
    header = f"{'n':>10} {'unknowns':>10} {'iters':>7} {'python':>10}"
    if cy_kernel is not None:
        header += f" {'cython':>10} {'speedup':>8}"
    print(header)

    for n in resolutions:
        grid = build_grid(args.dim, [1.0] * args.dim, [n] * args.dim)
        field = random_spd_field(grid, 1.0, args.anisotropy, seed=args.seed)
        op = assemble(grid, field)
        m = combine(
            dirac(grid, [0.3] * args.dim, 1.0), dirac(grid, [0.7] * args.dim, -1.0)
        )
        kargs = kernel_args(op, injection_rhs(m), args.tol)

        t_py, it_py, _ = time_kernel(py_kernel, kargs, args.repeats)
        line = f"{n:>10} {grid.num_interior:>10} {it_py:>7} {t_py * 1e3:>8.2f}ms"
        if cy_kernel is not None:
            t_cy, it_cy, _ = time_kernel(cy_kernel, kargs, args.repeats)
            line += f" {t_cy * 1e3:>8.2f}ms {t_py / t_cy:>7.1f}x"
            if abs(it_py - it_cy) > 2:
                line += f"  (iteration mismatch: {it_py} vs {it_cy})"
        print(line)


if __name__ == "__main__":
    main()
