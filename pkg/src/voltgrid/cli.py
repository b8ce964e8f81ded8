"""Command-line front end.

Subcommands: solve | green | reciprocity | analytic-check | convergence.
Every run writes a report.json into the output directory (plus CSV dumps
where a field or potential is produced) and prints a one-line summary.
Exit codes are part of the contract: 0 success, 2 configuration or
validation error, 3 numerical failure (solver breakdown or a failed
verdict).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analytic import OneDimConfig, fundamental_3d, phi_1d, reciprocity_1d
from .config import RunConfig, load_config
from .errors import SolverFailureError, ValidationError
from .fields import dump_field
from .green import check_positivity, check_symmetry, green_column, is_isotropic, smoothing_convergence
from .grid import build_grid
from .measures import injection_rhs, total_weight
from .operator import assemble
from .reciprocity import InjectionSpec, reciprocity_defect, unit_strength_reciprocity
from .solver import active_backend, solve_dirichlet

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _write_csv(path: Path, header: list[str], rows: np.ndarray) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in np.atleast_2d(rows):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _write_report(out_dir: Path, payload: dict) -> Path:
    out_dir.mkdir(parents=True, exist_ok=True)
    payload = dict(payload)
    payload["version"] = __version__
    payload["backend"] = active_backend()
    path = out_dir / "report.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path

def _axis_headers(dim: int) -> list[str]:
    return ["x", "y", "z"][:dim]


def cmd_solve(cfg: RunConfig, out_dir: Path, seed: int | None) -> int:
    """Solve the grounded problem for the configured charges.

    Charge weights are injected currents: a positive weight drives I
    amperes through the node, and the driven potential dips there (the
    convention of the 1D closed form, where phi(a) = -0.125 for I = 1).
    """
    field = cfg.build_field(seed)
    op = assemble(cfg.grid, field)
    measure = cfg.measure()
    rhs = injection_rhs(measure)
    result = solve_dirichlet(op, rhs, tol=cfg.tol, max_iterations=cfg.max_iterations)

    coords = cfg.grid.node_coordinates()
    rows = np.column_stack([coords, result.potential.values])
    _write_csv(out_dir / "potential.csv", _axis_headers(cfg.grid.dim) + ["potential"], rows)
    dump_field(field, out_dir / "field.csv")
    report = _write_report(
        out_dir,
        {
            "command": "solve",
            "residual": float(result.residual),
            "iterations": int(result.iterations),
            "charges": len(measure.charges),
            "net_current": float(total_weight(measure)),
            "max_potential": float(np.abs(result.potential.values).max()),
        },
    )
    print(
        f"solve: {result.iterations} iterations, residual {result.residual:.3e},"
        f" report {report}"
    )
    return EXIT_OK


def cmd_green(cfg: RunConfig, out_dir: Path, seed: int | None) -> int:
    """Column dumps plus symmetry and positivity reports for the
    configured points (at least two of a, b, c, d)."""
    field = cfg.build_field(seed)
    op = assemble(cfg.grid, field)
    names = [n for n in ("a", "b", "c", "d") if n in cfg.points]
    if len(names) < 2:
        raise ValidationError("green needs at least two [points] entries")
    nodes = cfg.named_nodes(names)

    sym = check_symmetry(op, [nodes[n] for n in names], tol=cfg.tol)
    sym_pass = sym.max_defect <= 50.0 * cfg.tol * max(sym.scale, 1.0)
    isotropic = is_isotropic(field)
    positivity = {}
    coords = cfg.grid.node_coordinates()
    for name in names:
        col = green_column(op, nodes[name], tol=cfg.tol)
        pos = check_positivity(col, isotropic)
        positivity[name] = {
            "min_value": float(pos.min_value),
            "verdict": bool(pos.verdict),
            "enforced": bool(pos.enforced),
        }
        rows = np.column_stack([coords, col.potential.values])
        _write_csv(
            out_dir / f"green_{name}.csv",
            _axis_headers(cfg.grid.dim) + ["value"],
            rows,
        )
    pos_pass = all(p["verdict"] for p in positivity.values() if p["enforced"])
    report = _write_report(
        out_dir,
        {
            "command": "green",
            "symmetry": {
                "max_defect": float(sym.max_defect),
                "scale": float(sym.scale),
                "pairs": int(sym.pairs),
                "passed": bool(sym_pass),
            },
            "positivity": positivity,
            "passed": bool(sym_pass and pos_pass),
        },
    )
    print(
        f"green: symmetry defect {sym.max_defect:.3e} over {sym.pairs} pairs,"
        f" report {report}"
    )
    return EXIT_OK if (sym_pass and pos_pass) else EXIT_NUMERICAL


def cmd_reciprocity(cfg: RunConfig, out_dir: Path, seed: int | None) -> int:
    """Scaled and unit-strength reciprocity checks for points a, b, c, d."""
    field = cfg.build_field(seed)
    op = assemble(cfg.grid, field)
    nodes = cfg.named_nodes()
    spec = InjectionSpec(
        points=(nodes["a"], nodes["b"], nodes["c"], nodes["d"]),
        current=cfg.current,
        surface_radius=cfg.radius,
    )
    scaled = reciprocity_defect(op, spec, tol=cfg.tol)
    unit = unit_strength_reciprocity(op, spec, tol=cfg.tol)
    passed = scaled.verdict and unit.verdict
    report = _write_report(
        out_dir,
        {
            "command": "reciprocity",
            "scaled": scaled.to_dict(),
            "unit_strength": unit.to_dict(),
            "passed": bool(passed),
        },
    )
    word = "reciprocal" if passed else "violated"
    print(
        f"reciprocity: {word} (lhs {scaled.lhs:.3e}, rhs {scaled.rhs:.3e}),"
        f" report {report}"
    )
    return EXIT_OK if passed else EXIT_NUMERICAL


def _analytic_rows() -> list[dict]:
    cfg = OneDimConfig(length=1.0, a=0.25, b=0.75, current=1.0)
    rows = []

    def row(name: str, value: float, threshold: float):
        rows.append(
            {
                "check": name,
                "value": float(value),
                "threshold": float(threshold),
                "passed": bool(abs(value) <= threshold),
            }
        )

    row("midpoint_potential", phi_1d(0.5, cfg), 1e-15)
    row("inflow_potential_offset", phi_1d(0.25, cfg) + 0.125, 1e-15)
    row("outflow_potential_offset", phi_1d(0.75, cfg) - 0.125, 1e-15)
    row("grounded_ends", abs(phi_1d(0.0, cfg)) + abs(phi_1d(1.0, cfg)), 0.0)

    # Slope jumps at the charges: +I at the inflow, -I at the outflow.
    eps = 1e-6
    jump_a = (phi_1d(cfg.a + eps, cfg) - phi_1d(cfg.a, cfg)) / eps - (
        phi_1d(cfg.a, cfg) - phi_1d(cfg.a - eps, cfg)
    ) / eps
    jump_b = (phi_1d(cfg.b + eps, cfg) - phi_1d(cfg.b, cfg)) / eps - (
        phi_1d(cfg.b, cfg) - phi_1d(cfg.b - eps, cfg)
    ) / eps
    row("slope_jump_inflow", jump_a - cfg.current, 1e-9)
    row("slope_jump_outflow", jump_b + cfg.current, 1e-9)

    rng = np.random.default_rng(2026)
    worst = 0.0
    for _ in range(200):
        pts = np.sort(rng.random(4) * 0.98 + 0.01)
        defect = reciprocity_1d(pts[0], pts[2], pts[1], pts[3], current=1.0, length=1.0)
        worst = max(worst, abs(defect))
    row("reciprocity_quadruples", worst, 1e-14)

    row("kernel_unit_radius", fundamental_3d((1.0, 0.0, 0.0)) + 1.0 / (4.0 * np.pi), 1e-15)
    row("kernel_half_radius", fundamental_3d((0.0, 0.5, 0.0)) + 1.0 / (2.0 * np.pi), 1e-15)

    # Discrete cross-check: grounded 1D solve against the closed form.
    grid = build_grid(1, [1.0], [127])
    from .fields import make_scalar_field
    from .measures import combine, dirac

    op = assemble(grid, make_scalar_field(grid, 1.0))
    m = combine(dirac(grid, [0.25], 1.0), dirac(grid, [0.75], -1.0))
    result = solve_dirichlet(op, injection_rhs(m), tol=1e-12)
    exact = np.array([phi_1d(x, cfg) for x in grid.node_coordinates()[:, 0]])
    row("discrete_vs_closed_form", np.abs(result.potential.values - exact).max(), 1e-10)
    return rows


def cmd_analytic_check(out_dir: Path) -> int:
    """Closed-form self-tests: 1D two-charge formula, reciprocity of the
    formula under point exchange, the 3D kernel, and a discrete solve
    against the closed form."""
    rows = _analytic_rows()
    passed = all(r["passed"] for r in rows)
    report = _write_report(
        out_dir,
        {"command": "analytic-check", "checks": rows, "passed": bool(passed)},
    )
    n_ok = sum(r["passed"] for r in rows)
    print(f"analytic-check: {n_ok}/{len(rows)} checks passed, report {report}")
    return EXIT_OK if passed else EXIT_NUMERICAL


def cmd_convergence(cfg: RunConfig, out_dir: Path, seed: int | None) -> int:
    """Distance table of solutions under progressively narrower
    mollification of the configured field."""
    if not cfg.widths:
        raise ValidationError("convergence needs a [smoothing] widths list")
    field = cfg.build_field(seed)
    measure = cfg.measure()
    table = smoothing_convergence(field, measure, cfg.widths, tol=cfg.tol)
    report = _write_report(
        out_dir,
        {
            "command": "convergence",
            "table": [{"width": float(w), "distance": float(d)} for w, d in table],
        },
    )
    tail = table[-1]
    print(
        f"convergence: {len(table)} widths, last distance {tail[1]:.3e}"
        f" at width {tail[0]:.3e}, report {report}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="voltgrid",
        description="Grounded-grid current injection toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", required=True, help="path to a run config file")
        p.add_argument("--out", default=None, help="output directory (default: config or '.')")
        p.add_argument("--seed", type=int, default=None, help="override the field seed")

    common(sub.add_parser("solve", help="solve for the configured charges"))
    common(sub.add_parser("green", help="column dumps, symmetry and positivity"))
    common(sub.add_parser("reciprocity", help="four-point reciprocity verdicts"))
    common(sub.add_parser("convergence", help="smoothing distance table"))
    p_an = sub.add_parser("analytic-check", help="closed-form self-tests")
    common(p_an, needs_config=False)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "analytic-check":
            out_dir = Path(args.out or ".")
            out_dir.mkdir(parents=True, exist_ok=True)
            return cmd_analytic_check(out_dir)
        cfg = load_config(args.config)
        out_dir = Path(args.out or cfg.output_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        handler = {
            "solve": cmd_solve,
            "green": cmd_green,
            "reciprocity": cmd_reciprocity,
            "convergence": cmd_convergence,
        }[args.command]
        return handler(cfg, out_dir, args.seed)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailureError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
