"""Run configuration: a small sectioned key-value format and its loader.

The format is INI-shaped but deliberately hand-parsed: the [measure]
section repeats the `charge` key once per point charge, which stock INI
readers collapse.  Grammar: `[section]` headers, `key = value` lines,
full-line or trailing comments starting with `#` or `;` (trailing ones
need a preceding space), blank lines ignored.  Repeated keys accumulate
in order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np

from .errors import ValidationError
from .fields import (
    ConductivityField,
    make_scalar_field,
    per_cell_min_eigenvalue,
    upper_triangle_size,
)
from .grid import Grid, build_grid
from .measures import MeasureData, combine, dirac
from .reciprocity import DEFAULT_SURFACE_RADIUS
from .scenarios import MaterialLaws, kirchhoff_conductivity, random_spd_field
from .solver import DEFAULT_TOL

_SECTIONS = {"grid", "field", "points", "injection", "measure", "solver", "smoothing", "output"}
_FIELD_KINDS = {"scalar", "tensor", "random", "kirchhoff"}
_POINT_NAMES = ("a", "b", "c", "d")


def parse_config_text(text: str) -> dict[str, dict[str, list[str]]]:
    """Raw parse: section -> key -> values in file order."""
    out: dict[str, dict[str, list[str]]] = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        for marker in (" #", "\t#", " ;", "\t;"):
            cut = line.find(marker)
            if cut != -1:
                line = line[:cut].rstrip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ValidationError(f"line {lineno}: unterminated section header")
            section = line[1:-1].strip().lower()
            if not section:
                raise ValidationError(f"line {lineno}: empty section name")
            out.setdefault(section, {})
            continue
        if "=" not in line:
            raise ValidationError(f"line {lineno}: expected 'key = value', got {line!r}")
        if section is None:
            raise ValidationError(f"line {lineno}: key outside any [section]")
        key, _, value = line.partition("=")
        key = key.strip().lower()
        value = value.strip()
        if not key:
            raise ValidationError(f"line {lineno}: empty key")
        out[section].setdefault(key, []).append(value)
    return out


def _floats(raw: str, what: str) -> tuple[float, ...]:
    try:
        vals = tuple(float(tok) for tok in raw.split(",") if tok.strip())
    except ValueError as exc:
        raise ValidationError(f"bad number in {what}: {raw!r}") from exc
    if not vals:
        raise ValidationError(f"{what} is empty")
    if not all(math.isfinite(v) for v in vals):
        raise ValidationError(f"{what} must be finite: {raw!r}")
    return vals


def _single(block: dict[str, list[str]], key: str, section: str) -> str | None:
    if key not in block:
        return None
    vals = block[key]
    if len(vals) > 1:
        raise ValidationError(f"[{section}] {key} given {len(vals)} times")
    return vals[0]


def _require(block: dict[str, list[str]], key: str, section: str) -> str:
    val = _single(block, key, section)
    if val is None:
        raise ValidationError(f"[{section}] is missing required key {key!r}")
    return val


def material_law(raw: str, base_dir=None) -> Callable[[float], float]:
    """Closed-form selectors `constant|affine|exponential : params`, or
    `table : path` pointing at two whitespace-separated columns (u, value)
    interpolated linearly and clamped at the table ends."""
    name, _, params = raw.partition(":")
    name = name.strip().lower()
    params = params.strip()
    if name == "constant":
        (c,) = _floats(params, "constant law")
        return lambda u: c
    if name == "affine":
        c0, c1 = _floats(params, "affine law")
        return lambda u: c0 + c1 * u
    if name == "exponential":
        c0, c1 = _floats(params, "exponential law")
        return lambda u: c0 * math.exp(c1 * u)
    if name == "table":
        if not params:
            raise ValidationError("table law needs a file path")
        path = params if base_dir is None else str(base_dir / params)
        try:
            tab = np.loadtxt(path, ndmin=2)
        except OSError as exc:
            raise ValidationError(f"cannot read table {path!r}: {exc}") from exc
        if tab.shape[1] != 2:
            raise ValidationError(f"table {path!r} must have two columns")
        u_col = tab[:, 0]
        if np.any(np.diff(u_col) <= 0):
            raise ValidationError(f"table {path!r} must be sorted by temperature")
        return lambda u: float(np.interp(u, u_col, tab[:, 1]))
    raise ValidationError(f"unknown material law {name!r}")


@dataclass
class FieldSpec:
    """Deferred field description; realized against a grid via build()."""

    kind: str
    value: float = 1.0
    entries: tuple[float, ...] = ()
    lam: float = 1.0
    anisotropy: float = 1.0
    seed: int = 0
    laws: MaterialLaws | None = None
    kirchhoff_tol: float = 1e-12

    def build(self, grid: Grid, seed_override: int | None = None) -> ConductivityField:
        if self.kind == "scalar":
            return make_scalar_field(grid, self.value)
        if self.kind == "tensor":
            want = upper_triangle_size(grid.dim)
            if len(self.entries) != want:
                raise ValidationError(
                    f"tensor field needs {want} entries in dim {grid.dim}, got {len(self.entries)}"
                )
            tensors = np.tile(np.array(self.entries, dtype=np.float64), (grid.num_cells, 1))
            probe = ConductivityField(grid, tensors, lam=1e-300)
            lam = float(per_cell_min_eigenvalue(probe).min())
            if lam <= 0:
                raise ValidationError(f"tensor entries are not positive definite (min eig {lam})")
            return ConductivityField(grid, tensors, lam=lam)
        if self.kind == "random":
            seed = self.seed if seed_override is None else seed_override
            return random_spd_field(grid, self.lam, self.anisotropy, seed)
        if self.kind == "kirchhoff":
            assert self.laws is not None
            return kirchhoff_conductivity(grid, self.laws, tol=self.kirchhoff_tol)
        raise ValidationError(f"unknown field kind {self.kind!r}")


@dataclass
class RunConfig:
    grid: Grid
    field_spec: FieldSpec
    points: dict[str, tuple[float, ...]] = dc_field(default_factory=dict)
    current: float = 1.0
    radius: int = DEFAULT_SURFACE_RADIUS
    charges: list[tuple[tuple[float, ...], float]] = dc_field(default_factory=list)
    tol: float = DEFAULT_TOL
    max_iterations: int | None = None
    widths: tuple[float, ...] = ()
    output_dir: str | None = None

    def build_field(self, seed_override: int | None = None) -> ConductivityField:
        return self.field_spec.build(self.grid, seed_override)

    def measure(self) -> MeasureData:
        if not self.charges:
            raise ValidationError("config has no [measure] charges")
        out = dirac(self.grid, *self.charges[0])
        for pt, w in self.charges[1:]:
            out = combine(out, dirac(self.grid, pt, w))
        return out

    def named_nodes(self, names=_POINT_NAMES):
        missing = [n for n in names if n not in self.points]
        if missing:
            raise ValidationError(f"[points] is missing {', '.join(missing)}")
        return {n: self.grid.nearest_node(self.points[n]) for n in names}


def _parse_widths(raw: str, h_ref: float) -> tuple[float, ...]:
    """Width list; a trailing 'h' scales by the reference spacing."""
    out = []
    for tok in raw.split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok.endswith("h"):
            head = tok[:-1].strip()
            mult = 1.0 if not head else float(head)
            out.append(mult * h_ref)
        else:
            out.append(float(tok))
    if not out:
        raise ValidationError("widths list is empty")
    if any(w < 0 or not math.isfinite(w) for w in out):
        raise ValidationError(f"widths must be finite and non-negative: {raw!r}")
    return tuple(out)


def load_config(path) -> RunConfig:
    """Read and validate a config file into a RunConfig."""
    from pathlib import Path

    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ValidationError(f"cannot read config {path!r}: {exc}") from exc
    raw = parse_config_text(text)

    unknown = set(raw) - _SECTIONS
    if unknown:
        raise ValidationError(f"unknown config sections: {sorted(unknown)}")
    if "grid" not in raw:
        raise ValidationError("config needs a [grid] section")

    gblock = raw["grid"]
    try:
        dim = int(_require(gblock, "dim", "grid"))
    except ValueError as exc:
        raise ValidationError("grid dim must be an integer") from exc
    extents = _floats(_require(gblock, "extents", "grid"), "[grid] extents")
    if len(extents) == 1:
        extents = extents * dim
    res_raw = _floats(_require(gblock, "resolution", "grid"), "[grid] resolution")
    resolution = tuple(int(r) for r in res_raw)
    if any(r != int(r) for r in res_raw):
        raise ValidationError("grid resolution must be integers")
    if len(resolution) == 1:
        resolution = resolution * dim
    for key in gblock:
        if key not in {"dim", "extents", "resolution"}:
            raise ValidationError(f"unknown [grid] key {key!r}")
    grid = build_grid(dim, extents, resolution)

    fblock = raw.get("field", {"kind": ["scalar"], "value": ["1.0"]})
    kind = _require(fblock, "kind", "field").lower()
    if kind not in _FIELD_KINDS:
        raise ValidationError(f"unknown field kind {kind!r}")
    spec = FieldSpec(kind=kind)
    allowed = {
        "scalar": {"kind", "value"},
        "tensor": {"kind", "entries"},
        "random": {"kind", "lam", "anisotropy", "seed"},
        "kirchhoff": {"kind", "sigma", "k", "u_boundary"},
    }[kind]
    for key in fblock:
        if key not in allowed:
            raise ValidationError(f"[field] key {key!r} does not belong to kind {kind!r}")
    if kind == "scalar":
        val = _single(fblock, "value", "field")
        spec.value = 1.0 if val is None else _floats(val, "[field] value")[0]
        if spec.value <= 0:
            raise ValidationError(f"scalar field value must be positive, got {spec.value}")
    elif kind == "tensor":
        spec.entries = _floats(_require(fblock, "entries", "field"), "[field] entries")
    elif kind == "random":
        spec.lam = _floats(_require(fblock, "lam", "field"), "[field] lam")[0]
        spec.anisotropy = _floats(_require(fblock, "anisotropy", "field"), "[field] anisotropy")[0]
        seed_val = _single(fblock, "seed", "field")
        spec.seed = 0 if seed_val is None else int(float(seed_val))
    else:
        sigma = material_law(_require(fblock, "sigma", "field"), base_dir=p.parent)
        k = material_law(_require(fblock, "k", "field"), base_dir=p.parent)
        u_b = _floats(_require(fblock, "u_boundary", "field"), "[field] u_boundary")
        if len(u_b) != 2 * dim:
            raise ValidationError(f"u_boundary needs {2 * dim} values, got {len(u_b)}")
        spec.laws = MaterialLaws(sigma_of_u=sigma, k_of_u=k, u_boundary=u_b)

    cfg = RunConfig(grid=grid, field_spec=spec)

    if "points" in raw:
        for name, vals in raw["points"].items():
            if name not in _POINT_NAMES:
                raise ValidationError(f"unknown [points] key {name!r}")
            if len(vals) > 1:
                raise ValidationError(f"[points] {name} given {len(vals)} times")
            pt = _floats(vals[0], f"[points] {name}")
            if len(pt) != dim:
                raise ValidationError(f"[points] {name} needs {dim} coordinates, got {len(pt)}")
            cfg.points[name] = pt

    if "injection" in raw:
        block = raw["injection"]
        for key in block:
            if key not in {"current", "radius"}:
                raise ValidationError(f"unknown [injection] key {key!r}")
        cur = _single(block, "current", "injection")
        if cur is not None:
            cfg.current = _floats(cur, "[injection] current")[0]
        rad = _single(block, "radius", "injection")
        if rad is not None:
            cfg.radius = int(float(rad))
            if cfg.radius < 1:
                raise ValidationError(f"surface radius must be >= 1, got {cfg.radius}")

    if "measure" in raw:
        block = raw["measure"]
        for key in block:
            if key != "charge":
                raise ValidationError(f"unknown [measure] key {key!r}")
        for entry in block.get("charge", []):
            left, sep, right = entry.rpartition(":")
            if not sep:
                raise ValidationError(f"charge needs 'coords : weight', got {entry!r}")
            pt = _floats(left, "charge location")
            if len(pt) != dim:
                raise ValidationError(f"charge location needs {dim} coordinates: {entry!r}")
            weight = _floats(right, "charge weight")[0]
            cfg.charges.append((pt, weight))

    if "solver" in raw:
        block = raw["solver"]
        for key in block:
            if key not in {"tol", "max_iterations"}:
                raise ValidationError(f"unknown [solver] key {key!r}")
        tol = _single(block, "tol", "solver")
        if tol is not None:
            cfg.tol = _floats(tol, "[solver] tol")[0]
            if cfg.tol <= 0:
                raise ValidationError(f"solver tol must be positive, got {cfg.tol}")
        cap = _single(block, "max_iterations", "solver")
        if cap is not None:
            cfg.max_iterations = int(float(cap))
            if cfg.max_iterations < 1:
                raise ValidationError("max_iterations must be >= 1")
    if kind == "kirchhoff":
        spec.kirchhoff_tol = min(cfg.tol, 1e-12)

    if "smoothing" in raw:
        block = raw["smoothing"]
        for key in block:
            if key != "widths":
                raise ValidationError(f"unknown [smoothing] key {key!r}")
        cfg.widths = _parse_widths(
            _require(block, "widths", "smoothing"), max(grid.spacing)
        )

    if "output" in raw:
        block = raw["output"]
        for key in block:
            if key != "directory":
                raise ValidationError(f"unknown [output] key {key!r}")
        cfg.output_dir = _require(block, "directory", "output")

    return cfg
