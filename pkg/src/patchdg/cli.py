"""Batch front end: solve / convergence / reliable / source / mesh-info.

Configuration comes from command-line flags, optionally layered over a flat
key=value text file (flags override the file).  Artifacts are CSV files
with a header row and 12-significant-digit, locale-independent numbers,
plus optional legacy-VTK eigenfunction exports.  Exit codes: 0 success,
2 configuration error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import analysis
from .assembly import FormConfig
from .errors import PatchDGError
from .mesh import build_topology, generate_cube_tet, generate_square_tri, mesh_size, parse_msh, parse_poly
from .reconstruction import build_space

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class ConfigError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    problem: str = "laplace"
    bc: str = ""
    m: int = 1
    t: int | None = None
    mesh: str = ""
    k: int = 10
    target: int = 1
    eta: float = 5.5
    alpha: float = 5.0
    beta: float = 2.5
    tol: float = 1e-9
    threads: int = 1
    vtk: int = 0
    output: str = "."
    rate_threshold: float = 1.0

    def __post_init__(self):
        if not self.bc:
            self.bc = "homogeneous_dirichlet" if self.problem == "laplace" else "simply_supported"
        if self.problem == "laplace" and self.m < 1:
            raise ConfigError("degree must be >= 1 for the second-order problem")
        if self.problem == "biharmonic" and self.m < 2:
            raise ConfigError("degree must be >= 2 for the fourth-order problem")
        if self.k < 1:
            raise ConfigError("k must be >= 1")
        if min(self.eta, self.alpha, self.beta) <= 0:
            raise ConfigError("penalties must be positive")

    def form(self):
        return FormConfig(
            problem=self.problem, bc=self.bc, m=self.m,
            eta=self.eta, alpha=self.alpha, beta=self.beta,
        )


def _load_mesh_one(spec):
    """A single mesh from 'square:n', 'cube:n', or a file path."""
    if spec.startswith("square:"):
        return generate_square_tri(int(spec.split(":", 1)[1]))
    if spec.startswith("cube:"):
        return generate_cube_tet(int(spec.split(":", 1)[1]))
    if not os.path.exists(spec):
        raise ConfigError(f"mesh file not found: {spec}")
    with open(spec, "rb") as fh:
        data = fh.read()
    if spec.endswith(".poly") or spec.endswith(".txt"):
        return parse_poly(data)
    return parse_msh(data)


def _load_mesh_seq(spec):
    """A refinement sequence: 'square:4,8,16' or comma-separated paths."""
    if spec.startswith(("square:", "cube:")):
        kind, sizes = spec.split(":", 1)
        return [_load_mesh_one(f"{kind}:{s}") for s in sizes.split(",")]
    return [_load_mesh_one(p) for p in spec.split(",")]


def _domain_of(spec):
    if spec.startswith("square:"):
        return "square_pi"
    if spec.startswith("cube:"):
        return "cube_unit"
    raise ConfigError("convergence/reliable/source need a generated square:/cube: mesh")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.12g}"


def _write_csv(path, header, rows):
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) if not isinstance(v, str) else v for v in row))
    with open(path, "w", newline="") as fh:
        fh.write("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# VTK export
# --------------------------------------------------------------------------

def export_vtk(mesh, space, vector, path):
    """Legacy ASCII VTK with duplicated per-element points.

    Point data is the reconstructed field evaluated at each element's own
    vertices (so the discontinuities are visible); cell data is the raw
    sampled DOF value.
    """
    vector = np.asarray(vector, dtype=float)
    if len(vector) != mesh.num_elements:
        raise ValueError("vector length must equal the element count")
    points, cells, types, pdata = [], [], [], []
    for K, el in enumerate(mesh.elements):
        coords = mesh.element_coords(K)
        vals = space.evaluate(vector, K, coords)
        start = len(points)
        for c, v in zip(coords, vals):
            xyz = list(c) + [0.0] * (3 - mesh.dim)
            points.append(xyz)
            pdata.append(float(v))
        cells.append([len(el)] + list(range(start, start + len(el))))
        if mesh.element_kind == "polygon":
            types.append(7)
        else:
            types.append(5 if mesh.dim == 2 else 10)

    out = ["# vtk DataFile Version 3.0", "patchdg reconstructed field", "ASCII",
           "DATASET UNSTRUCTURED_GRID", f"POINTS {len(points)} double"]
    for p in points:
        out.append(" ".join(_fmt(c) for c in p))
    size = sum(len(c) for c in cells)
    out.append(f"CELLS {len(cells)} {size}")
    for c in cells:
        out.append(" ".join(str(i) for i in c))
    out.append(f"CELL_TYPES {len(cells)}")
    out.extend(str(t) for t in types)
    out.append(f"POINT_DATA {len(points)}")
    out.append("SCALARS reconstructed double 1")
    out.append("LOOKUP_TABLE default")
    out.extend(_fmt(v) for v in pdata)
    out.append(f"CELL_DATA {len(cells)}")
    out.append("SCALARS sample double 1")
    out.append("LOOKUP_TABLE default")
    out.extend(_fmt(v) for v in vector)
    try:
        with open(path, "w") as fh:
            fh.write("\n".join(out) + "\n")
    except OSError as exc:
        raise IOError(f"cannot write {path}: {exc}") from exc


# --------------------------------------------------------------------------
# commands
# --------------------------------------------------------------------------

def _cmd_solve(cfg):
    mesh = _load_mesh_one(cfg.mesh)
    topo = build_topology(mesh)
    space = build_space(mesh, topo, cfg.m, t=cfg.t, threads=cfg.threads)
    result, A, M = analysis.compute_spectrum(space, cfg.form(), k=cfg.k, tol=cfg.tol)
    rows = [(i + 1, v, r) for i, (v, r) in enumerate(zip(result.values, result.residuals))]
    os.makedirs(cfg.output, exist_ok=True)
    _write_csv(os.path.join(cfg.output, "eigenvalues.csv"), ["index", "value", "residual"], rows)
    for j in range(min(cfg.vtk, len(result.values))):
        export_vtk(mesh, space, result.vectors[:, j],
                   os.path.join(cfg.output, f"eigenfunction_{j + 1:03d}.vtk"))
    if cfg.mesh.startswith(("square:", "cube:")):
        # per-run diagnostic against the known model spectrum
        exact = analysis.exact_spectrum(_domain_of(cfg.mesh), cfg.form().p,
                                        min(10, len(result.values)))
        flags = analysis.above_exact_flags(exact, result, 10)
        print(f"above-exact diagnostic (first {len(flags)}): "
              f"{'all above' if flags.all() else 'NOT all above'}")
    return EXIT_OK


def _cmd_convergence(cfg):
    meshes = _load_mesh_seq(cfg.mesh)
    domain = _domain_of(cfg.mesh)
    study = analysis.convergence_study(meshes, cfg.form(), domain, cfg.target,
                                       t=cfg.t, threads=cfg.threads)
    os.makedirs(cfg.output, exist_ok=True)
    _write_csv(
        os.path.join(cfg.output, "errors.csv"),
        ["scale", "value", "error", "order"],
        [(r.scale, r.value, r.error, r.order) for r in study.eigenvalue_rows],
    )
    _write_csv(
        os.path.join(cfg.output, "errors_eigenfunction.csv"),
        ["scale", "value", "error", "order"],
        [(r.scale, r.value, r.error, r.order) for r in study.eigenfunction_rows],
    )
    return EXIT_OK


def _cmd_reliable(cfg):
    meshes = _load_mesh_seq(cfg.mesh)
    if len(meshes) < 2:
        raise ConfigError("reliable needs at least two meshes (2h and h)")
    domain = _domain_of(cfg.mesh)
    form = cfg.form()
    results, sizes = [], []
    for mesh in meshes:
        topo = build_topology(mesh)
        space = build_space(mesh, topo, cfg.m, t=cfg.t, threads=cfg.threads)
        result, _, _ = analysis.compute_spectrum(space, form, k=None)
        results.append(result)
        sizes.append(mesh_size(mesh))
    rows = []
    for (coarse, fine), h_coarse in zip(zip(results, results[1:]), sizes):
        exact = analysis.exact_spectrum(domain, form.p, len(coarse.values))
        count, pct = analysis.reliable_count(
            exact, fine, coarse, cfg.rate_threshold, error_cap=h_coarse / 4.0
        )
        rows.append((len(fine.values), count, pct))
    os.makedirs(cfg.output, exist_ok=True)
    _write_csv(os.path.join(cfg.output, "reliable.csv"), ["N", "count", "percentage"], rows)
    return EXIT_OK


def _cmd_source(cfg):
    meshes = _load_mesh_seq(cfg.mesh)
    domain = _domain_of(cfg.mesh)
    form = cfg.form()
    if domain == "square_pi":
        u = analysis.sine_product_field((1, 1), 1.0, 1.0)
        lam = 2.0
    else:
        u = analysis.sine_product_field((1, 1, 1), np.pi, 1.0)
        lam = 3.0 * np.pi ** 2
    factor = lam if form.p == 1 else lam ** 2
    f = lambda pts: factor * u.value(pts)
    rows, prev_err = [], None
    for mesh in meshes:
        topo = build_topology(mesh)
        space = build_space(mesh, topo, cfg.m, t=cfg.t, threads=cfg.threads)
        res = analysis.solve_source(space, form, f, exact=u)
        order = analysis.rate(prev_err, res.energy_error) if prev_err is not None else None
        rows.append((mesh_size(mesh), res.energy_error, res.energy_error, order))
        prev_err = res.energy_error
    os.makedirs(cfg.output, exist_ok=True)
    _write_csv(os.path.join(cfg.output, "errors.csv"),
               ["scale", "value", "error", "order"], rows)
    return EXIT_OK


def _cmd_mesh_info(cfg):
    mesh = _load_mesh_one(cfg.mesh)
    topo = build_topology(mesh)
    from .mesh import all_geometries

    geoms = all_geometries(mesh)
    measures = np.array([g.measure for g in geoms])
    print(f"dimension:        {mesh.dim}")
    print(f"element kind:     {mesh.element_kind}")
    print(f"vertices:         {mesh.num_vertices}")
    print(f"elements:         {mesh.num_elements}")
    print(f"faces:            {topo.num_faces} ({int(topo.boundary.sum())} boundary)")
    print(f"total measure:    {_fmt(measures.sum())}")
    print(f"h (max diameter): {_fmt(max(g.diameter for g in geoms))}")
    print(f"measure min/max:  {_fmt(measures.min())} / {_fmt(measures.max())}")
    return EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "convergence": _cmd_convergence,
    "reliable": _cmd_reliable,
    "source": _cmd_source,
    "mesh-info": _cmd_mesh_info,
}

_FILE_KEYS = {
    "problem": str, "bc": str, "m": int, "t": int, "mesh": str, "k": int,
    "target": int, "eta": float, "alpha": float, "beta": float, "tol": float,
    "threads": int, "vtk": int, "output": str, "rate_threshold": float,
}


def _read_config_file(path):
    if not os.path.exists(path):
        raise ConfigError(f"config file not found: {path}")
    values = {}
    with open(path) as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"bad config line (need key=value): {raw.rstrip()}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in _FILE_KEYS:
                raise ConfigError(f"unknown config key: {key}")
            values[key] = _FILE_KEYS[key](val)
    return values


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="patchdg",
        description="Elliptic eigenvalue solver on a patch-reconstructed DG space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", default=None, help="flat key=value config file")
        p.add_argument("--problem", choices=["laplace", "biharmonic"], default=None)
        p.add_argument("--bc", choices=["homogeneous_dirichlet", "clamped", "simply_supported"],
                       default=None)
        p.add_argument("--m", type=int, default=None, help="polynomial degree")
        p.add_argument("--t", type=int, default=None, help="patch size override")
        p.add_argument("--mesh", default=None,
                       help="square:n | cube:n | file.msh | file.poly (lists for sequences)")
        p.add_argument("--k", type=int, default=None, help="eigenpairs requested")
        p.add_argument("--target", type=int, default=None, help="tracked exact eigenvalue rank")
        p.add_argument("--eta", type=float, default=None)
        p.add_argument("--alpha", type=float, default=None)
        p.add_argument("--beta", type=float, default=None)
        p.add_argument("--tol", type=float, default=None)
        p.add_argument("--threads", type=int, default=None)
        p.add_argument("--vtk", type=int, default=None, help="export this many eigenfunctions")
        p.add_argument("--output", default=None)
        p.add_argument("--rate-threshold", dest="rate_threshold", type=float, default=None)
    return parser


def build_config(argv):
    args = _build_parser().parse_args(argv)
    values = {}
    if args.config:
        values.update(_read_config_file(args.config))
    for key in _FILE_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if args.command != "mesh-info" and "threads" not in values:
        env = os.environ.get("PATCHDG_THREADS")
        if env:
            try:
                values["threads"] = int(env)
            except ValueError:
                raise ConfigError(f"PATCHDG_THREADS is not an integer: {env!r}")
    if not values.get("mesh"):
        raise ConfigError("a mesh source is required (--mesh or mesh= in the config file)")
    try:
        return RunConfig(command=args.command, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def run(cfg):
    """Execute a RunConfig; returns the process exit status."""
    return _COMMANDS[cfg.command](cfg)


def main(argv=None):
    try:
        cfg = build_config(argv if argv is not None else sys.argv[1:])
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError,) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run(cfg)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PatchDGError as exc:
        print(f"numerical failure in {cfg.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except IOError as exc:
        print(f"i/o failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
