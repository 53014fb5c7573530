"""Command line entry point: ``robin-shapes {solve,oracle,optimize,verify,widen,mesh}``.

Every flag has a JSON config equivalent (same key as the flag, dashes as
underscores). Values from ``--config`` are applied first and explicit flags
override them.

Exit codes: 0 success, 1 bad input, 2 solver failure, 3 verification failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from dataclasses import dataclass, fields
from pathlib import Path

import numpy as np

from .assembly import AssemblyError, assemble
from .geometry import GeometryError, PlanarDomain, area, load_domain, require_valid, unit_square
from .mesh import MeshingError, mesh_to_text, triangulate
from .optimize import Objective, nelder_mead, slit_widening_experiment
from .oracles import disk_robin_eigenvalues, interval_robin_eigenvalues, rectangle_robin_eigenvalues
from .render import eigenfunction_svg, mesh_svg
from .shapes import params_from_dict, perturbed_circle, realize
from .spectrum import SolverError, smallest_eigenpairs

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_VERIFY = 0, 1, 2, 3
EXPORTS = ("csv", "svg", "jsonl", "mesh")
DEFAULT_SLIT = (0.25, 0.5, 0.75, 0.5)


class InputError(ValueError):
    pass


@dataclass
class RunConfig:
    subcommand: str
    geometry: str | None = None
    params: dict | None = None
    beta: float = 1.0
    k: int = 1
    objective: str = "single"
    indices: tuple[int, ...] | None = None
    perimeter: float | None = None
    penalty: float | None = None
    h: float | None = None
    seed: int = 0
    out: str = "."
    export: tuple[str, ...] = ("csv", "jsonl", "svg")
    filter: tuple[str, ...] | None = None
    budget: int = 200
    widths: tuple[float, ...] = (0.04, 0.02, 0.01)
    crack: tuple[float, ...] = DEFAULT_SLIT
    kind: str | None = None
    length: float = 1.0
    width: float = 1.0
    height: float = 1.0
    radius: float = 1.0
    perturb_boundary: float = 1.0

    def __post_init__(self):
        if not self.beta >= 0:
            raise InputError(f"beta must be nonnegative, got {self.beta}")
        if not self.k >= 1:
            raise InputError(f"k must be >= 1, got {self.k}")
        if self.perimeter is not None and self.penalty is not None:
            raise InputError("give at most one of --perimeter and --penalty")
        if self.geometry is not None and self.params is not None:
            raise InputError("give at most one of --geometry and --params")
        bad = [e for e in self.export if e not in EXPORTS]
        if bad:
            raise InputError(f"unknown export kind(s): {', '.join(bad)}")

    @property
    def out_dir(self) -> Path:
        path = Path(self.out)
        path.mkdir(parents=True, exist_ok=True)
        return path

    def exports(self, kind: str) -> bool:
        return kind in self.export


# ---------------------------------------------------------------------------
# parsing

def _csv_list(cast):
    def parse(text: str):
        return tuple(cast(p) for p in text.split(",") if p.strip())
    return parse


def _json_arg(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="robin-shapes", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="subcommand", required=True)
    S = argparse.SUPPRESS

    def common(p, geometry=True):
        p.add_argument("--config", type=Path, default=S, help="JSON config; flags override it")
        p.add_argument("--out", default=S, help="output directory")
        p.add_argument("--export", type=_csv_list(str), default=S, help="comma list of csv,svg,jsonl,mesh")
        p.add_argument("--seed", type=int, default=S)
        if geometry:
            p.add_argument("--geometry", default=S, help="PlanarDomain JSON file")
            p.add_argument("--params", type=_json_arg, default=S, help="inline ShapeParams JSON")
            p.add_argument("--h", type=float, default=S, help="target mesh size")
        return p

    p = common(sub.add_parser("solve", help="smallest Robin eigenvalues of a domain"))
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--k", type=int, default=S)

    p = common(sub.add_parser("mesh", help="triangulate a domain and export it"))

    p = common(sub.add_parser("oracle", help="closed-form reference spectra as CSV"), geometry=False)
    p.add_argument("kind", nargs="?", choices=("interval", "rectangle", "disk"), default=S)
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--k", type=int, default=S)
    p.add_argument("--length", type=float, default=S)
    p.add_argument("--width", type=float, default=S)
    p.add_argument("--height", type=float, default=S)
    p.add_argument("--radius", type=float, default=S)

    p = common(sub.add_parser("optimize", help="perimeter-constrained Nelder-Mead"))
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--k", type=int, default=S, help="shorthand for --indices K")
    p.add_argument("--objective", default=S, help="single | sum | pnorm:q")
    p.add_argument("--indices", type=_csv_list(int), default=S)
    group = p.add_mutually_exclusive_group()
    group.add_argument("--perimeter", type=float, default=S)
    group.add_argument("--penalty", type=float, default=S)
    p.add_argument("--budget", type=int, default=S)

    p = common(sub.add_parser("verify", help="run invariant suites"), geometry=False)
    p.add_argument("--filter", type=_csv_list(str), default=S, help="comma list of suite names")
    p.add_argument("--perturb-boundary", type=float, default=S, help="multiply B in the scaling suite")

    p = common(sub.add_parser("widen", help="slit widening experiment"))
    p.add_argument("--beta", type=float, default=S)
    p.add_argument("--k", type=int, default=S)
    p.add_argument("--widths", type=_csv_list(float), default=S)
    p.add_argument("--crack", type=_csv_list(float), default=S, help="x0,y0,x1,y1,... polyline")
    return parser


def config_from_args(argv: list[str] | None = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    merged: dict = {}
    path = args.pop("config", None)
    if path is not None:
        try:
            merged.update(json.loads(Path(path).read_text()))
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read config {path}: {exc}") from exc
    merged.update(args)
    known = {f.name for f in fields(RunConfig)}
    unknown = sorted(set(merged) - known)
    if unknown:
        raise InputError(f"unknown config key(s): {', '.join(unknown)}")
    for key in ("indices", "export", "filter", "widths", "crack"):
        if isinstance(merged.get(key), list):
            merged[key] = tuple(merged[key])
    return RunConfig(**merged)


# ---------------------------------------------------------------------------
# helpers

def _domain(config: RunConfig, default: PlanarDomain | None = None) -> PlanarDomain:
    if config.geometry is not None:
        try:
            return require_valid(load_domain(config.geometry))
        except (OSError, json.JSONDecodeError, KeyError, TypeError) as exc:
            raise InputError(f"cannot read geometry {config.geometry}: {exc}") from exc
    if config.params is not None:
        return realize(params_from_dict(config.params))
    if default is not None:
        return default
    raise InputError("need --geometry or --params")


def _h(config: RunConfig, domain: PlanarDomain, factor: float = 0.05) -> float:
    return config.h if config.h is not None else factor * math.sqrt(area(domain))


def _write(config: RunConfig, name: str, text: str) -> Path:
    path = config.out_dir / name
    path.write_text(text)
    return path


def _metadata(config: RunConfig, started: float, **extra) -> None:
    meta = {"timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"), "wall_s": time.perf_counter() - started}
    meta.update(extra)
    _write(config, "metadata.json", json.dumps(meta, indent=2) + "\n")


# ---------------------------------------------------------------------------
# commands

def cmd_solve(config: RunConfig) -> int:
    dom = _domain(config)
    mesh = triangulate(dom, _h(config, dom))
    spec = smallest_eigenpairs(assemble(mesh, config.beta), config.k, seed=config.seed)
    csv = spec.to_csv()
    sys.stdout.write(csv)
    if config.exports("csv"):
        _write(config, "spectrum.csv", csv)
    if config.exports("svg"):
        _write(config, "eigenfunction_1.svg", eigenfunction_svg(mesh, spec.eigenvectors[:, 0], dom))
    if config.exports("mesh"):
        _write(config, "mesh.txt", mesh_to_text(mesh, spec.eigenvectors[:, 0]))
    return EXIT_OK


def cmd_mesh(config: RunConfig) -> int:
    dom = _domain(config)
    mesh = triangulate(dom, _h(config, dom))
    _write(config, "mesh.txt", mesh_to_text(mesh))
    if config.exports("svg"):
        _write(config, "mesh.svg", mesh_svg(mesh))
    print(f"nodes {mesh.n_nodes} triangles {mesh.n_triangles} bedges {len(mesh.boundary_edges)}")
    return EXIT_OK


def cmd_oracle(config: RunConfig) -> int:
    if config.kind == "interval":
        spec = interval_robin_eigenvalues(config.length, config.beta, config.k)
    elif config.kind == "rectangle":
        spec = rectangle_robin_eigenvalues(config.width, config.height, config.beta, config.k)
    elif config.kind == "disk":
        spec = disk_robin_eigenvalues(config.radius, config.beta, config.k)
    else:
        raise InputError("oracle kind must be interval, rectangle or disk")
    csv = "k,lambda\n" + "".join(f"{i + 1},{v!r}\n" for i, v in enumerate(spec.eigenvalues.tolist()))
    sys.stdout.write(csv)
    if config.exports("csv") and config.out != ".":
        _write(config, f"oracle_{config.kind}.csv", csv)
    return EXIT_OK


def _objective(config: RunConfig) -> Objective:
    indices = config.indices if config.indices is not None else (config.k,)
    name, _, q = config.objective.partition(":")
    if name == "pnorm" and not q:
        raise InputError("pnorm needs an exponent, as in pnorm:2")
    perimeter = config.perimeter
    if perimeter is None and config.penalty is None:
        perimeter = 2.0 * math.pi
    return Objective(indices=indices, combiner=name, q=float(q) if q else 2.0, beta=config.beta,
                     perimeter=perimeter, penalty=config.penalty)


def cmd_optimize(config: RunConfig) -> int:
    started = time.perf_counter()
    objective = _objective(config)
    init = params_from_dict(config.params) if config.params is not None else perturbed_circle(config.seed)
    run = nelder_mead(objective, init, config.budget, seed=config.seed, h=config.h)
    if run.best_evaluation is None or not run.best_evaluation.feasible:
        raise SolverError("no feasible evaluation")
    summary = {"objective": objective.to_dict(), **run.summary()}
    _write(config, "summary.json", json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if config.exports("jsonl"):
        _write(config, "evaluations.jsonl", "".join(line + "\n" for line in run.log_lines()))
    final = run.polished if run.polished is not None and run.polished.feasible else run.best_evaluation
    if config.exports("svg"):
        svg = eigenfunction_svg(final.mesh, final.spectrum.eigenvectors[:, 0], final.domain)
        _write(config, "best.svg", svg)
    _metadata(config, started, wall_ms=run.timings_ms)
    print(json.dumps({"best_value": run.best_value, "evaluations": run.evaluations}))
    return EXIT_OK


def cmd_widen(config: RunConfig) -> int:
    started = time.perf_counter()
    host = _domain(config, default=unit_square())
    pts = np.asarray(config.crack, dtype=float)
    if pts.size < 4 or pts.size % 2:
        raise InputError("--crack needs an even number (>= 4) of coordinates")
    h = config.h if config.h is not None else 0.02
    result = slit_widening_experiment(host, pts.reshape(-1, 2), config.widths, config.beta, config.k, h=h,
                                      seed=config.seed)
    csv = result.to_csv()
    sys.stdout.write(csv)
    if config.exports("csv"):
        _write(config, "widen.csv", csv)
    _metadata(config, started, crack_order=result.crack_order.tolist())
    return EXIT_OK


def cmd_verify(config: RunConfig) -> int:
    from .verify import run_suites

    results = run_suites(config.filter, boundary_factor=config.perturb_boundary)
    for r in results:
        print(r.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


COMMANDS = {
    "solve": cmd_solve,
    "mesh": cmd_mesh,
    "oracle": cmd_oracle,
    "optimize": cmd_optimize,
    "widen": cmd_widen,
    "verify": cmd_verify,
}


def main(argv: list[str] | None = None) -> int:
    try:
        config = config_from_args(argv)
    except SystemExit as exc:  # argparse usage errors
        return EXIT_OK if exc.code == 0 else EXIT_INPUT
    except (InputError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return COMMANDS[config.subcommand](config)
    except (SolverError, MeshingError, AssemblyError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (InputError, GeometryError, ValueError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
