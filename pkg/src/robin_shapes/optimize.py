"""Perimeter-constrained minimization of Robin eigenvalue functionals.

In constraint mode every candidate is rescaled so its generalized perimeter is
exactly ``p``. Dilation strictly lowers every eigenvalue, so the rescaled
problem is equivalent to the one with ``Prob <= p``. Penalty mode adds
``Λ·Prob`` instead and does not rescale.
"""
from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .assembly import AssemblyError, assemble
from .geometry import (
    Crack,
    GeometryError,
    PlanarDomain,
    PolygonComponent,
    area,
    generalized_perimeter,
    perimeter,
    require_valid,
    scale,
    validate,
)
from .mesh import MeshingError, TriangleMesh, refine, triangulate
from .oracles import disk_robin_eigenvalues
from .shapes import ShapeParams, params_to_dict, realize
from .spectrum import SolverError, Spectrum, smallest_eigenpairs

DEFAULT_H_FACTOR = 0.03
TIE_TOL = 1e-12
COMBINERS = ("single", "sum", "pnorm")


def worker_count() -> int:
    """Worker cap from ``ROBIN_SHAPES_THREADS`` (default 1)."""
    try:
        return max(1, int(os.environ.get("ROBIN_SHAPES_THREADS", "1")))
    except ValueError:
        return 1


def project_to_perimeter(domain: PlanarDomain, p: float) -> PlanarDomain:
    """Rescale about the origin so the generalized perimeter equals ``p``."""
    if not p > 0:
        raise ValueError(f"target perimeter must be positive, got {p}")
    current = generalized_perimeter(domain)
    if current == p:
        return domain
    return scale(domain, p / current)


@dataclass(frozen=True)
class Objective:
    """F = f(λ_{k_1}, ..., λ_{k_l}) in constraint (``perimeter``) or penalty mode.

    Every combiner is nondecreasing in each argument and coercive. For
    ``sum`` the strict-monotonicity constant is 1. For ``pnorm`` with
    exponent q it is min_i (y_i / f(y))^(q-1) on the values met, see
    :meth:`monotonicity_constant`.
    """

    indices: tuple[int, ...] = (1,)
    combiner: str = "single"
    q: float = 2.0
    beta: float = 1.0
    perimeter: float | None = 2.0 * math.pi
    penalty: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "indices", tuple(sorted(int(i) for i in self.indices)))
        if not self.indices or self.indices[0] < 1:
            raise ValueError("eigenvalue indices must be >= 1")
        if self.combiner not in COMBINERS:
            raise ValueError(f"combiner must be one of {COMBINERS}")
        if self.combiner == "single" and len(self.indices) != 1:
            raise ValueError("the single combiner takes exactly one index")
        if self.combiner == "pnorm" and not self.q >= 1:
            raise ValueError("pnorm exponent must be >= 1")
        if (self.perimeter is None) == (self.penalty is None):
            raise ValueError("give exactly one of perimeter (constraint) or penalty")
        if self.perimeter is not None and not self.perimeter > 0:
            raise ValueError("perimeter must be positive")
        if self.penalty is not None and not self.penalty > 0:
            raise ValueError("penalty must be positive")
        if not self.beta >= 0:
            raise ValueError("beta must be nonnegative")

    @property
    def mode(self) -> str:
        return "constraint" if self.perimeter is not None else "penalty"

    @property
    def k_max(self) -> int:
        return self.indices[-1]

    def combine(self, values: Sequence[float]) -> float:
        y = np.asarray(values, dtype=float)
        if self.combiner in ("single", "sum"):
            return float(math.fsum(y))
        return float(np.sum(y ** self.q) ** (1.0 / self.q))

    def monotonicity_constant(self, values: Sequence[float]) -> float:
        y = np.asarray(values, dtype=float)
        if self.combiner in ("single", "sum"):
            return 1.0
        f = self.combine(y)
        return float(np.min((y / f) ** (self.q - 1.0)))

    def to_dict(self) -> dict:
        return {"indices": list(self.indices), "combiner": self.combiner, "q": self.q, "beta": self.beta,
                "perimeter": self.perimeter, "penalty": self.penalty}


@dataclass(frozen=True, eq=False)
class Evaluation:
    value: float
    lambdas: np.ndarray
    prob: float
    h: float
    params: ShapeParams
    domain: PlanarDomain | None = None
    spectrum: Spectrum | None = None
    mesh: TriangleMesh | None = None
    status: str = "ok"
    message: str = ""

    @property
    def feasible(self) -> bool:
        return self.status == "ok"


def evaluate(objective: Objective, params: ShapeParams, h: float | None = None,
             h_factor: float = DEFAULT_H_FACTOR, seed: int = 0) -> Evaluation:
    """realize -> project (constraint mode) -> mesh -> assemble -> solve -> combine.

    Failures anywhere in the chain give an infeasible evaluation with value +inf.
    """
    try:
        dom = realize(params)
        if objective.mode == "constraint":
            dom = project_to_perimeter(dom, objective.perimeter)
        prob = generalized_perimeter(dom)
        hh = h if h is not None else h_factor * math.sqrt(area(dom))
        mesh = triangulate(dom, hh)
        system = assemble(mesh, objective.beta)
        spec = smallest_eigenpairs(system, objective.k_max, seed=seed)
    except (GeometryError, MeshingError, AssemblyError, SolverError, ValueError) as exc:
        return Evaluation(math.inf, np.zeros(0), math.nan, math.nan if h is None else h, params,
                          status="infeasible", message=str(exc))
    lams = spec.eigenvalues[np.array(objective.indices) - 1]
    value = objective.combine(lams)
    if objective.mode == "penalty":
        value += objective.penalty * prob
    return Evaluation(value, lams, prob, hh, params, dom, spec, mesh)


# ---------------------------------------------------------------------------
# Nelder-Mead

@dataclass(eq=False)
class OptimizationRun:
    params_trajectory: list = field(default_factory=list)
    objective_trajectory: list = field(default_factory=list)
    best_params: ShapeParams | None = None
    best_domain: PlanarDomain | None = None
    best_value: float = math.inf
    best_evaluation: Evaluation | None = None
    evaluations: int = 0
    seed: int = 0
    mesh_policy: dict = field(default_factory=dict)
    records: list = field(default_factory=list)
    timings_ms: list = field(default_factory=list)
    polished: Evaluation | None = None

    def log_lines(self) -> list[str]:
        """One JSON object per evaluation; no timing data, so runs are byte-reproducible."""
        return [json.dumps(r, sort_keys=True) for r in self.records]

    def summary(self) -> dict:
        best = self.best_evaluation
        out = {
            "best_value": self.best_value,
            "best_params": None if self.best_params is None else params_to_dict(self.best_params),
            "best_lambdas": [] if best is None else best.lambdas.tolist(),
            "best_prob": None if best is None else best.prob,
            "evaluations": self.evaluations,
            "seed": self.seed,
            "mesh_policy": self.mesh_policy,
        }
        if self.polished is not None:
            out["polished_value"] = self.polished.value
            out["polished_lambdas"] = self.polished.lambdas.tolist()
        return out


def _record(index: int, ev: Evaluation) -> dict:
    return {
        "iter": index,
        "params": params_to_dict(ev.params),
        "prob": None if math.isnan(ev.prob) else ev.prob,
        "lambdas": ev.lambdas.tolist(),
        "objective": ev.value if math.isfinite(ev.value) else None,
        "status": ev.status,
    }


def nelder_mead(objective: Objective, init: ShapeParams, budget: int, seed: int = 0,
                h: float | None = None, h_factor: float = DEFAULT_H_FACTOR,
                workers: int | None = None, polish: bool = True,
                on_evaluation: Callable[[dict], None] | None = None,
                xtol: float = 1e-7, ftol: float = 1e-13) -> OptimizationRun:
    """Nelder-Mead (reflection 1, expansion 2, contraction 0.5, shrink 0.5) over ``init.vector()``.

    The initial simplex perturbs one coordinate per vertex by 5% of that
    parameter's range, with seeded random signs. Points outside the box
    bounds count as infeasible. Batched evaluations (initial simplex,
    shrink) may run in parallel but are merged in index order.
    """
    x0, lo, hi = init.vector()
    dim = len(x0)
    if budget != 0 and budget < dim + 1:
        raise ValueError(f"budget {budget} is below dim + 1 = {dim + 1}")
    workers = worker_count() if workers is None else max(1, workers)
    run = OptimizationRun(seed=seed, mesh_policy={"h": h, "h_factor": h_factor, "polish_factor": 0.5})
    best_key = [math.inf]

    def run_one(x):
        x = np.asarray(x, dtype=float)
        params = init.with_vector(x)
        start = time.perf_counter()
        if np.any(x < lo) or np.any(x > hi):
            ev = Evaluation(math.inf, np.zeros(0), math.nan, math.nan, params,
                            status="infeasible", message="outside parameter bounds")
        else:
            ev = evaluate(objective, params, h=h, h_factor=h_factor, seed=seed)
        return ev, 1000.0 * (time.perf_counter() - start)

    def consume(results):
        values = []
        for ev, ms in results:
            rec = _record(run.evaluations, ev)
            run.records.append(rec)
            run.timings_ms.append(ms)
            run.evaluations += 1
            if on_evaluation is not None:
                on_evaluation(rec)
            if ev.value < best_key[0] - TIE_TOL or (run.best_evaluation is None and ev.feasible):
                best_key[0] = ev.value
                run.best_value = ev.value
                run.best_params = ev.params
                run.best_domain = ev.domain
                run.best_evaluation = ev
            values.append(ev.value)
        return values

    def batch(points):
        points = [np.asarray(p, float) for p in points]
        if workers > 1 and len(points) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(run_one, points))
        else:
            results = [run_one(p) for p in points]
        return consume(results)

    def mark():
        run.params_trajectory.append(run.best_params)
        run.objective_trajectory.append(run.best_value)

    f0 = batch([x0])[0]
    mark()
    if budget == 0 or budget <= 1:
        run.best_params = run.best_params or init
        return _finish(run, objective, h, h_factor, seed, polish)

    rng = np.random.default_rng(seed)
    signs = rng.choice([-1.0, 1.0], size=dim)
    simplex = [x0]
    for i in range(dim):
        x = x0.copy()
        x[i] += 0.05 * (hi[i] - lo[i]) * signs[i]
        simplex.append(x)
    fvals = [f0] + batch(simplex[1:])
    mark()

    while run.evaluations < budget:
        order = np.argsort(np.asarray(fvals), kind="stable")
        simplex = [simplex[i] for i in order]
        fvals = [fvals[i] for i in order]
        spread = max(np.max(np.abs(np.array(simplex[1:]) - simplex[0])), 0.0)
        if math.isfinite(fvals[-1]) and fvals[-1] - fvals[0] <= ftol * max(1.0, abs(fvals[0])) and spread <= xtol:
            break
        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]
        xr = centroid + 1.0 * (centroid - worst)
        fr = batch([xr])[0]
        if fr < fvals[0]:
            if run.evaluations >= budget:
                simplex[-1], fvals[-1] = xr, fr
            else:
                xe = centroid + 2.0 * (centroid - worst)
                fe = batch([xe])[0]
                if fe < fr:
                    simplex[-1], fvals[-1] = xe, fe
                else:
                    simplex[-1], fvals[-1] = xr, fr
        elif fr < fvals[-2]:
            simplex[-1], fvals[-1] = xr, fr
        elif run.evaluations < budget:
            if fr < fvals[-1]:
                xc = centroid + 0.5 * (xr - centroid)
                fc = batch([xc])[0]
                accept = fc <= fr
            else:
                xc = centroid + 0.5 * (worst - centroid)
                fc = batch([xc])[0]
                accept = fc < fvals[-1]
            if accept:
                simplex[-1], fvals[-1] = xc, fc
            else:
                remaining = budget - run.evaluations
                if remaining <= 0:
                    mark()
                    break
                best = simplex[0]
                shrunk = [best + 0.5 * (x - best) for x in simplex[1:]][:remaining]
                new_f = batch(shrunk)
                for j, (x, fx) in enumerate(zip(shrunk, new_f), start=1):
                    simplex[j], fvals[j] = x, fx
        mark()
    return _finish(run, objective, h, h_factor, seed, polish)


def _finish(run: OptimizationRun, objective, h, h_factor, seed, polish) -> OptimizationRun:
    if polish and run.best_evaluation is not None and run.best_evaluation.feasible:
        hh = run.best_evaluation.h / 2.0
        run.polished = evaluate(objective, run.best_params, h=hh, seed=seed)
    return run


# ---------------------------------------------------------------------------
# two-ball candidates

def disk_eigenvalue(perimeter_: float, beta: float, index: int) -> float:
    """λ_index of the disk with the given circumference; λ_0 := 0."""
    if index == 0:
        return 0.0
    radius = perimeter_ / (2.0 * math.pi)
    return float(disk_robin_eigenvalues(radius, beta, index).eigenvalues[index - 1])


def golden_section(f, a: float, b: float, tol: float = 1e-8) -> tuple[float, float]:
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class TwoBallResult:
    value: float
    split_index: int
    p1: float
    p2: float
    single_ball: float
    per_split: tuple[tuple[int, float, float], ...]


def two_ball_candidate(k: int, beta: float, p: float, tol: float = 1e-8) -> TwoBallResult:
    """Best value of min_i max{λ_i(B_1), λ_{k-i}(B_2)} over perimeter splits p1 + p2 = p.

    i = 0 and i = k mean a single ball of perimeter p.
    """
    if k < 1 or not p > 0:
        raise ValueError("need k >= 1 and p > 0")
    single = disk_eigenvalue(p, beta, k)
    best = (single, 0, p, 0.0)
    per_split = [(0, p, single)]
    for i in range(1, k):
        def f(p1, i=i):
            return max(disk_eigenvalue(p1, beta, i), disk_eigenvalue(p - p1, beta, k - i))

        p1, val = golden_section(f, 1e-6 * p, (1.0 - 1e-6) * p, tol)
        per_split.append((i, p1, val))
        if val < best[0] - TIE_TOL:
            best = (val, i, p1, p - p1)
    per_split.append((k, p, single))
    return TwoBallResult(best[0], best[1], best[2], best[3], single, tuple(per_split))


# ---------------------------------------------------------------------------
# slit widening

def channel_polygon(points: np.ndarray, width: float) -> np.ndarray:
    """Clockwise polygon of the w-channel around a polyline (flat ends at the tips)."""
    pts = np.asarray(points, dtype=float)
    d = np.diff(pts, axis=0)
    n = np.column_stack([-d[:, 1], d[:, 0]]) / np.hypot(d[:, 0], d[:, 1])[:, None]
    offs = np.empty_like(pts)
    offs[0], offs[-1] = n[0], n[-1]
    for i in range(1, len(pts) - 1):
        m = n[i - 1] + n[i]
        m /= np.hypot(*m)
        offs[i] = m / float(m @ n[i])
    half = 0.5 * width
    poly = np.concatenate([pts + half * offs, (pts - half * offs)[::-1]])
    from .geometry import signed_area

    return poly[::-1] if signed_area(poly) > 0 else poly


def widened_domain(host: PlanarDomain, crack: np.ndarray, width: float, component: int = 0) -> PlanarDomain:
    """``host`` minus the closed channel of ``width`` around ``crack`` (a Lipschitz domain)."""
    hole = channel_polygon(crack, width)
    comps = list(host.components)
    c = comps[component]
    comps[component] = PolygonComponent(c.outer, c.holes + (hole,))
    dom = PlanarDomain(tuple(comps), host.cracks, host.clearance)
    report = validate(dom)
    if not report.ok:
        raise GeometryError(f"channel intersects boundary: {report}", report)
    return dom


def richardson(values: Sequence[np.ndarray], ratio: float = 2.0):
    """Richardson extrapolation from three levels h, h/r, h/r²; returns (limit, order)."""
    a, b, c = (np.asarray(v, dtype=float) for v in values)
    with np.errstate(divide="ignore", invalid="ignore"):
        q = (a - b) / (b - c)
        order = np.log(np.abs(q)) / math.log(ratio)
        limit = c + (c - b) / (ratio ** order - 1.0)
    return limit, order


def refined_eigenvalues(domain: PlanarDomain, h: float, beta: float, k: int, levels: int = 3,
                        seed: int = 0) -> list[np.ndarray]:
    """λ_1..λ_k on triangulate(domain, h) and its uniform refinements."""
    mesh = triangulate(domain, h)
    out = []
    for level in range(levels):
        if level:
            mesh = refine(mesh)
        out.append(smallest_eigenpairs(assemble(mesh, beta), k, seed=seed).eigenvalues.copy())
    return out


@dataclass(frozen=True)
class WidenRow:
    width: float
    perimeter: float
    prob: float
    lambdas: np.ndarray
    crack_lambdas: np.ndarray

    @property
    def gaps(self) -> np.ndarray:
        return np.abs(self.lambdas - self.crack_lambdas) / self.crack_lambdas


@dataclass(frozen=True)
class WidenResult:
    rows: tuple[WidenRow, ...]
    crack_levels: tuple[np.ndarray, ...]
    crack_lambdas: np.ndarray
    crack_order: np.ndarray

    def to_csv(self) -> str:
        k = len(self.crack_lambdas)
        head = ["width", "perimeter", "prob"] + [f"lambda_{j + 1}" for j in range(k)] \
            + [f"crack_lambda_{j + 1}" for j in range(k)] + [f"gap_{j + 1}" for j in range(k)]
        lines = [",".join(head)]
        for r in self.rows:
            vals = [r.width, r.perimeter, r.prob, *r.lambdas, *r.crack_lambdas, *r.gaps]
            lines.append(",".join(repr(float(v)) for v in vals))
        return "\n".join(lines) + "\n"


def slit_widening_experiment(host: PlanarDomain, crack, widths: Sequence[float], beta: float, k: int,
                             h: float = 0.05, levels: int = 3, seed: int = 0) -> WidenResult:
    """Compare the cracked configuration with Lipschitz domains whose slit is opened to width w.

    Both sides use ``levels`` uniform refinements of a mesh at ``h`` and
    Richardson extrapolation over the last three levels.
    """
    widths = [float(w) for w in widths]
    if any(w <= 0 for w in widths) or any(b >= a for a, b in zip(widths, widths[1:])):
        raise ValueError("widths must be positive and strictly decreasing")
    crack = np.asarray(crack, dtype=float)
    cracked = require_valid(PlanarDomain(host.components, host.cracks + (Crack(crack, 0),), host.clearance))
    crack_levels = refined_eigenvalues(cracked, h, beta, k, levels, seed)
    crack_lim, crack_order = richardson(crack_levels[-3:])
    prob = generalized_perimeter(cracked)
    rows = []
    for w in widths:
        dom = widened_domain(host, crack, w)
        levels_w = refined_eigenvalues(dom, min(h, 2.0 * w), beta, k, levels, seed)
        lim_w, _ = richardson(levels_w[-3:])
        rows.append(WidenRow(w, perimeter(dom), prob, lim_w, crack_lim))
    return WidenResult(tuple(rows), tuple(crack_levels), crack_lim, crack_order)


# ---------------------------------------------------------------------------
# cut probe

@dataclass(frozen=True)
class CutRow:
    t: float
    lambda_cut: float
    lambda_full: float
    section: float

    @property
    def difference(self) -> float:
        return self.lambda_cut - self.lambda_full

    @property
    def ratio(self) -> float:
        return self.difference / self.section if self.section > 0 else math.nan


def cut_domain(domain: PlanarDomain, t: float) -> tuple[PlanarDomain, float]:
    """(Ω ∩ {x < t}, Γ ∩ {x < t}) and the section length |Ω ∩ {x = t}|."""
    from shapely.geometry import LineString, Polygon, box
    from shapely.geometry.polygon import orient

    x0, y0, x1, y1 = domain.bounds
    if t >= x1:
        return domain, 0.0
    if t <= x0:
        raise GeometryError("cut leaves an empty domain")
    half = box(x0 - 1.0, y0 - 1.0, t, y1 + 1.0)
    line = LineString([(t, y0 - 1.0), (t, y1 + 1.0)])
    comps, owners, section = [], [], 0.0
    for ci, comp in enumerate(domain.components):
        poly = Polygon(comp.outer, comp.holes)
        section += poly.intersection(line).length
        piece = poly.intersection(half)
        for g in getattr(piece, "geoms", [piece]):
            if g.geom_type != "Polygon" or g.is_empty or g.area <= 0:
                continue
            g = orient(g, sign=1.0)
            comps.append(PolygonComponent(np.asarray(g.exterior.coords)[:-1],
                                          tuple(np.asarray(r.coords)[:-1] for r in g.interiors)))
            owners.append(g)
    if not comps:
        raise GeometryError("cut leaves an empty domain")
    cracks = []
    for crack in domain.cracks:
        clipped = LineString(crack.points).intersection(half)
        for g in getattr(clipped, "geoms", [clipped]):
            if g.geom_type != "LineString" or g.is_empty or g.length <= 0:
                continue
            pts = np.asarray(g.coords)
            mid = LineString(pts).interpolate(0.5, normalized=True)
            owner = next((i for i, o in enumerate(owners) if o.contains(mid)), 0)
            cracks.append(Crack(pts, owner))
    out = PlanarDomain(tuple(comps), tuple(cracks), domain.effective_clearance)
    report = validate(out)
    if not report.ok:
        raise GeometryError(f"degenerate cut geometry: {report}", report)
    return out, float(section)


def cut_probe(domain: PlanarDomain, t_values: Sequence[float], beta: float, k: int, h: float,
              seed: int = 0) -> list[CutRow]:
    """λ_k(Ω_t) - λ_k(Ω) against the section length, for each cut position t."""
    full = smallest_eigenpairs(assemble(triangulate(domain, h), beta), k, seed=seed).eigenvalues[k - 1]
    rows = []
    for t in t_values:
        cut, section = cut_domain(domain, float(t))
        if cut is domain:
            lam = full
        else:
            lam = smallest_eigenpairs(assemble(triangulate(cut, h), beta), k, seed=seed).eigenvalues[k - 1]
        rows.append(CutRow(float(t), float(lam), float(full), section))
    return rows
