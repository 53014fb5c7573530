"""Self-contained invariant suites shared by ``robin-shapes verify`` and the tests.

Each check returns a :class:`CheckResult`; none of them raise on failure.
The default arguments are sized for a quick run. The acceptance tests call
the same functions with the full sizes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable

import numpy as np

from .assembly import DiscreteSystem, SymmetricSparseMatrix, assemble
from .geometry import (
    area,
    disjoint_union,
    rectangle,
    regular_polygon_disk,
    scale,
    square_with_slit,
    unit_square,
)
from .mesh import refine, triangulate
from .oracles import dense_generalized_eig, disk_robin_eigenvalues, rectangle_robin_eigenvalues
from .optimize import richardson
from .shapes import random_star, realize
from .spectrum import smallest_eigenpairs


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    error: float
    tolerance: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name:<22} error={self.error:.3e}  tol={self.tolerance:.1e}  {self.detail}"


def _eigs(system: DiscreteSystem, k: int, **kw) -> np.ndarray:
    return smallest_eigenpairs(system, k, **kw).eigenvalues


def _rel(a, b, floor: float = 0.0) -> float:
    a, b = np.asarray(a, float), np.asarray(b, float)
    return float(np.max(np.abs(a - b) / np.maximum(np.abs(b), floor)))


def _scaled_B(system: DiscreteSystem, factor: float) -> DiscreteSystem:
    B = system.B
    B = SymmetricSparseMatrix(B.n, B.indptr.copy(), B.indices.copy(), B.data * factor)
    return DiscreteSystem(system.K, system.M, B, system.beta, system.mesh)


def check_scaling(ts: Iterable[float] = (0.5, 2.0, 3.0), k: int = 5, beta: float = 1.0, h: float = 0.1,
                  boundary_factor: float = 1.0, tol: float = 1e-10) -> CheckResult:
    """λ_k(tΩ, β) = t⁻² λ_k(Ω, tβ) on the slit square, mesh scaled node by node.

    ``boundary_factor`` multiplies B on the scaled system; anything but 1
    must break the identity.
    """
    mesh = triangulate(square_with_slit(), h)
    base = assemble(mesh, beta)
    worst = 0.0
    for t in ts:
        scaled = assemble(mesh.scaled(t), beta)
        if boundary_factor != 1.0:
            scaled = _scaled_B(scaled, boundary_factor)
        lhs = _eigs(scaled, k)
        rhs = _eigs(base.with_beta(t * beta), k) / t ** 2
        worst = max(worst, _rel(lhs, rhs))
    return CheckResult("scaling", worst <= tol, worst, tol, f"t in {tuple(ts)}, k<={k}")


def union_split_value(first: np.ndarray, second: np.ndarray, k: int) -> float:
    """min over i of max{λ_i(Ω₁), λ_{k-i}(Ω₂)} with λ_0 = 0."""
    a = np.concatenate([[0.0], first])
    b = np.concatenate([[0.0], second])
    best = math.inf
    for i in range(max(0, k - len(second)), min(k, len(first)) + 1):
        best = min(best, max(a[i], b[k - i]))
    return best


def check_union(k: int = 6, beta: float = 1.0, h: float = 0.1, tol: float = 1e-10) -> CheckResult:
    """Union spectrum equals the merged component spectra and the split formula."""
    d1 = square_with_slit()
    d2 = rectangle(1.0, 0.5)
    union = disjoint_union(d1, d2, offset=(2.0, 0.0))
    e1 = _eigs(assemble(triangulate(d1, h), beta), k)
    e2 = _eigs(assemble(triangulate(d2, h), beta), k)
    eu = _eigs(assemble(triangulate(union, h), beta), k)
    merged = np.sort(np.concatenate([e1, e2]))[:k]
    err = _rel(eu, merged)
    split = np.array([union_split_value(e1, e2, j) for j in range(1, k + 1)])
    exact = bool(np.array_equal(split, merged))
    return CheckResult("union", err <= tol and exact, err, tol, f"split formula exact={exact}")


def _seeded_domains(seeds: Iterable[int]):
    return [realize(random_star(s)) for s in seeds]


def check_monotonicity(seeds: Iterable[int] = range(3), betas=(0.5, 1.0, 2.0, 4.0), k: int = 4,
                       h: float = 0.15, slack: float = 1e-12) -> CheckResult:
    """λ_k nondecreasing in β and strictly decreasing under dilation by 2."""
    worst_beta, worst_dil = 0.0, -math.inf
    for dom in _seeded_domains(seeds):
        mesh = triangulate(dom, h)
        system = assemble(mesh, betas[0])
        vals = np.array([_eigs(system.with_beta(b), k) for b in betas])
        drop = (vals[:-1] - vals[1:]) / np.abs(vals[1:])
        worst_beta = max(worst_beta, float(drop.max()))
        big = _eigs(assemble(triangulate(scale(dom, 2.0), 2.0 * h), betas[1]), k)
        worst_dil = max(worst_dil, float(np.max(big - vals[1])))
    ok = worst_beta <= slack and worst_dil < 0
    return CheckResult("monotonicity", ok, max(worst_beta, 0.0), slack,
                       f"max λ(2Ω) - λ(Ω) = {worst_dil:.3e}")


def check_faber_krahn(seeds: Iterable[int] = range(4), beta: float = 1.0, h_factor: float = 0.04,
                      slack: float = 0.02) -> CheckResult:
    """λ₁(Ω) ≥ (1 - slack) λ₁(disk of equal area)."""
    worst = math.inf
    for dom in _seeded_domains(seeds):
        a = area(dom)
        lam = _eigs(assemble(triangulate(dom, h_factor * math.sqrt(a)), beta), 1)[0]
        ref = disk_robin_eigenvalues(math.sqrt(a / math.pi), beta, 1).eigenvalues[0]
        worst = min(worst, lam / ref)
    return CheckResult("faber_krahn", worst >= 1 - slack, 1 - worst, slack, f"min ratio {worst:.6f}")


@dataclass(frozen=True)
class Convergence:
    levels: tuple[np.ndarray, ...]
    reference: np.ndarray
    errors: np.ndarray  # relative error per level (rows)
    order: np.ndarray  # Richardson order over the last three levels


def rectangle_convergence(h0: float = 0.1, levels: int = 3, k: int = 4, beta: float = 1.0) -> Convergence:
    mesh = triangulate(unit_square(), h0)
    vals = []
    for level in range(levels):
        if level:
            mesh = refine(mesh)
        vals.append(_eigs(assemble(mesh, beta), k))
    ref = rectangle_robin_eigenvalues(1.0, 1.0, beta, k).eigenvalues
    errs = np.array([np.abs(v - ref) / ref for v in vals])
    _, order = richardson(vals[-3:])
    return Convergence(tuple(vals), ref, errs, order)


def check_rectangle(h0: float = 0.1, levels: int = 3, k: int = 4, tol: float = 1e-3,
                    order_range=(1.8, 2.2)) -> CheckResult:
    conv = rectangle_convergence(h0, levels, k)
    err = float(conv.errors[-1].max())
    ok = err <= tol and bool(np.all((conv.order >= order_range[0]) & (conv.order <= order_range[1])))
    return CheckResult("rectangle", ok, err, tol, "orders " + ", ".join(f"{o:.3f}" for o in conv.order))


def check_disk(sides: int = 256, h: float = 0.03, k: int = 3, beta: float = 1.0, tol: float = 0.01) -> CheckResult:
    dom = regular_polygon_disk(radius=1.0, sides=sides).domain
    vals = _eigs(assemble(triangulate(dom, h), beta), k)
    ref = disk_robin_eigenvalues(1.0, beta, k).eigenvalues
    err = _rel(vals, ref)
    return CheckResult("disk", err <= tol, err, tol, f"{sides}-gon, h={h}")


def sparse_dense_cases(count: int = 25):
    """(domain, h, beta, k) fixtures with at most 400 unknowns, with and without cracks."""
    betas = (0.0, 1.0, 10.0)
    cases = []
    for i in range(count):
        kind = i % 3
        if kind == 0:
            dom, h = unit_square(), 0.1 + 0.01 * (i % 5)
        elif kind == 1:
            dom, h = square_with_slit(), 0.1 + 0.01 * (i % 5)
        else:
            dom, h = realize(random_star(i)), 0.18 + 0.01 * (i % 4)
        cases.append((dom, h, betas[(i // 3) % 3], 4 + i % 3))
    return cases


def check_sparse_dense(count: int = 25, tol: float = 1e-8) -> CheckResult:
    """Shift-invert Lanczos (forced) against the in-package dense solver.

    Relative errors use max(|λ|, 1) as denominator so a zero Neumann
    eigenvalue is compared absolutely.
    """
    worst, max_n = 0.0, 0
    for dom, h, beta, k in sparse_dense_cases(count):
        system = assemble(triangulate(dom, h), beta)
        max_n = max(max_n, system.dof_count)
        sparse = _eigs(system, k, dense_threshold=0)
        dense = dense_generalized_eig(system.operator().toarray(), system.M.toarray())[:k]
        worst = max(worst, _rel(sparse, dense, floor=1.0))
    ok = worst <= tol and max_n <= 400
    return CheckResult("sparse_dense", ok, worst, tol, f"{count} meshes, max dofs {max_n}")


SUITES: dict[str, Callable[..., CheckResult]] = {
    "scaling": check_scaling,
    "union": check_union,
    "monotonicity": check_monotonicity,
    "faber_krahn": check_faber_krahn,
    "rectangle": check_rectangle,
    "disk": check_disk,
    "sparse_dense": lambda: check_sparse_dense(9),
}


def run_suites(names: Iterable[str] | None = None, boundary_factor: float = 1.0) -> list[CheckResult]:
    names = list(SUITES) if names is None else list(names)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise KeyError(f"unknown suite(s): {', '.join(unknown)}")
    out = []
    for name in names:
        if name == "scaling":
            out.append(check_scaling(boundary_factor=boundary_factor))
        else:
            out.append(SUITES[name]())
    return out
