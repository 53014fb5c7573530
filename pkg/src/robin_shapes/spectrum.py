"""Smallest eigenpairs of the pencil (K + βB, M) and related solves.

The sparse path is shift-invert Lanczos (ARPACK) around a tiny negative shift,
with the shifted operator factorized once by SuperLU. Small systems go to a
dense LAPACK solve. Either way the computed basis is cleaned up by one
Rayleigh-Ritz step so the returned vectors are M-orthonormal.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .assembly import DiscreteSystem
from .mesh import TriangleMesh

RESIDUAL_TOL = 1e-9
DENSE_THRESHOLD = 500
MAX_RESHIFTS = 3


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with M-orthonormal eigenvectors (columns)."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    residuals: np.ndarray
    beta: float
    k: int
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        self.eigenvalues.setflags(write=False)
        self.eigenvectors.setflags(write=False)
        self.residuals.setflags(write=False)

    def to_csv(self) -> str:
        rows = ["k,lambda,residual"]
        rows += [f"{i + 1},{lam!r},{res!r}" for i, (lam, res) in
                 enumerate(zip(self.eigenvalues.tolist(), self.residuals.tolist()))]
        return "\n".join(rows) + "\n"


def default_shift(system: DiscreteSystem) -> float:
    return -1e-8 * float(system.M.diagonal().sum()) / system.dof_count


def _factorize(C: sp.spmatrix):
    lu = spla.splu(C.tocsc(), permc_spec="MMD_AT_PLUS_A", diag_pivot_thresh=0.0,
                   options={"SymmetricMode": True})
    if not np.all(np.isfinite(lu.U.diagonal())) or np.any(lu.U.diagonal() == 0):
        raise RuntimeError("singular factor")
    return lu


def _rayleigh_ritz(A, M, V: np.ndarray, k: int):
    AV = A @ V
    MV = M @ V
    a = V.T @ AV
    m = V.T @ MV
    w, y = sla.eigh(0.5 * (a + a.T), 0.5 * (m + m.T))
    order = np.argsort(w, kind="stable")[:k]
    return w[order], V @ y[:, order]


def residual_norms(A, M, values: np.ndarray, vectors: np.ndarray) -> np.ndarray:
    r = A @ vectors - (M @ vectors) * values[None, :]
    return np.linalg.norm(r, axis=0)


def smallest_eigenpairs(system: DiscreteSystem, k: int, tol: float = RESIDUAL_TOL, seed: int = 0,
                        dense_threshold: int = DENSE_THRESHOLD) -> Spectrum:
    """The ``k`` smallest eigenpairs of (K + βB) u = λ M u, with multiplicity.

    Raises :class:`SolverError` when ``k`` exceeds the number of unknowns,
    when the shifted operator cannot be factorized after reshifting, or when
    the residuals miss ``tol * (||A||_1 + λ ||M||_1)``.
    """
    n = system.dof_count
    if not 1 <= k <= n:
        raise SolverError(f"requested k={k} eigenpairs but the system has {n} unknowns")
    A = system.operator()
    M = system.M.full()
    diag = {"seed": seed, "n": n}
    if n <= dense_threshold or k >= n - 1:
        w, V = sla.eigh(A.toarray(), M.toarray(), subset_by_index=[0, k - 1])
        diag.update(method="dense", iterations=0, shift=0.0)
    else:
        sigma = default_shift(system)
        ncv = min(n, max(k + 5, 2 * k + 1))
        v0 = np.random.default_rng(seed).standard_normal(n)
        for attempt in range(MAX_RESHIFTS + 1):
            try:
                lu = _factorize(A - sigma * M)
                break
            except RuntimeError:
                if attempt == MAX_RESHIFTS:
                    raise SolverError(f"shifted operator singular after {MAX_RESHIFTS} reshifts")
                sigma = 10.0 * sigma - 1e-6 * abs(float(M.diagonal().mean()))
        op = spla.LinearOperator((n, n), matvec=lu.solve, dtype=float)
        try:
            w, V = spla.eigsh(A, k=k, M=M, sigma=sigma, which="LM", OPinv=op, v0=v0, ncv=ncv,
                              maxiter=300 * k, tol=0.0)
        except spla.ArpackNoConvergence as exc:
            raise SolverError(f"Lanczos did not converge in {300 * k} iterations") from exc
        diag.update(method="shift-invert-lanczos", iterations=300 * k, shift=sigma, ncv=ncv)
    w, V = _rayleigh_ritz(A, M, V, k)
    # deterministic sign: largest-magnitude entry positive
    idx = np.argmax(np.abs(V), axis=0)
    V = V * np.sign(V[idx, np.arange(k)])[None, :]
    res = residual_norms(A, M, w, V)
    bound = tol * (_norm1(A) + np.abs(w) * _norm1(M))
    if np.any(res > bound):
        raise SolverError(f"residuals {res.max():.3g} above tolerance")
    return Spectrum(w, V, res, system.beta, k, diag)


def _norm1(A) -> float:
    return float(abs(A).sum(axis=0).max())


def rayleigh_quotient(system: DiscreteSystem, v: np.ndarray) -> float:
    """(vᵀ(K + βB)v) / (vᵀMv)."""
    denom = system.M.quad(v)
    if not denom > 0:
        raise ValueError("vector has zero M-norm")
    return system.energy(v) / denom


def minmax_over_span(system: DiscreteSystem, vectors: np.ndarray) -> float:
    """Max of the Rayleigh quotient over span(vectors): top eigenvalue of the projected pencil."""
    V = np.asarray(vectors, dtype=float)
    if V.ndim == 1:
        V = V[:, None]
    A = system.operator()
    M = system.M.full()
    a = V.T @ (A @ V)
    m = V.T @ (M @ V)
    m = 0.5 * (m + m.T)
    try:
        sla.cholesky(m)
    except sla.LinAlgError as exc:
        raise ValueError("span is rank deficient in the M inner product") from exc
    if np.linalg.cond(m) > 1e13:
        raise ValueError("span is rank deficient in the M inner product")
    return float(sla.eigh(0.5 * (a + a.T), m, eigvals_only=True)[-1])


def solve_source(system: DiscreteSystem, f: np.ndarray) -> np.ndarray:
    """u with (K + βB) u = M f (requires β > 0 so the operator is definite)."""
    if not system.beta > 0:
        raise SolverError("source problem needs beta > 0")
    A = system.operator().tocsc()
    rhs = system.M.matvec(np.asarray(f, dtype=float))
    if not np.any(rhs):
        return np.zeros(system.dof_count)
    try:
        lu = _factorize(A)
    except RuntimeError as exc:
        raise SolverError("factorization failed") from exc
    u = lu.solve(rhs)
    # one step of iterative refinement
    u += lu.solve(rhs - A @ u)
    return u


@dataclass(frozen=True)
class SupNormReport:
    sup_norms: np.ndarray
    ratios: np.ndarray  # max|u_i| / λ_i^2, nan where λ_i is ~0


def sup_norm_check(spectrum: Spectrum, mesh: TriangleMesh | None = None) -> SupNormReport:
    """Diagonal bookkeeping for ||u||_∞ ≤ C λ^N with N = 2; nodal maxima are exact for P1."""
    sup = np.abs(spectrum.eigenvectors).max(axis=0)
    lam = spectrum.eigenvalues
    scale = max(1.0, float(np.abs(lam).max()))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.where(np.abs(lam) > 1e-10 * scale, sup / lam ** 2, math.nan)
    return SupNormReport(sup, ratios)
