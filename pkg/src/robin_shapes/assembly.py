"""P1 assembly of the Robin energy: stiffness K, mass M and boundary mass B.

All integrals are exact for piecewise-linear functions. B integrates over
every tagged boundary edge, including both copies of every crack edge, so the
two one-sided traces on a crack enter the energy independently.
"""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from . import kernels
from .mesh import TriangleMesh


class AssemblyError(ValueError):
    pass


class SymmetricSparseMatrix:
    """Symmetric matrix stored as its upper triangle in CSR form.

    Every stored entry has ``row <= col``; the lower triangle is implied.
    Use :meth:`matvec` for products and :meth:`full` for a scipy matrix.
    """

    def __init__(self, n: int, indptr: np.ndarray, indices: np.ndarray, data: np.ndarray):
        self.n = int(n)
        self.indptr = indptr
        self.indices = indices
        self.data = data
        for arr in (indptr, indices, data):
            arr.setflags(write=False)
        self._full = None

    @classmethod
    def from_triplets(cls, n: int, rows, cols, vals) -> "SymmetricSparseMatrix":
        """Sum upper-triangle triplets (``rows <= cols``) in input order."""
        if np.any(rows > cols):
            raise AssemblyError("triplets must lie in the upper triangle")
        upper = sp.coo_matrix((vals, (rows, cols)), shape=(n, n)).tocsr()
        upper.sum_duplicates()
        upper.sort_indices()
        return cls(n, upper.indptr.astype(np.int64), upper.indices.astype(np.int64), upper.data.copy())

    @property
    def shape(self) -> tuple[int, int]:
        return self.n, self.n

    @property
    def upper(self) -> sp.csr_matrix:
        return sp.csr_matrix((self.data, self.indices, self.indptr), shape=self.shape)

    def full(self) -> sp.csr_matrix:
        """Full symmetric matrix U + U^T - diag(U), cached."""
        if self._full is None:
            u = self.upper
            self._full = (u + u.T - sp.diags(u.diagonal())).tocsr()
            self._full.sort_indices()
        return self._full

    def toarray(self) -> np.ndarray:
        return self.full().toarray()

    def diagonal(self) -> np.ndarray:
        return self.upper.diagonal()

    def matvec(self, x: np.ndarray) -> np.ndarray:
        """y = A x using only the stored upper triangle."""
        u = self.upper
        return u @ x + u.T @ x - u.diagonal() * x

    def quad(self, x: np.ndarray, y: np.ndarray | None = None) -> float:
        y = x if y is None else y
        return float(y @ self.matvec(x))

    def norm1(self) -> float:
        return float(abs(self.full()).sum(axis=0).max())

    def to_coordinate_text(self) -> str:
        """``i j value`` lines, 1-based, upper triangle only."""
        coo = self.upper.tocoo()
        return "".join(f"{i + 1} {j + 1} {v!r}\n" for i, j, v in zip(coo.row.tolist(), coo.col.tolist(), coo.data.tolist()))

    def __eq__(self, other) -> bool:
        return (isinstance(other, SymmetricSparseMatrix) and self.n == other.n
                and np.array_equal(self.indptr, other.indptr) and np.array_equal(self.indices, other.indices)
                and np.array_equal(self.data, other.data))

    __hash__ = None


def _check_areas(areas: np.ndarray) -> None:
    if not np.all(areas > 0):
        bad = int(np.argmin(areas))
        raise AssemblyError(f"degenerate or inverted triangle {bad} (area {areas[bad]:.3g})")


def stiffness_matrix(mesh: TriangleMesh) -> SymmetricSparseMatrix:
    """Exact P1 stiffness: the matrix of the Dirichlet energy ∫|∇v|²."""
    rows, cols, kvals, _, areas = kernels.p1_triplets(mesh.nodes, mesh.triangles)
    _check_areas(areas)
    return SymmetricSparseMatrix.from_triplets(mesh.n_nodes, rows, cols, kvals)


def mass_matrix(mesh: TriangleMesh) -> SymmetricSparseMatrix:
    rows, cols, _, mvals, areas = kernels.p1_triplets(mesh.nodes, mesh.triangles)
    _check_areas(areas)
    return SymmetricSparseMatrix.from_triplets(mesh.n_nodes, rows, cols, mvals)


def robin_boundary_matrix(mesh: TriangleMesh) -> SymmetricSparseMatrix:
    """1D P1 mass summed over outer, crack-left and crack-right edges."""
    rows, cols, vals = kernels.edge_mass_triplets(mesh.nodes, mesh.boundary_edges)
    return SymmetricSparseMatrix.from_triplets(mesh.n_nodes, rows, cols, vals)


@dataclass(frozen=True, eq=False)
class DiscreteSystem:
    """Matrices of the pencil (K + beta B, M) on one mesh.

    ``beta`` is kept apart from ``B`` so a sweep over beta reuses one assembly.
    """

    K: SymmetricSparseMatrix
    M: SymmetricSparseMatrix
    B: SymmetricSparseMatrix
    beta: float
    mesh: TriangleMesh

    @property
    def dof_count(self) -> int:
        return self.K.n

    def with_beta(self, beta: float) -> "DiscreteSystem":
        if not beta >= 0:
            raise ValueError(f"beta must be nonnegative, got {beta}")
        return DiscreteSystem(self.K, self.M, self.B, float(beta), self.mesh)

    def operator(self) -> sp.csr_matrix:
        """Full K + beta B."""
        return (self.K.full() + self.beta * self.B.full()).tocsr()

    def energy(self, v: np.ndarray) -> float:
        return self.K.quad(v) + self.beta * self.B.quad(v)


def assemble(mesh: TriangleMesh, beta: float) -> DiscreteSystem:
    """Assemble K, M, B for ``mesh``. ``beta = 0`` gives the Neumann pencil."""
    if not beta >= 0:
        raise ValueError(f"beta must be nonnegative, got {beta}")
    rows, cols, kvals, mvals, areas = kernels.p1_triplets(mesh.nodes, mesh.triangles)
    _check_areas(areas)
    n = mesh.n_nodes
    K = SymmetricSparseMatrix.from_triplets(n, rows, cols, kvals)
    M = SymmetricSparseMatrix.from_triplets(n, rows, cols, mvals)
    return DiscreteSystem(K, M, robin_boundary_matrix(mesh), float(beta), mesh)


def save_matrix(matrix: SymmetricSparseMatrix, path: str | Path) -> None:
    Path(path).write_text(matrix.to_coordinate_text())
