import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from robin_shapes.assembly import assemble
from robin_shapes.geometry import unit_square
from robin_shapes.mesh import triangulate
from robin_shapes.oracles import dense_generalized_eig, rectangle_robin_eigenvalues
from robin_shapes.spectrum import (
    SolverError,
    minmax_over_span,
    rayleigh_quotient,
    smallest_eigenpairs,
    solve_source,
    sup_norm_check,
)


@pytest.fixture(scope="module")
def slit_system():
    from robin_shapes.geometry import square_with_slit

    return assemble(triangulate(square_with_slit(), 0.08), 1.0)


def test_sparse_and_dense_paths_agree(slit_system):
    sparse = smallest_eigenpairs(slit_system, 6, dense_threshold=0)
    dense = smallest_eigenpairs(slit_system, 6, dense_threshold=10 ** 6)
    assert sparse.diagnostics["method"] == "shift-invert-lanczos"
    assert dense.diagnostics["method"] == "dense"
    assert_allclose(sparse.eigenvalues, dense.eigenvalues, rtol=1e-10)


def test_eigenvectors_are_m_orthonormal(slit_system):
    spec = smallest_eigenpairs(slit_system, 5, dense_threshold=0)
    V = spec.eigenvectors
    gram = V.T @ (slit_system.M.full() @ V)
    assert_allclose(gram, np.eye(5), atol=1e-10)
    assert np.all(np.diff(spec.eigenvalues) >= 0)
    for j in range(5):
        assert math.isclose(rayleigh_quotient(slit_system, V[:, j]), spec.eigenvalues[j], rel_tol=1e-10)


def test_deterministic_signs(slit_system):
    a = smallest_eigenpairs(slit_system, 3, seed=0, dense_threshold=0)
    b = smallest_eigenpairs(slit_system, 3, seed=0, dense_threshold=0)
    assert np.array_equal(a.eigenvectors, b.eigenvectors)
    idx = np.argmax(np.abs(a.eigenvectors), axis=0)
    assert np.all(a.eigenvectors[idx, np.arange(3)] > 0)


def test_neumann_zero_eigenvalue(slit_system):
    spec = smallest_eigenpairs(slit_system.with_beta(0.0), 2, dense_threshold=0)
    assert abs(spec.eigenvalues[0]) < 1e-9
    assert spec.eigenvalues[1] > 1.0


def test_neumann_crack_lowers_eigenvalues(slit_system):
    # with beta = 0 the crack only enlarges the admissible space
    plain = assemble(triangulate(unit_square(), 0.08), 0.0)
    cracked = smallest_eigenpairs(slit_system.with_beta(0.0), 2).eigenvalues
    # cos(πy) is cut by the horizontal slit; cos(πx) would not notice it
    assert cracked[1] < 0.8 * smallest_eigenpairs(plain, 2).eigenvalues[1]


def test_robin_crack_adds_boundary_energy(slit_system):
    plain = assemble(triangulate(unit_square(), 0.08), 1.0)
    assert smallest_eigenpairs(slit_system, 1).eigenvalues[0] > smallest_eigenpairs(plain, 1).eigenvalues[0]


def test_k_too_large():
    system = assemble(triangulate(unit_square(), 0.5), 1.0)
    with pytest.raises(SolverError, match="unknowns"):
        smallest_eigenpairs(system, system.dof_count + 1)
    with pytest.raises(SolverError):
        smallest_eigenpairs(system, 0)


def test_square_upper_bounds_oracle(square_mesh):
    # conforming P1 eigenvalues bound the exact ones from above
    ev = smallest_eigenpairs(assemble(square_mesh, 1.0), 4).eigenvalues
    ref = rectangle_robin_eigenvalues(1.0, 1.0, 1.0, 4).eigenvalues
    assert np.all(ev >= ref)
    assert np.all((ev - ref) / ref < 0.02)


def test_minmax_over_span(slit_system):
    spec = smallest_eigenpairs(slit_system, 4)
    assert math.isclose(minmax_over_span(slit_system, spec.eigenvectors[:, :3]), spec.eigenvalues[2], rel_tol=1e-10)
    rng = np.random.default_rng(2)
    assert minmax_over_span(slit_system, rng.standard_normal((slit_system.dof_count, 3))) >= spec.eigenvalues[2]
    v = spec.eigenvectors[:, 0]
    with pytest.raises(ValueError):
        minmax_over_span(slit_system, np.column_stack([v, 2 * v]))


def test_solve_source(slit_system):
    f = np.ones(slit_system.dof_count)
    u = solve_source(slit_system, f)
    residual = slit_system.operator() @ u - slit_system.M.matvec(f)
    assert np.linalg.norm(residual) < 1e-10
    assert_allclose(solve_source(slit_system, np.zeros_like(f)), 0.0)
    with pytest.raises(SolverError):
        solve_source(slit_system.with_beta(0.0), f)


def test_csv_and_sup_norm(slit_system):
    spec = smallest_eigenpairs(slit_system, 3)
    rows = spec.to_csv().splitlines()
    assert rows[0] == "k,lambda,residual" and len(rows) == 4
    report = sup_norm_check(spec)
    assert np.all(report.sup_norms > 0) and np.all(np.isfinite(report.ratios))
    neumann = smallest_eigenpairs(slit_system.with_beta(0.0), 2)
    assert math.isnan(sup_norm_check(neumann).ratios[0])


def test_dense_oracle_on_fem_pencil(square_mesh):
    system = assemble(square_mesh, 10.0)
    ev = smallest_eigenpairs(system, 5, dense_threshold=0).eigenvalues
    dense = dense_generalized_eig(system.operator().toarray(), system.M.toarray())[:5]
    assert_allclose(ev, dense, rtol=1e-9)
