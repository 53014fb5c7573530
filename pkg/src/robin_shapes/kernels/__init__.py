"""Hot numeric kernels with a numba path and a pure-numpy fallback.

The backend is chosen once at import. Set ``ROBIN_SHAPES_NUMBA=0`` to force
the numpy path; numba is also skipped when it cannot be imported. Both
backends expose the same functions and agree to rounding.
"""
import os
from types import ModuleType

from . import _numpy

__all__ = [
    "BACKEND",
    "backend",
    "p1_triplets",
    "edge_mass_triplets",
    "cholesky_lower",
    "lower_solve",
    "householder_tridiagonal",
    "tridiagonal_eigenvalues",
]


def backend(name: str) -> ModuleType:
    """Return the kernel module for ``name`` in {"numba", "numpy"}."""
    if name == "numpy":
        return _numpy
    if name == "numba":
        from . import _jit

        return _jit
    raise ValueError(f"unknown kernel backend {name!r}")


def _select() -> tuple[str, ModuleType]:
    if os.environ.get("ROBIN_SHAPES_NUMBA", "1").strip().lower() in ("0", "false", "no", "off"):
        return "numpy", _numpy
    try:
        return "numba", backend("numba")
    except ImportError:
        return "numpy", _numpy


BACKEND, _impl = _select()

p1_triplets = _impl.p1_triplets
edge_mass_triplets = _impl.edge_mass_triplets
cholesky_lower = _impl.cholesky_lower
lower_solve = _impl.lower_solve
householder_tridiagonal = _impl.householder_tridiagonal
tridiagonal_eigenvalues = _impl.tridiagonal_eigenvalues
