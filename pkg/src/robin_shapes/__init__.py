"""Robin eigenvalues on planar domains with cracks."""
from .assembly import DiscreteSystem, assemble
from .geometry import GeometryError, PlanarDomain, generalized_perimeter, validate
from .mesh import TriangleMesh, triangulate
from .spectrum import Spectrum, SolverError, smallest_eigenpairs

__all__ = [
    "DiscreteSystem",
    "GeometryError",
    "PlanarDomain",
    "SolverError",
    "Spectrum",
    "TriangleMesh",
    "assemble",
    "generalized_perimeter",
    "smallest_eigenpairs",
    "triangulate",
    "validate",
]
__version__ = "0.1.0"
