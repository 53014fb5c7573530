import xml.etree.ElementTree as ET

import numpy as np
import pytest

from robin_shapes.assembly import assemble
from robin_shapes.geometry import square_with_slit
from robin_shapes.render import colormap, domain_svg, eigenfunction_svg, mesh_svg
from robin_shapes.spectrum import smallest_eigenpairs


def test_svgs_are_well_formed(slit_mesh):
    vec = smallest_eigenpairs(assemble(slit_mesh, 1.0), 1).eigenvectors[:, 0]
    for text in (domain_svg(square_with_slit()), mesh_svg(slit_mesh),
                 eigenfunction_svg(slit_mesh, vec, square_with_slit())):
        root = ET.fromstring(text)
        assert root.tag.endswith("svg")
        assert len(root) > 0


def test_colormap_endpoints():
    assert colormap(np.array([0.0, 1.0])) == ["#440154", "#fde725"]


def test_eigenfunction_svg_shape_check(slit_mesh):
    with pytest.raises(ValueError):
        eigenfunction_svg(slit_mesh, np.zeros(3))
