"""SVG output for domains, meshes and P1 eigenfunction heatmaps."""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .geometry import PlanarDomain
from .mesh import CRACK_LEFT, CRACK_RIGHT, TriangleMesh

# viridis anchors
_ANCHORS = np.array([
    [68, 1, 84], [59, 82, 139], [33, 145, 140], [94, 201, 98], [253, 231, 37],
], dtype=float)
_EDGE_COLORS = {0: "#000000", CRACK_LEFT: "#d62728", CRACK_RIGHT: "#d62728"}


def colormap(values: np.ndarray) -> list[str]:
    """Hex colors for values in [0, 1]."""
    v = np.clip(np.asarray(values, dtype=float), 0.0, 1.0) * (len(_ANCHORS) - 1)
    i = np.minimum(v.astype(int), len(_ANCHORS) - 2)
    f = (v - i)[:, None]
    rgb = np.rint((1 - f) * _ANCHORS[i] + f * _ANCHORS[i + 1]).astype(int)
    return [f"#{r:02x}{g:02x}{b:02x}" for r, g, b in rgb]


class _Canvas:
    def __init__(self, bounds, size: int = 480, margin: float = 0.04):
        x0, y0, x1, y1 = bounds
        span = max(x1 - x0, y1 - y0) or 1.0
        pad = margin * span
        self.x0, self.y1 = x0 - pad, y1 + pad
        self.s = size / (span + 2 * pad)
        self.w = (x1 - x0 + 2 * pad) * self.s
        self.h = (y1 - y0 + 2 * pad) * self.s
        self.parts: list[str] = []

    def xy(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        return np.column_stack([(pts[:, 0] - self.x0) * self.s, (self.y1 - pts[:, 1]) * self.s])

    def path(self, pts, closed: bool, **attrs) -> None:
        q = self.xy(pts)
        d = "M" + " L".join(f"{x:.2f},{y:.2f}" for x, y in q) + (" Z" if closed else "")
        extra = " ".join(f'{k.replace("_", "-")}="{v}"' for k, v in attrs.items())
        self.parts.append(f'<path d="{d}" {extra}/>')

    def svg(self) -> str:
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.0f}" height="{self.h:.0f}" '
                f'viewBox="0 0 {self.w:.2f} {self.h:.2f}">')
        return "\n".join([head, *self.parts, "</svg>"]) + "\n"


def _domain_outline(canvas: _Canvas, domain: PlanarDomain, fill: str) -> None:
    for comp in domain.components:
        d = ""
        for loop in comp.loops:
            q = canvas.xy(loop)
            d += "M" + " L".join(f"{x:.2f},{y:.2f}" for x, y in q) + " Z "
        canvas.parts.append(f'<path d="{d.strip()}" fill="{fill}" fill-rule="evenodd" '
                            f'stroke="#000000" stroke-width="1.5"/>')
    for crack in domain.cracks:
        canvas.path(crack.points, False, fill="none", stroke="#d62728", stroke_width=2)


def domain_svg(domain: PlanarDomain, size: int = 480) -> str:
    canvas = _Canvas(domain.bounds, size)
    _domain_outline(canvas, domain, "#dde6f0")
    return canvas.svg()


def mesh_svg(mesh: TriangleMesh, size: int = 480) -> str:
    lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
    canvas = _Canvas((lo[0], lo[1], hi[0], hi[1]), size)
    for tri in mesh.triangles:
        canvas.path(mesh.nodes[tri], True, fill="#f4f4f4", stroke="#888888", stroke_width=0.4)
    for (a, b), kind in zip(mesh.boundary_edges, mesh.edge_kind):
        canvas.path(mesh.nodes[[a, b]], False, stroke=_EDGE_COLORS.get(int(kind), "#000000"), stroke_width=1.2)
    return canvas.svg()


def eigenfunction_svg(mesh: TriangleMesh, values: np.ndarray, domain: PlanarDomain | None = None,
                      size: int = 480) -> str:
    """Per-triangle fill by the mean nodal value, normalized to the value range."""
    values = np.asarray(values, dtype=float)
    if values.shape != (mesh.n_nodes,):
        raise ValueError("need one value per mesh node")
    lo, hi = mesh.nodes.min(axis=0), mesh.nodes.max(axis=0)
    canvas = _Canvas((lo[0], lo[1], hi[0], hi[1]), size)
    tri_vals = values[mesh.triangles].mean(axis=1)
    vmin, vmax = float(values.min()), float(values.max())
    span = vmax - vmin if vmax > vmin else 1.0
    for tri, color in zip(mesh.triangles, colormap((tri_vals - vmin) / span)):
        canvas.path(mesh.nodes[tri], True, fill=color, stroke=color, stroke_width=0.3)
    if domain is not None:
        _domain_outline(canvas, domain, "none")
    else:
        for (a, b), kind in zip(mesh.boundary_edges, mesh.edge_kind):
            canvas.path(mesh.nodes[[a, b]], False, stroke=_EDGE_COLORS.get(int(kind), "#000000"), stroke_width=1.2)
    return canvas.svg()


def save_svg(text: str, path: str | Path) -> None:
    Path(path).write_text(text)
