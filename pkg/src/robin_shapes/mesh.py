"""Conforming triangle meshes with duplicated nodes along cracks.

Triangulation is constrained Delaunay with Ruppert refinement (via
``triangle``), with every loop edge and crack segment as a constraint. A
post-pass splits the node-triangle incidence along each crack: interior crack
nodes get a second copy used by the triangles on the right-hand side, crack
tips stay single. P1 functions on the result may jump across cracks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
import triangle as tr

from .geometry import PlanarDomain, require_valid, signed_area

OUTER, CRACK_LEFT, CRACK_RIGHT = 0, 1, 2
TAG_NAMES = ("Outer", "CrackLeft", "CrackRight")
DEFAULT_NODE_BUDGET = 2_000_000
MIN_ANGLE = 20.0


class MeshingError(RuntimeError):
    pass


class NodeBudgetError(MeshingError):
    pass


@dataclass(frozen=True, eq=False)
class TriangleMesh:
    """P1 mesh. ``boundary_edges[i] = (a, b)`` is oriented with the domain on its left.

    ``edge_kind`` holds OUTER/CRACK_LEFT/CRACK_RIGHT and ``edge_tag`` the loop
    or crack index; ``crack_pairs`` lists (left, right) copies of duplicated nodes.
    """

    nodes: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_kind: np.ndarray
    edge_tag: np.ndarray
    crack_pairs: np.ndarray
    h_target: float

    def __post_init__(self):
        for name in ("nodes", "triangles", "boundary_edges", "edge_kind", "edge_tag", "crack_pairs"):
            getattr(self, name).setflags(write=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def edges_of(self, kind: int) -> np.ndarray:
        return self.boundary_edges[self.edge_kind == kind]

    def scaled(self, t: float) -> "TriangleMesh":
        """Same topology with every coordinate multiplied by ``t``."""
        return TriangleMesh(self.nodes * t, self.triangles, self.boundary_edges, self.edge_kind,
                            self.edge_tag, self.crack_pairs, self.h_target * t)

    def translated(self, offset) -> "TriangleMesh":
        return TriangleMesh(self.nodes + np.asarray(offset, float), self.triangles, self.boundary_edges,
                            self.edge_kind, self.edge_tag, self.crack_pairs, self.h_target)

    def triangle_areas(self) -> np.ndarray:
        p = self.nodes[self.triangles]
        d1 = p[:, 1] - p[:, 0]
        d2 = p[:, 2] - p[:, 0]
        return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])

    def edge_lengths(self, kind: int | None = None) -> np.ndarray:
        e = self.boundary_edges if kind is None else self.edges_of(kind)
        d = self.nodes[e[:, 1]] - self.nodes[e[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])


# ---------------------------------------------------------------------------
# triangulation

def _subdivide(points: np.ndarray, closed: bool, h: float, min_pieces: int = 1) -> np.ndarray:
    """Insert equally spaced points so every piece has length <= h."""
    nxt = np.roll(points, -1, axis=0) if closed else points[1:]
    cur = points if closed else points[:-1]
    out = []
    for a, b in zip(cur, nxt):
        n = max(min_pieces, math.ceil(math.hypot(*(b - a)) / h * (1 + 1e-12)))
        t = np.arange(n)[:, None] / n
        out.append(a + t * (b - a))
    if not closed:
        out.append(points[-1:])
    return np.concatenate(out)


def _interior_point(loop: np.ndarray) -> np.ndarray:
    segs = np.column_stack([np.arange(len(loop)), np.roll(np.arange(len(loop)), -1)])
    t = tr.triangulate({"vertices": loop, "segments": segs}, "pQ")
    return t["vertices"][t["triangles"][0]].mean(axis=0)


def _ring(start: int, n: int) -> np.ndarray:
    idx = np.arange(start, start + n)
    return np.column_stack([idx, np.roll(idx, -1)])


def _mesh_component(domain: PlanarDomain, ci: int, h: float, loop_base: int, min_angle: float):
    comp = domain.components[ci]
    origin = comp.outer.min(axis=0)
    verts, segs, marks, holes = [], [], [], []
    n = 0
    for li, loop in enumerate(comp.loops):
        pts = _subdivide(loop - origin, True, h)
        verts.append(pts)
        segs.append(_ring(n, len(pts)))
        marks.append(np.full(len(pts), 1 + loop_base + li))
        if li > 0:
            holes.append(_interior_point(loop - origin))
        n += len(pts)
    n_loops_total = len(domain.loops)
    crack_ids, crack_start = [], {}
    for k, crack in enumerate(domain.cracks):
        if crack.component != ci:
            continue
        pts = _subdivide(crack.points - origin, False, h, min_pieces=2 if len(crack.points) == 2 else 1)
        idx = np.arange(n, n + len(pts))
        verts.append(pts)
        segs.append(np.column_stack([idx[:-1], idx[1:]]))
        marks.append(np.full(len(pts) - 1, 1 + n_loops_total + k))
        crack_ids.append(k)
        crack_start[k] = n
        n += len(pts)
    pslg = {
        "vertices": np.concatenate(verts),
        "segments": np.concatenate(segs).astype(np.int32),
        "segment_markers": np.concatenate(marks).astype(np.int32),
    }
    if holes:
        pslg["holes"] = np.array(holes)
    max_area = math.sqrt(3.0) / 4.0 * h * h
    out = tr.triangulate(pslg, f"pq{min_angle:g}a{max_area:.17f}Q")
    for _ in range(40):
        p = out["vertices"][out["triangles"]]
        edge = np.max(np.hypot(*(np.roll(p, -1, axis=1) - p).transpose(2, 0, 1)), axis=1)
        bad = edge > h
        if not bad.any():
            break
        d1, d2 = p[:, 1] - p[:, 0], p[:, 2] - p[:, 0]
        areas = np.abs(0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0]))
        refine_in = dict(out)
        refine_in["triangle_max_area"] = np.where(bad, 0.5 * areas, -1.0)
        if holes:
            refine_in["holes"] = np.array(holes)
        out = tr.triangulate(refine_in, f"rpq{min_angle:g}aQ")
    else:
        raise MeshingError(f"could not reach max edge <= {h} on component {ci}")
    nodes = out["vertices"] + origin
    tris = out["triangles"].astype(np.int64)
    seg = out["segments"].astype(np.int64)
    seg_mark = out["segment_markers"].ravel().astype(np.int64)
    # triangle returns counterclockwise triangles; enforce anyway
    p = nodes[tris]
    neg = (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1]) - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1]) < 0
    tris[neg] = tris[neg][:, ::-1]
    return nodes, tris, seg, seg_mark, crack_ids, crack_start, n_loops_total


def _crack_chain(edges: np.ndarray, start: int) -> list[int]:
    nbrs: dict[int, list[int]] = {}
    for a, b in edges:
        nbrs.setdefault(int(a), []).append(int(b))
        nbrs.setdefault(int(b), []).append(int(a))
    if any(len(v) > 2 for v in nbrs.values()) or len(nbrs.get(start, [])) != 1:
        raise MeshingError("crack edges do not form a simple chain")
    chain = [start]
    prev = -1
    while True:
        nxt = [v for v in nbrs[chain[-1]] if v != prev]
        if not nxt:
            break
        prev = chain[-1]
        chain.append(nxt[0])
    if len(chain) != len(edges) + 1:
        raise MeshingError("crack chain is broken")
    return chain


def _duplicate_crack(nodes, tris, chain):
    """Give interior chain nodes a copy for the triangles right of the crack."""
    sides = []
    for j in range(1, len(chain) - 1):
        v, prev, nxt = chain[j], chain[j - 1], chain[j + 1]
        rows = np.nonzero((tris == v).any(axis=1))[0]
        centroid = nodes[tris[rows]].mean(axis=1) - nodes[v]
        a_next = math.atan2(*(nodes[nxt] - nodes[v])[::-1])
        a_prev = math.atan2(*(nodes[prev] - nodes[v])[::-1])
        sector = (a_prev - a_next) % (2 * math.pi)
        ang = (np.arctan2(centroid[:, 1], centroid[:, 0]) - a_next) % (2 * math.pi)
        right = rows[ang > sector]
        if len(right) == 0 or len(right) == len(rows):
            raise MeshingError("crack node without triangles on both sides")
        sides.append((v, right))
    new_nodes, pairs = [], []
    for copy_index, (v, right) in enumerate(sides, start=len(nodes)):
        tris[right] = np.where(tris[right] == v, copy_index, tris[right])
        new_nodes.append(nodes[v])
        pairs.append((v, copy_index))
    return new_nodes, pairs


def _orient_edges(edges: np.ndarray, tris: np.ndarray) -> np.ndarray:
    directed = set(map(tuple, np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]]).tolist()))
    out = edges.copy()
    for i, (a, b) in enumerate(edges.tolist()):
        if (a, b) not in directed:
            if (b, a) not in directed:
                raise MeshingError(f"boundary edge {(a, b)} has no incident triangle")
            out[i] = (b, a)
    return out


def triangulate(domain: PlanarDomain, h: float, node_budget: int = DEFAULT_NODE_BUDGET,
                min_angle: float = MIN_ANGLE) -> TriangleMesh:
    """Conforming triangulation with max edge <= h and crack node duplication.

    ``h`` at or above the domain diameter is clamped to diameter/4.
    """
    require_valid(domain)
    if not h > 0:
        raise ValueError(f"h must be positive, got {h}")
    if h >= domain.diameter:
        h = domain.diameter / 4.0
    total_area = math.fsum(signed_area(loop) for loop in domain.loops)
    boundary = sum(float(np.hypot(*(np.roll(lp, -1, 0) - lp).T).sum()) for lp in domain.loops)
    estimate = 2.5 * total_area / (h * h) + 2.0 * boundary / h
    if estimate > node_budget:
        raise NodeBudgetError(f"h={h:g} needs about {estimate:.3g} nodes (budget {node_budget})")

    all_nodes, all_tris, all_edges, all_kind, all_tag, all_pairs = [], [], [], [], [], []
    offset = 0
    loop_base = 0
    for ci in range(len(domain.components)):
        nodes, tris, seg, mark, crack_ids, crack_start, n_loops_total = _mesh_component(
            domain, ci, h, loop_base, min_angle)
        edges, kind, tag, pairs = [], [], [], []
        loop_mask = mark <= n_loops_total
        edges.append(seg[loop_mask])
        kind.append(np.full(loop_mask.sum(), OUTER))
        tag.append(mark[loop_mask] - 1)
        extra_nodes = []
        for k in crack_ids:
            cedges = seg[mark == 1 + n_loops_total + k]
            chain = _crack_chain(cedges, crack_start[k])
            dup_nodes, dup_pairs = _duplicate_crack(nodes if not extra_nodes else np.vstack([nodes, extra_nodes]),
                                                    tris, chain)
            extra_nodes.extend(dup_nodes)
            copy = dict(dup_pairs)
            left = np.array([(chain[i], chain[i + 1]) for i in range(len(chain) - 1)])
            right = np.array([(copy.get(a, a), copy.get(b, b)) for a, b in left])
            edges += [left, right]
            kind += [np.full(len(left), CRACK_LEFT), np.full(len(right), CRACK_RIGHT)]
            tag += [np.full(len(left), k), np.full(len(right), k)]
            pairs += dup_pairs
        if extra_nodes:
            nodes = np.concatenate([nodes, np.array(extra_nodes)])
        edges = _orient_edges(np.concatenate(edges), tris)
        all_nodes.append(nodes)
        all_tris.append(tris + offset)
        all_edges.append(edges + offset)
        all_kind.append(np.concatenate(kind))
        all_tag.append(np.concatenate(tag))
        if pairs:
            all_pairs.append(np.array(pairs) + offset)
        offset += len(nodes)
        loop_base += len(domain.components[ci].loops)

    mesh = TriangleMesh(
        nodes=np.concatenate(all_nodes),
        triangles=np.concatenate(all_tris),
        boundary_edges=np.concatenate(all_edges),
        edge_kind=np.concatenate(all_kind).astype(np.int8),
        edge_tag=np.concatenate(all_tag).astype(np.int64),
        crack_pairs=np.concatenate(all_pairs) if all_pairs else np.zeros((0, 2), dtype=np.int64),
        h_target=float(h),
    )
    if mesh.n_nodes > node_budget:
        raise NodeBudgetError(f"mesh has {mesh.n_nodes} nodes (budget {node_budget})")
    return mesh


# ---------------------------------------------------------------------------
# refinement and quality

def unique_edges(triangles: np.ndarray) -> np.ndarray:
    """Sorted node pairs of all triangle edges, in order of first appearance."""
    e = np.stack([triangles[:, [0, 1]], triangles[:, [1, 2]], triangles[:, [2, 0]]], axis=1).reshape(-1, 2)
    e = np.sort(e, axis=1)
    _, first = np.unique(e, axis=0, return_index=True)
    return e[np.sort(first)]


def refine(mesh: TriangleMesh, node_budget: int = DEFAULT_NODE_BUDGET) -> TriangleMesh:
    """Split every triangle into four through its edge midpoints.

    Left and right copies of a crack edge are different node pairs, so their
    midpoints are different nodes; crack tips stay single.
    """
    edges = unique_edges(mesh.triangles)
    n = mesh.n_nodes
    if n + len(edges) > node_budget:
        raise NodeBudgetError(f"refinement needs {n + len(edges)} nodes (budget {node_budget})")
    mid_index = {(int(a), int(b)): n + i for i, (a, b) in enumerate(edges)}
    mids = 0.5 * (mesh.nodes[edges[:, 0]] + mesh.nodes[edges[:, 1]])
    nodes = np.concatenate([mesh.nodes, mids])

    def mid(a, b):
        return mid_index[(a, b) if a < b else (b, a)]

    tris = []
    for a, b, c in mesh.triangles.tolist():
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        tris += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    bedges, kind, tag = [], [], []
    for (a, b), k, t in zip(mesh.boundary_edges.tolist(), mesh.edge_kind.tolist(), mesh.edge_tag.tolist()):
        m = mid(a, b)
        bedges += [(a, m), (m, b)]
        kind += [k, k]
        tag += [t, t]
    partner = {int(l): int(r) for l, r in mesh.crack_pairs}
    pairs = [tuple(p) for p in mesh.crack_pairs.tolist()]
    for a, b in mesh.edges_of(CRACK_LEFT).tolist():
        pairs.append((mid(a, b), mid(partner.get(a, a), partner.get(b, b))))
    return TriangleMesh(
        nodes=nodes,
        triangles=np.array(tris, dtype=np.int64),
        boundary_edges=np.array(bedges, dtype=np.int64),
        edge_kind=np.array(kind, dtype=np.int8),
        edge_tag=np.array(tag, dtype=np.int64),
        crack_pairs=np.array(pairs, dtype=np.int64).reshape(-1, 2),
        h_target=mesh.h_target / 2.0,
    )


class QualityReport(NamedTuple):
    min_angle: float
    max_edge: float
    n_triangles: int
    n_nodes: int


def triangle_angles(mesh: TriangleMesh) -> np.ndarray:
    """Interior angles in degrees, shape (T, 3)."""
    p = mesh.nodes[mesh.triangles]
    out = np.empty((len(p), 3))
    for i in range(3):
        u = p[:, (i + 1) % 3] - p[:, i]
        v = p[:, (i + 2) % 3] - p[:, i]
        cross = u[:, 0] * v[:, 1] - u[:, 1] * v[:, 0]
        out[:, i] = np.degrees(np.arctan2(np.abs(cross), (u * v).sum(-1)))
    return out


def mesh_quality(mesh: TriangleMesh) -> QualityReport:
    p = mesh.nodes[mesh.triangles]
    edge = np.hypot(*(np.roll(p, -1, axis=1) - p).transpose(2, 0, 1))
    return QualityReport(float(triangle_angles(mesh).min()), float(edge.max()), mesh.n_triangles, mesh.n_nodes)


def triangle_adjacency_components(mesh: TriangleMesh) -> int:
    """Number of connected components of the triangle graph (shared edges)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components

    t = mesh.triangles
    e = np.sort(np.stack([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=1).reshape(-1, 2), axis=1)
    owner = np.repeat(np.arange(len(t)), 3)
    key = e[:, 0] * mesh.n_nodes + e[:, 1]
    order = np.argsort(key, kind="stable")
    same = key[order][1:] == key[order][:-1]
    a, b = owner[order][:-1][same], owner[order][1:][same]
    g = coo_matrix((np.ones(len(a)), (a, b)), shape=(len(t), len(t)))
    return int(connected_components(g, directed=False)[0])


# ---------------------------------------------------------------------------
# text format

def mesh_to_text(mesh: TriangleMesh, values: np.ndarray | None = None) -> str:
    """Plain-text export; optional per-node ``values`` (N or N x K) are appended."""
    lines = [f"nodes {mesh.n_nodes} triangles {mesh.n_triangles} bedges {len(mesh.boundary_edges)}"]
    lines += [f"{x!r} {y!r}" for x, y in mesh.nodes.tolist()]
    lines += [f"{i} {j} {k}" for i, j, k in mesh.triangles.tolist()]
    lines += [f"{a} {b} {TAG_NAMES[k]} {t}" for (a, b), k, t in
              zip(mesh.boundary_edges.tolist(), mesh.edge_kind.tolist(), mesh.edge_tag.tolist())]
    if values is not None:
        vals = np.asarray(values, float).reshape(mesh.n_nodes, -1)
        lines.append(f"values {vals.shape[1]}")
        lines += [" ".join(repr(v) for v in row) for row in vals.tolist()]
    return "\n".join(lines) + "\n"


def mesh_from_text(text: str) -> tuple[TriangleMesh, np.ndarray | None]:
    """Parse :func:`mesh_to_text` output. Crack pairs are rebuilt from coordinates."""
    rows = text.strip().splitlines()
    head = rows[0].split()
    nn, nt, nb = int(head[1]), int(head[3]), int(head[5])
    nodes = np.array([list(map(float, r.split())) for r in rows[1:1 + nn]]).reshape(-1, 2)
    tris = np.array([list(map(int, r.split())) for r in rows[1 + nn:1 + nn + nt]], dtype=np.int64).reshape(-1, 3)
    be, kind, tag = [], [], []
    for r in rows[1 + nn + nt:1 + nn + nt + nb]:
        a, b, name, t = r.split()
        be.append((int(a), int(b)))
        kind.append(TAG_NAMES.index(name))
        tag.append(int(t))
    values = None
    rest = rows[1 + nn + nt + nb:]
    if rest:
        values = np.array([list(map(float, r.split())) for r in rest[1:]])
    be = np.array(be, dtype=np.int64).reshape(-1, 2)
    kind = np.array(kind, dtype=np.int8)
    left = np.unique(be[kind == CRACK_LEFT])
    right = np.unique(be[kind == CRACK_RIGHT])
    right_only = np.setdiff1d(right, left)
    lookup = {tuple(nodes[i]): i for i in np.setdiff1d(left, right)}
    pairs = [(lookup[tuple(nodes[r])], r) for r in right_only]
    mesh = TriangleMesh(nodes, tris, be, kind, np.array(tag, dtype=np.int64),
                        np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2), float("nan"))
    return mesh, values


def save_mesh(mesh: TriangleMesh, path: str | Path, values: np.ndarray | None = None) -> None:
    Path(path).write_text(mesh_to_text(mesh, values))
