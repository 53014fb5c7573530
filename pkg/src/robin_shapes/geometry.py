"""Planar polygonal domains with interior cracks.

A domain is a finite union of polygonal components (outer loop counterclockwise,
holes clockwise) plus open polylines ("cracks") lying strictly inside a
component. Geometric predicates are epsilon-based on coordinates normalized
to the unit bounding box (``EPS = 1e-12``).
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

EPS = 1e-12
DEFAULT_CLEARANCE_FACTOR = 0.02


class GeometryError(ValueError):
    """Invalid geometry; carries the validation report when there is one."""

    def __init__(self, message: str, report: "ValidationReport | None" = None):
        super().__init__(message)
        self.report = report


def _as_points(points, closed_min: int = 3) -> np.ndarray:
    arr = np.array(points, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2 or arr.shape[0] < closed_min:
        raise GeometryError(f"expected at least {closed_min} points of shape (n, 2), got {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class PolygonComponent:
    """One connected polygon: ``outer`` counterclockwise, ``holes`` clockwise.

    Loops are stored without repeating the first vertex.
    """

    outer: np.ndarray
    holes: tuple[np.ndarray, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "outer", _as_points(self.outer))
        object.__setattr__(self, "holes", tuple(_as_points(h) for h in self.holes))

    @property
    def loops(self) -> tuple[np.ndarray, ...]:
        return (self.outer,) + self.holes


@dataclass(frozen=True, eq=False)
class Crack:
    """Open polyline with at least one segment, owned by ``component``."""

    points: np.ndarray
    component: int = 0

    def __post_init__(self):
        object.__setattr__(self, "points", _as_points(self.points, closed_min=2))
        object.__setattr__(self, "component", int(self.component))

    @property
    def length(self) -> float:
        return math.fsum(_edge_lengths(self.points, closed=False))


@dataclass(frozen=True, eq=False)
class PlanarDomain:
    """Admissible geometry: polygonal components and interior cracks.

    ``clearance`` is the minimum allowed distance from a crack to the domain
    boundary and to other cracks; ``None`` means 2% of the diameter.
    """

    components: tuple[PolygonComponent, ...]
    cracks: tuple[Crack, ...] = ()
    clearance: float | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        object.__setattr__(self, "cracks", tuple(self.cracks))
        if not self.components:
            raise GeometryError("a domain needs at least one component")

    @property
    def loops(self) -> list[np.ndarray]:
        return [loop for comp in self.components for loop in comp.loops]

    @property
    def vertices(self) -> np.ndarray:
        return np.concatenate(self.loops + [c.points for c in self.cracks])

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        v = np.concatenate(self.loops)
        return float(v[:, 0].min()), float(v[:, 1].min()), float(v[:, 0].max()), float(v[:, 1].max())

    @property
    def diameter(self) -> float:
        if "diameter" not in self._cache:
            self._cache["diameter"] = _diameter(np.concatenate(self.loops))
        return self._cache["diameter"]

    @property
    def effective_clearance(self) -> float:
        if self.clearance is not None:
            return float(self.clearance)
        return DEFAULT_CLEARANCE_FACTOR * self.diameter

    # JSON schema: {"components":[{"outer":[[x,y],...],"holes":[...]}],
    #               "cracks":[{"component":i,"points":[[x,y],...]}]}
    def to_dict(self) -> dict:
        out = {
            "components": [
                {"outer": comp.outer.tolist(), "holes": [h.tolist() for h in comp.holes]}
                for comp in self.components
            ],
            "cracks": [{"component": c.component, "points": c.points.tolist()} for c in self.cracks],
        }
        if self.clearance is not None:
            out["clearance"] = self.clearance
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "PlanarDomain":
        try:
            comps = [
                PolygonComponent(np.asarray(c["outer"], float), tuple(np.asarray(h, float) for h in c.get("holes", [])))
                for c in data["components"]
            ]
            cracks = [Crack(np.asarray(c["points"], float), c.get("component", 0)) for c in data.get("cracks", [])]
        except (KeyError, TypeError, ValueError) as exc:
            raise GeometryError(f"malformed geometry record: {exc}") from exc
        return cls(tuple(comps), tuple(cracks), data.get("clearance"))

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "PlanarDomain":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GeometryError(f"malformed geometry JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise GeometryError("geometry JSON must be an object")
        return cls.from_dict(data)


def load_domain(path: str | Path) -> PlanarDomain:
    return PlanarDomain.from_json(Path(path).read_text())


def save_domain(domain: PlanarDomain, path: str | Path) -> None:
    Path(path).write_text(domain.to_json())


# ---------------------------------------------------------------------------
# primitive predicates (vectorized)

def _edge_lengths(points: np.ndarray, closed: bool = True) -> np.ndarray:
    nxt = np.roll(points, -1, axis=0) if closed else points[1:]
    cur = points if closed else points[:-1]
    d = nxt - cur
    return np.hypot(d[:, 0], d[:, 1])


def _segments(points: np.ndarray, closed: bool = True) -> np.ndarray:
    """(n, 2, 2) array of segment endpoints."""
    nxt = np.roll(points, -1, axis=0) if closed else points[1:]
    cur = points if closed else points[:-1]
    return np.stack([cur, nxt], axis=1)


def signed_area(loop: np.ndarray) -> float:
    x, y = loop[:, 0], loop[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def _diameter(points: np.ndarray) -> float:
    best = 0.0
    for start in range(0, len(points), 512):
        chunk = points[start:start + 512]
        d = chunk[:, None, :] - points[None, :, :]
        best = max(best, float(np.sqrt((d ** 2).sum(-1)).max()))
    return best


def _orient(a, b, c):
    return (b[..., 0] - a[..., 0]) * (c[..., 1] - a[..., 1]) - (b[..., 1] - a[..., 1]) * (c[..., 0] - a[..., 0])


def _sign(v):
    out = np.sign(v)
    out[np.abs(v) < EPS] = 0.0
    return out


def segments_intersect(s: np.ndarray, t: np.ndarray) -> np.ndarray:
    """Pairwise closed-segment intersection test, shape (len(s), len(t)).

    Touching counts as intersecting. Inputs must already be normalized.
    """
    p1, p2 = s[:, None, 0], s[:, None, 1]
    q1, q2 = t[None, :, 0], t[None, :, 1]
    o1 = _sign(_orient(p1, p2, q1))
    o2 = _sign(_orient(p1, p2, q2))
    o3 = _sign(_orient(q1, q2, p1))
    o4 = _sign(_orient(q1, q2, p2))
    hit = (o1 * o2 <= 0) & (o3 * o4 <= 0)
    collinear = (o1 == 0) & (o2 == 0)
    if collinear.any():
        lo_p = np.minimum(p1, p2)
        hi_p = np.maximum(p1, p2)
        lo_q = np.minimum(q1, q2)
        hi_q = np.maximum(q1, q2)
        overlap = np.all((lo_p <= hi_q + EPS) & (lo_q <= hi_p + EPS), axis=-1)
        hit = np.where(collinear, overlap, hit)
    return hit


def _point_segment_distance(p: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Distance from points (n, 2) to segments (m, 2, 2), shape (n, m)."""
    a = s[None, :, 0]
    d = s[None, :, 1] - a
    w = p[:, None, :] - a
    dd = (d ** 2).sum(-1)
    t = np.clip(np.where(dd > 0, (w * d).sum(-1) / np.where(dd > 0, dd, 1.0), 0.0), 0.0, 1.0)
    diff = w - t[..., None] * d
    return np.sqrt((diff ** 2).sum(-1))


def segment_distance(s: np.ndarray, t: np.ndarray) -> float:
    """Minimum distance between two segment sets (0 if any pair intersects)."""
    if len(s) == 0 or len(t) == 0:
        return math.inf
    scale = max(np.abs(s).max(), np.abs(t).max(), 1.0)
    if segments_intersect(s / scale, t / scale).any():
        return 0.0
    d = min(
        _point_segment_distance(s[:, 0], t).min(),
        _point_segment_distance(s[:, 1], t).min(),
        _point_segment_distance(t[:, 0], s).min(),
        _point_segment_distance(t[:, 1], s).min(),
    )
    return float(d)


def points_in_loop(points: np.ndarray, loop: np.ndarray) -> np.ndarray:
    """Even-odd crossing test (boundary points are unspecified)."""
    x, y = points[:, None, 0], points[:, None, 1]
    a = loop[None, :, :]
    b = np.roll(loop, -1, axis=0)[None, :, :]
    ya, yb = a[..., 1], b[..., 1]
    straddle = (ya > y) != (yb > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xc = a[..., 0] + (y - ya) * (b[..., 0] - a[..., 0]) / (yb - ya)
    crossings = straddle & (x < xc)
    return (crossings.sum(axis=1) % 2) == 1


def points_in_component(points: np.ndarray, comp: PolygonComponent) -> np.ndarray:
    inside = points_in_loop(points, comp.outer)
    for hole in comp.holes:
        inside &= ~points_in_loop(points, hole)
    return inside


# ---------------------------------------------------------------------------
# validation

class Violation(NamedTuple):
    kind: str
    message: str
    indices: tuple


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, kind: str, message: str, *indices) -> None:
        self.violations.append(Violation(kind, message, tuple(indices)))

    def kinds(self) -> set[str]:
        return {v.kind for v in self.violations}

    def __str__(self) -> str:
        if self.ok:
            return "ok"
        return "; ".join(f"{v.message} {v.indices}" for v in self.violations)


def _loop_is_simple(seg: np.ndarray) -> bool:
    n = len(seg)
    hit = segments_intersect(seg, seg)
    i, j = np.triu_indices(n, k=1)
    adjacent = (j == i + 1) | ((i == 0) & (j == n - 1))
    if hit[i[~adjacent], j[~adjacent]].any():
        return False
    # adjacent edges may only share their common vertex: reject folds back
    d0 = seg[:, 1] - seg[:, 0]
    d1 = np.roll(d0, -1, axis=0)
    cross = d0[:, 0] * d1[:, 1] - d0[:, 1] * d1[:, 0]
    dot = (d0 * d1).sum(-1)
    return not np.any((np.abs(cross) < EPS) & (dot < 0))


def validate(domain: PlanarDomain) -> ValidationReport:
    """Check admissibility; never raises, returns a report of violations."""
    report = ValidationReport()
    try:
        _validate_into(domain, report)
    except Exception as exc:  # report object contract: never throw
        report.add("internal", f"validation failed: {exc}")
    return report


def _validate_into(domain: PlanarDomain, report: ValidationReport) -> None:
    all_pts = domain.vertices
    if not np.all(np.isfinite(all_pts)):
        report.add("non_finite", "non-finite coordinate")
        return
    lo = all_pts.min(axis=0)
    scale = float((all_pts.max(axis=0) - lo).max())
    if scale <= 0:
        report.add("degenerate", "domain has zero extent")
        return

    def norm(p):
        return (p - lo) / scale

    loop_segs = []
    for ci, comp in enumerate(domain.components):
        segs = []
        for li, loop in enumerate(comp.loops):
            seg = _segments(norm(loop))
            segs.append(seg)
            if np.any(_edge_lengths(norm(loop)) < EPS):
                report.add("zero_edge", "loop has a zero-length edge", ci, li)
                continue
            if not _loop_is_simple(seg):
                report.add("loop_not_simple", "loop not simple", ci, li)
            area = signed_area(loop)
            if li == 0 and not area > 0:
                report.add("orientation", "outer loop must be counterclockwise", ci, li)
            if li > 0 and not area < 0:
                report.add("orientation", "hole must be clockwise", ci, li)
        loop_segs.append(segs)
        outer = comp.outer
        for hi, hole in enumerate(comp.holes, start=1):
            if segments_intersect(segs[0], segs[hi]).any() or not points_in_loop(hole, outer).all():
                report.add("hole_outside", "hole not strictly inside outer loop", ci, hi)
            for hj in range(hi + 1, len(comp.loops)):
                other = comp.loops[hj]
                if (segments_intersect(segs[hi], segs[hj]).any()
                        or points_in_loop(hole[:1], other).any()
                        or points_in_loop(other[:1], hole).any()):
                    report.add("holes_overlap", "holes not disjoint", ci, hi, hj)

    for ci in range(len(domain.components)):
        for cj in range(ci + 1, len(domain.components)):
            a, b = domain.components[ci], domain.components[cj]
            seg_a = np.concatenate(loop_segs[ci])
            seg_b = np.concatenate(loop_segs[cj])
            if (segments_intersect(seg_a, seg_b).any()
                    or points_in_component(b.outer[:1], a).any()
                    or points_in_component(a.outer[:1], b).any()):
                report.add("components_overlap", "components not separated", ci, cj)

    total_area = sum(component_area(c) for c in domain.components)
    if not total_area > 0:
        report.add("area", "domain area must be positive")

    clearance = domain.effective_clearance
    crack_segs = []
    for k, crack in enumerate(domain.cracks):
        seg = _segments(crack.points, closed=False)
        crack_segs.append(seg)
        if not 0 <= crack.component < len(domain.components):
            report.add("crack_component", "crack refers to a missing component", k)
            continue
        comp = domain.components[crack.component]
        nseg = _segments(norm(crack.points), closed=False)
        if np.any(_edge_lengths(norm(crack.points), closed=False) < EPS):
            report.add("zero_edge", "crack has a zero-length segment", k)
            continue
        if len(nseg) > 1:
            hit = segments_intersect(nseg, nseg)
            i, j = np.triu_indices(len(nseg), k=2)
            d0 = nseg[:-1, 1] - nseg[:-1, 0]
            d1 = nseg[1:, 1] - nseg[1:, 0]
            fold = (np.abs(d0[:, 0] * d1[:, 1] - d0[:, 1] * d1[:, 0]) < EPS) & ((d0 * d1).sum(-1) < 0)
            if hit[i, j].any() or fold.any():
                report.add("crack_not_simple", "crack self-intersects", k)
        boundary = np.concatenate(loop_segs[crack.component])
        if (segments_intersect(nseg, boundary).any()
                or not points_in_component(crack.points, comp).all()):
            report.add("crack_not_interior", "crack not strictly interior", k)
            continue
        all_boundary = np.concatenate([_segments(loop) for loop in comp.loops])
        if segment_distance(seg, all_boundary) < clearance:
            report.add("clearance", "clearance violation: crack too close to boundary", k)
    for k in range(len(crack_segs)):
        for m in range(k + 1, len(crack_segs)):
            d = segment_distance(crack_segs[k], crack_segs[m])
            if d == 0.0:
                report.add("cracks_intersect", "cracks intersect", k, m)
            elif d < clearance:
                report.add("clearance", "clearance violation: cracks too close", k, m)


def require_valid(domain: PlanarDomain) -> PlanarDomain:
    report = validate(domain)
    if not report.ok:
        raise GeometryError(f"invalid domain: {report}", report)
    return domain


# ---------------------------------------------------------------------------
# measures

def component_area(comp: PolygonComponent) -> float:
    return math.fsum(signed_area(loop) for loop in comp.loops)


def area(domain: PlanarDomain) -> float:
    """Shoelace area of outer loops minus holes; cracks contribute nothing."""
    require_valid(domain)
    return math.fsum(signed_area(loop) for loop in domain.loops)


def perimeter(domain: PlanarDomain) -> float:
    """Ordinary perimeter: total length of all loops (outer and holes)."""
    return math.fsum(np.concatenate([_edge_lengths(loop) for loop in domain.loops]))


def crack_length(domain: PlanarDomain) -> float:
    if not domain.cracks:
        return 0.0
    return math.fsum(np.concatenate([_edge_lengths(c.points, closed=False) for c in domain.cracks]))


def generalized_perimeter(domain: PlanarDomain) -> float:
    """Loop lengths plus twice the crack length.

    Summed with ``math.fsum`` over every individual edge length (loops first,
    then doubled crack segments), so the result is the correctly rounded sum
    and does not depend on summation order.
    """
    require_valid(domain)
    parts = [_edge_lengths(loop) for loop in domain.loops]
    parts += [2.0 * _edge_lengths(c.points, closed=False) for c in domain.cracks]
    return math.fsum(np.concatenate(parts))


# ---------------------------------------------------------------------------
# constructions

def _map_points(domain: PlanarDomain, fn, clearance) -> PlanarDomain:
    comps = tuple(PolygonComponent(fn(c.outer), tuple(fn(h) for h in c.holes)) for c in domain.components)
    cracks = tuple(Crack(fn(c.points), c.component) for c in domain.cracks)
    return PlanarDomain(comps, cracks, clearance)


def scale(domain: PlanarDomain, t: float) -> PlanarDomain:
    """Dilate about the origin by ``t > 0``."""
    if not t > 0:
        raise ValueError(f"scale factor must be positive, got {t}")
    if t == 1:
        return domain
    clearance = None if domain.clearance is None else domain.clearance * t
    return _map_points(domain, lambda p: p * t, clearance)


def translate(domain: PlanarDomain, offset: Sequence[float]) -> PlanarDomain:
    off = np.asarray(offset, dtype=float)
    return _map_points(domain, lambda p: p + off, domain.clearance)


def disjoint_union(d1: PlanarDomain, d2: PlanarDomain, offset: Sequence[float] = (0.0, 0.0)) -> PlanarDomain:
    """Union of ``d1`` and ``d2`` translated by ``offset``; must be separated."""
    moved = translate(d2, offset)
    seg1 = np.concatenate([_segments(loop) for loop in d1.loops])
    seg2 = np.concatenate([_segments(loop) for loop in moved.loops])
    separated = segment_distance(seg1, seg2) > EPS * max(d1.diameter, d2.diameter)
    if separated:
        for a in d1.components:
            if points_in_component(np.stack([c.outer[0] for c in moved.components]), a).any():
                separated = False
        for b in moved.components:
            if points_in_component(np.stack([c.outer[0] for c in d1.components]), b).any():
                separated = False
    if not separated:
        raise GeometryError("components not separated")
    shift = len(d1.components)
    cracks = d1.cracks + tuple(Crack(c.points, c.component + shift) for c in moved.cracks)
    clearance = min(d1.effective_clearance, d2.effective_clearance)
    return PlanarDomain(d1.components + moved.components, cracks, clearance)


def rectangle(width: float = 1.0, height: float = 1.0, origin: Sequence[float] = (0.0, 0.0)) -> PlanarDomain:
    x0, y0 = float(origin[0]), float(origin[1])
    outer = [[x0, y0], [x0 + width, y0], [x0 + width, y0 + height], [x0, y0 + height]]
    return PlanarDomain((PolygonComponent(np.array(outer)),))


def unit_square() -> PlanarDomain:
    return rectangle(1.0, 1.0)


def with_cracks(domain: PlanarDomain, cracks: Sequence, clearance: float | None = None) -> PlanarDomain:
    """Add cracks given as point lists (component 0) or ``Crack`` objects."""
    extra = tuple(c if isinstance(c, Crack) else Crack(np.asarray(c, float), 0) for c in cracks)
    return PlanarDomain(domain.components, domain.cracks + extra,
                        domain.clearance if clearance is None else clearance)


def square_with_slit(start=(0.25, 0.5), end=(0.75, 0.5)) -> PlanarDomain:
    """The unit square with one straight interior slit."""
    return with_cracks(unit_square(), [[start, end]])


class DiskPolygon(NamedTuple):
    domain: PlanarDomain
    polygon_perimeter: float
    circle_perimeter: float


def regular_polygon_disk(center=(0.0, 0.0), radius: float = 1.0, sides: int = 64) -> DiskPolygon:
    """Regular ``sides``-gon inscribed in the circle of ``radius``."""
    if sides < 8:
        raise ValueError(f"a disk stand-in needs at least 8 sides, got {sides}")
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    theta = 2.0 * np.pi * np.arange(sides) / sides
    pts = np.column_stack([center[0] + radius * np.cos(theta), center[1] + radius * np.sin(theta)])
    dom = PlanarDomain((PolygonComponent(pts),))
    return DiskPolygon(dom, 2.0 * sides * radius * math.sin(math.pi / sides), 2.0 * math.pi * radius)
