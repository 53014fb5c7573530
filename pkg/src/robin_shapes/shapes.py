"""Parametrized families of candidate domains.

Every family maps to and from a flat parameter vector with box bounds, which
is what the optimizer searches over. ``realize`` turns parameters into a
validated :class:`~robin_shapes.geometry.PlanarDomain` or raises.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .geometry import (
    Crack,
    GeometryError,
    PlanarDomain,
    PolygonComponent,
    ValidationReport,
    disjoint_union,
    points_in_component,
    translate,
    validate,
)


@dataclass(frozen=True)
class RadialFourier:
    """Star-shaped polygon sampled from r(θ) = a0 + Σ a_i cos iθ + b_i sin iθ.

    ``search_from`` is the lowest Fourier mode exposed to the optimizer.
    Mode 0 is fixed by perimeter projection, and mode 1 is a translation to
    first order, so the default search starts at mode 2.
    """

    a: tuple[float, ...] = (1.0,)
    b: tuple[float, ...] = ()
    center: tuple[float, float] = (0.0, 0.0)
    n_vertices: int = 128
    search_from: int = 2
    kind: str = field(default="radial_fourier", init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", tuple(float(v) for v in self.a))
        b = tuple(float(v) for v in self.b)
        b = b + (0.0,) * (len(self.a) - 1 - len(b))
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "center", (float(self.center[0]), float(self.center[1])))
        if len(self.b) != len(self.a) - 1:
            raise ValueError("need len(b) == len(a) - 1")

    @property
    def modes(self) -> int:
        return len(self.a) - 1

    def radius(self, theta: np.ndarray) -> np.ndarray:
        r = np.full_like(theta, self.a[0], dtype=float)
        for i in range(1, self.modes + 1):
            r += self.a[i] * np.cos(i * theta) + self.b[i - 1] * np.sin(i * theta)
        return r

    def scaled(self, t: float) -> "RadialFourier":
        return RadialFourier(tuple(t * v for v in self.a), tuple(t * v for v in self.b),
                             (t * self.center[0], t * self.center[1]), self.n_vertices, self.search_from)

    def vector(self):
        lo = self.search_from
        x = [self.a[i] for i in range(lo, self.modes + 1)] + [self.b[i - 1] for i in range(lo, self.modes + 1)]
        half = 0.5 * abs(self.a[0])
        n = len(x)
        return np.array(x, float), np.full(n, -half), np.full(n, half)

    def with_vector(self, x) -> "RadialFourier":
        lo = self.search_from
        count = self.modes + 1 - lo
        a = list(self.a)
        b = list(self.b)
        for j in range(count):
            a[lo + j] = float(x[j])
            b[lo + j - 1] = float(x[count + j])
        return RadialFourier(tuple(a), tuple(b), self.center, self.n_vertices, self.search_from)


@dataclass(frozen=True)
class PolygonVertices:
    points: tuple[tuple[float, float], ...]
    kind: str = field(default="polygon_vertices", init=False)

    def __post_init__(self):
        object.__setattr__(self, "points", tuple((float(x), float(y)) for x, y in self.points))

    def scaled(self, t: float) -> "PolygonVertices":
        return PolygonVertices(tuple((t * x, t * y) for x, y in self.points))

    def vector(self):
        p = np.array(self.points, float)
        lo, hi = p.min(axis=0), p.max(axis=0)
        pad = 0.5 * (hi - lo)
        x = p.ravel()
        return x, np.tile(lo - pad, len(p)), np.tile(hi + pad, len(p))

    def with_vector(self, x) -> "PolygonVertices":
        return PolygonVertices(tuple(map(tuple, np.asarray(x, float).reshape(-1, 2))))


@dataclass(frozen=True)
class MultiComponent:
    """Several parametrized shapes, each translated by its own offset."""

    parts: tuple["ShapeParams", ...]
    translations: tuple[tuple[float, float], ...]
    kind: str = field(default="multi_component", init=False)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "translations", tuple((float(x), float(y)) for x, y in self.translations))
        if len(self.parts) != len(self.translations) or not self.parts:
            raise ValueError("need one translation per part")

    def scaled(self, t: float) -> "MultiComponent":
        return MultiComponent(tuple(p.scaled(t) for p in self.parts),
                              tuple((t * x, t * y) for x, y in self.translations))

    def vector(self):
        xs, los, his = [], [], []
        for part, off in zip(self.parts, self.translations):
            x, lo, hi = part.vector()
            xs += [x, off]
            los += [lo, np.array(off) - 2.0]
            his += [hi, np.array(off) + 2.0]
        return np.concatenate(xs), np.concatenate(los), np.concatenate(his)

    def with_vector(self, x) -> "MultiComponent":
        parts, offs, pos = [], [], 0
        for part in self.parts:
            n = len(part.vector()[0])
            parts.append(part.with_vector(x[pos:pos + n]))
            offs.append((float(x[pos + n]), float(x[pos + n + 1])))
            pos += n + 2
        return MultiComponent(tuple(parts), tuple(offs))


@dataclass(frozen=True)
class SlitFamily:
    """A host shape plus straight slits given by their endpoints."""

    host: "ShapeParams"
    segments: tuple[tuple[tuple[float, float], tuple[float, float]], ...] = ()
    clearance: float | None = None
    kind: str = field(default="slit_family", init=False)

    def __post_init__(self):
        segs = tuple(((float(p[0]), float(p[1])), (float(q[0]), float(q[1]))) for p, q in self.segments)
        object.__setattr__(self, "segments", segs)

    def scaled(self, t: float) -> "SlitFamily":
        segs = tuple(((t * p[0], t * p[1]), (t * q[0], t * q[1])) for p, q in self.segments)
        return SlitFamily(self.host.scaled(t), segs, None if self.clearance is None else t * self.clearance)

    def vector(self):
        x, lo, hi = self.host.vector()
        dom = _realize_unchecked(self.host)
        bx0, by0, bx1, by1 = dom.bounds
        seg = np.array(self.segments, float).ravel()
        n = len(seg) // 2
        return (np.concatenate([x, seg]), np.concatenate([lo, np.tile([bx0, by0], n)]),
                np.concatenate([hi, np.tile([bx1, by1], n)]))

    def with_vector(self, x) -> "SlitFamily":
        n = len(self.host.vector()[0])
        host = self.host.with_vector(x[:n])
        seg = np.asarray(x[n:], float).reshape(-1, 2, 2)
        return SlitFamily(host, tuple((tuple(s[0]), tuple(s[1])) for s in seg), self.clearance)


ShapeParams = Union[RadialFourier, PolygonVertices, MultiComponent, SlitFamily]


class InfeasibleShapeError(GeometryError):
    """Parameters realize an invalid geometry."""


def _realize_unchecked(params: ShapeParams) -> PlanarDomain:
    if isinstance(params, RadialFourier):
        theta = 2.0 * np.pi * np.arange(params.n_vertices) / params.n_vertices
        r = params.radius(theta)
        if not np.all(r > 0):
            report = ValidationReport()
            report.add("radius", "radial function is not positive", int(np.argmin(r)))
            raise InfeasibleShapeError(f"nonpositive radius {r.min():.3g}", report)
        pts = np.column_stack([params.center[0] + r * np.cos(theta), params.center[1] + r * np.sin(theta)])
        return PlanarDomain((PolygonComponent(pts),))
    if isinstance(params, PolygonVertices):
        return PlanarDomain((PolygonComponent(np.array(params.points)),))
    if isinstance(params, MultiComponent):
        dom = None
        for part, off in zip(params.parts, params.translations):
            piece = translate(_realize_unchecked(part), off)
            if dom is None:
                dom = piece
                continue
            try:
                dom = disjoint_union(dom, piece)
            except GeometryError as exc:
                raise InfeasibleShapeError(str(exc), exc.report) from exc
        return dom
    if isinstance(params, SlitFamily):
        host = _realize_unchecked(params.host)
        cracks = tuple(Crack(np.array(seg), _owner(host, seg)) for seg in params.segments)
        return PlanarDomain(host.components, host.cracks + cracks, params.clearance)
    raise TypeError(f"unknown shape parameters {type(params).__name__}")


def _owner(host: PlanarDomain, seg) -> int:
    mid = np.mean(np.asarray(seg, float), axis=0)[None, :]
    for i, comp in enumerate(host.components):
        if points_in_component(mid, comp)[0]:
            return i
    return 0


def realize(params: ShapeParams) -> PlanarDomain:
    """Realize parameters as a valid domain, or raise :class:`InfeasibleShapeError`."""
    dom = _realize_unchecked(params)
    report = validate(dom)
    if not report.ok:
        raise InfeasibleShapeError(f"parameters realize an invalid geometry: {report}", report)
    return dom


def params_to_dict(params: ShapeParams) -> dict:
    if isinstance(params, RadialFourier):
        return {"kind": params.kind, "a": list(params.a), "b": list(params.b), "center": list(params.center),
                "n_vertices": params.n_vertices, "search_from": params.search_from}
    if isinstance(params, PolygonVertices):
        return {"kind": params.kind, "points": [list(p) for p in params.points]}
    if isinstance(params, MultiComponent):
        return {"kind": params.kind, "parts": [params_to_dict(p) for p in params.parts],
                "translations": [list(t) for t in params.translations]}
    if isinstance(params, SlitFamily):
        out = {"kind": params.kind, "host": params_to_dict(params.host),
               "segments": [[list(p), list(q)] for p, q in params.segments]}
        if params.clearance is not None:
            out["clearance"] = params.clearance
        return out
    raise TypeError(f"unknown shape parameters {type(params).__name__}")


def params_from_dict(data: dict) -> ShapeParams:
    kind = data.get("kind")
    if kind == "radial_fourier":
        return RadialFourier(tuple(data.get("a", (1.0,))), tuple(data.get("b", ())),
                             tuple(data.get("center", (0.0, 0.0))), int(data.get("n_vertices", 128)),
                             int(data.get("search_from", 2)))
    if kind == "polygon_vertices":
        return PolygonVertices(tuple(map(tuple, data["points"])))
    if kind == "multi_component":
        return MultiComponent(tuple(params_from_dict(p) for p in data["parts"]),
                              tuple(map(tuple, data["translations"])))
    if kind == "slit_family":
        return SlitFamily(params_from_dict(data["host"]),
                          tuple((tuple(p), tuple(q)) for p, q in data.get("segments", [])),
                          data.get("clearance"))
    raise ValueError(f"unknown shape kind {kind!r}")


def perturbed_circle(seed: int, modes: int = 3, amplitude: float = 0.15, n_vertices: int = 128) -> RadialFourier:
    """Unit circle with seeded random Fourier perturbations in modes 2..modes."""
    rng = np.random.default_rng(seed)
    a = [1.0, 0.0] + list(amplitude * rng.uniform(-1, 1, modes - 1))
    b = [0.0] + list(amplitude * rng.uniform(-1, 1, modes - 1))
    return RadialFourier(tuple(a), tuple(b), n_vertices=n_vertices)


def random_star(seed: int, modes: int = 4, amplitude: float = 0.25, n_vertices: int = 96) -> RadialFourier:
    """Seeded star-shaped domain; coefficients decay like 1/i."""
    rng = np.random.default_rng(seed)
    a = [1.0] + [amplitude * rng.uniform(-1, 1) / i for i in range(1, modes + 1)]
    b = [amplitude * rng.uniform(-1, 1) / i for i in range(1, modes + 1)]
    return RadialFourier(tuple(a), tuple(b), n_vertices=n_vertices, search_from=1)

