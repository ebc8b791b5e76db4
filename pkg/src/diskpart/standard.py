"""Standard graphs: three arcs meeting at 120 degrees, orthogonal to the circle.

The two-region splitter is placed symmetrically about the x-axis and
traversed from its lower endpoint ``p0`` to its upper endpoint ``p1`` with
region 1 on its left.  A standard graph is completed from a splitter by
sending ``p0`` to infinity with :func:`geometry.disk_to_halfplane`; there
the splitter is a vertical line and the two new edges are equal circles
centered on the real axis.  The lower part of the splitter (vertex to
``p0``) is kept as C12 and region 3 is carved out next to ``p1``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import (
    TOL_GEOM,
    ArcEdge,
    GeometryError,
    Point,
    arc_polygon_area,
    boundary_arcs,
    circle_through,
    disk_to_halfplane,
    meets_unit_circle_orthogonally,
)
from .graph import BOUNDARY, INTERIOR, Edge, PartitionGraph, Region, Vertex

SQRT3 = math.sqrt(3.0)


class ConsistencyError(ValueError):
    """Curvatures that do not satisfy the balancing condition."""


class DegenerateVertexError(GeometryError):
    pass


@dataclass(frozen=True)
class TwoRegionSplitter:
    edge: ArcEdge

    @property
    def h(self) -> float:
        return self.edge.h

    @property
    def length(self) -> float:
        return self.edge.length

    def region_areas(self) -> tuple[float, float]:
        """(area left of the splitter, area right of it)."""
        p0, p1 = self.edge.p0, self.edge.p1
        th0 = math.atan2(p0.y, p0.x)
        th1 = math.atan2(p1.y, p1.x)
        a1 = arc_polygon_area([self.edge] + boundary_arcs(th1, th0))
        return a1, math.pi - a1

    def to_partition_graph(self) -> PartitionGraph:
        e = self.edge
        verts = (Vertex(0, e.p0, BOUNDARY), Vertex(1, e.p1, BOUNDARY))
        return PartitionGraph(
            verts,
            (Edge(0, e, 0, 1, 0, 1),),
            (Region(0, None, self.h / 2), Region(1, None, -self.h / 2)),
            {"kind": "splitter"},
        )


def splitter_endpoints(h: float) -> tuple[Point, Point]:
    s = math.sqrt(1.0 + h * h)
    x, y = -h / s, 1.0 / s
    return Point(x, -y), Point(x, y)


def splitter_from_curvature(h: float) -> TwoRegionSplitter:
    """The arc of curvature ``h`` orthogonal to the unit circle (h = 0: diameter)."""
    if not math.isfinite(h):
        raise GeometryError("curvature must be finite")
    p0, p1 = splitter_endpoints(h)
    return TwoRegionSplitter(ArcEdge(p0, p1, float(h)))


def curvatures_from_halfplane(d: float, x: float) -> tuple[float, float]:
    """(h31, h32) of the completed graph from the half-plane height ``d`` of the vertex."""
    if not d > 0:
        raise GeometryError("d must be positive")
    common = -SQRT3 * d + SQRT3 * (1.0 + x * x) / d
    return 0.25 * (common - 2.0 * x), 0.25 * (common + 2.0 * x)


@dataclass(frozen=True)
class StandardGraph:
    """C12, C23, C31 oriented boundary -> vertex with region i on the left of C_ij."""

    edges: tuple[ArcEdge, ArcEdge, ArcEdge]
    interior_vertex: Point
    boundary_vertices: tuple[Point, Point, Point]
    pressures: tuple[float, float, float]
    params: dict = field(default_factory=dict, compare=False, hash=False)

    @property
    def curvatures(self) -> tuple[float, float, float]:
        return tuple(e.h for e in self.edges)

    @property
    def length(self) -> float:
        return sum(e.length for e in self.edges)

    def to_partition_graph(self, targets=None) -> PartitionGraph:
        v = self.interior_vertex
        b = self.boundary_vertices
        verts = (Vertex(0, v, INTERIOR),) + tuple(Vertex(i + 1, b[i], BOUNDARY) for i in range(3))
        edges = tuple(Edge(i, self.edges[i], i + 1, 0, i, (i + 1) % 3) for i in range(3))
        targets = targets if targets is not None else [None] * 3
        regions = tuple(Region(i, targets[i], self.pressures[i]) for i in range(3))
        return PartitionGraph(verts, edges, regions, {"kind": "standard", **self.params})

    def region_areas(self) -> np.ndarray:
        return standard_region_areas(self)

    def rotated(self, angle: float) -> "StandardGraph":
        return StandardGraph(
            tuple(e.rotated(angle) for e in self.edges),
            self.interior_vertex.rotated(angle),
            tuple(p.rotated(angle) for p in self.boundary_vertices),
            self.pressures,
            dict(self.params),
        )


def standard_region_areas(g: StandardGraph) -> np.ndarray:
    c12, c23, c31 = g.edges
    b12, b23, b31 = (math.atan2(p.y, p.x) for p in g.boundary_vertices)
    # region i: C_ij forward, C_ki backward, then the boundary from b_ki to b_ij
    a1 = arc_polygon_area([c12, c31.reversed()] + boundary_arcs(b31, b12))
    a2 = arc_polygon_area([c23, c12.reversed()] + boundary_arcs(b12, b23))
    a3 = arc_polygon_area([c31, c23.reversed()] + boundary_arcs(b23, b31))
    return np.array([a1, a2, a3])


def pressures_from_curvatures(h12: float, h23: float, h31: float) -> tuple[float, float, float]:
    resid = abs(h12 + h23 + h31)
    if resid > TOL_GEOM * max(1.0, abs(h12), abs(h23), abs(h31)):
        raise ConsistencyError(f"unbalanced curvatures, |h12 + h23 + h31| = {resid:.3g}")
    return ((h12 - h31) / 3.0, (h23 - h12) / 3.0, (h31 - h23) / 3.0)


def pressures_of(g: StandardGraph | tuple) -> tuple[float, float, float]:
    """Zero-sum pressures solving h_ij = p_i - p_j."""
    hs = g.curvatures if isinstance(g, StandardGraph) else tuple(g)
    return pressures_from_curvatures(*hs)


def _branch(m_inv, w: complex, center: float, radius: float, end_angle: float, mid_angle: float) -> ArcEdge:
    """Arc from the vertex image ``w`` to the real axis, mapped back to the disk."""
    pts = [w, center + radius * np.exp(1j * mid_angle), center + radius * np.exp(1j * end_angle)]
    zs = [complex(m_inv(z)) for z in pts]
    img = circle_through(*zs)
    return ArcEdge(Point(zs[0].real, zs[0].imag), Point(zs[2].real, zs[2].imag), img.curvature)


def standard_from_height(h12: float, d: float) -> StandardGraph:
    """Complete the splitter of curvature ``h12`` at the vertex whose image has height ``d``."""
    if not d > 0 or not math.isfinite(d):
        raise DegenerateVertexError("the vertex must be interior (0 < d < inf)")
    s = splitter_from_curvature(h12)
    p0, p1 = s.edge.p0, s.edge.p1
    f = disk_to_halfplane(p0)
    finv = f.inverse()
    x0 = complex(f(p1.z)).real
    w = complex(x0, d)
    rho = 2.0 * d / SQRT3
    # branch toward +x bounds R1 | R3; branch toward -x bounds R3 | R2
    right = _branch(finv, w, x0 - d / SQRT3, rho, 0.0, math.pi / 6)
    left = _branch(finv, w, x0 + d / SQRT3, rho, math.pi, 5 * math.pi / 6)
    vz = complex(finv(w))
    v = Point(vz.real, vz.imag)
    if v.norm >= 1.0 - 1e-14:
        raise DegenerateVertexError("vertex reached the boundary circle")
    c12 = ArcEdge(p0, v, h12)
    c23 = left.reversed()  # boundary -> v, R2 on the left
    c31 = right.reversed()  # boundary -> v, R3 on the left
    # snap the new boundary endpoints onto the circle
    c23 = ArcEdge(_unit(c23.p0), v, c23.h)
    c31 = ArcEdge(_unit(c31.p0), v, c31.h)
    h23 = c23.h
    h31 = c31.h
    # close the cocycle exactly at the level of the stored numbers
    pressures = ((h12 - h31) / 3.0, (h23 - h12) / 3.0, (h31 - h23) / 3.0)
    g = StandardGraph(
        (c12, c23, c31),
        v,
        (p0, c23.p0, c31.p0),
        pressures,
        {"h12": float(h12), "d": float(d)},
    )
    _check_embedded(g)
    return g


def _unit(p: Point) -> Point:
    n = p.norm
    return Point(p.x / n, p.y / n)


def _check_embedded(g: StandardGraph) -> None:
    angs = sorted(math.atan2(p.y, p.x) for p in g.boundary_vertices)
    gaps = np.diff(angs + [angs[0] + 2 * math.pi])
    if np.min(gaps) < 1e-12:
        raise GeometryError("completed graph is not embedded: boundary vertices collide")


def vertex_height(s: TwoRegionSplitter, v: Point) -> float:
    """Half-plane height of ``v``; checks that ``v`` lies on the splitter."""
    f = disk_to_halfplane(s.edge.p0)
    x0 = complex(f(s.edge.p1.z)).real
    w = complex(f(v.z))
    if abs(w.real - x0) > 1e-7 * max(1.0, abs(w)):
        raise GeometryError("vertex does not lie on the splitter")
    return w.imag


def complete_from_edge(s: TwoRegionSplitter, v: Point) -> StandardGraph:
    """The unique standard graph whose C12 lies on ``s`` with interior vertex ``v``."""
    if v.norm >= 1.0 - TOL_GEOM:
        raise DegenerateVertexError("the vertex must be strictly inside the disk")
    d = vertex_height(s, v)
    g = standard_from_height(s.h, d)
    return g


def splitter_point(s: TwoRegionSplitter, frac: float) -> Point:
    """Point at fraction ``frac`` of the arc length from p0."""
    xy = s.edge.point_at(frac * s.edge.length)
    return Point(float(xy[0]), float(xy[1]))


# ---------------------------------------------------------------------------
# stationarity diagnostics


@dataclass
class StationarityReport:
    angle: dict[int, float]  # interior vertex -> max |angle gap - 120 deg| (radians)
    balance: dict[int, float]  # interior vertex -> |sum of cyclic curvatures|
    orthogonality: dict[int, float]  # boundary vertex -> residual angle
    curvature: dict[int, float]  # edge -> curvature non-constancy
    degree_problems: list[str]

    def max_residual(self) -> float:
        vals = [0.0]
        for d in (self.angle, self.balance, self.orthogonality, self.curvature):
            vals.extend(d.values())
        return float(max(vals))

    def ok(self, tol: float = 1e-6) -> bool:
        return not self.degree_problems and self.max_residual() < tol

    def to_dict(self) -> dict:
        return {
            "angle": {str(k): v for k, v in self.angle.items()},
            "balance": {str(k): v for k, v in self.balance.items()},
            "orthogonality": {str(k): v for k, v in self.orthogonality.items()},
            "curvature": {str(k): v for k, v in self.curvature.items()},
            "degree_problems": list(self.degree_problems),
            "max_residual": self.max_residual(),
        }


def check_stationary(g: PartitionGraph) -> StationarityReport:
    """Residuals of the four stationarity conditions for every vertex and edge."""
    angle, balance, ortho, curv = {}, {}, {}, {}
    for v in g.vertices:
        inc = g.incident(v.id)
        if v.kind == INTERIOR:
            if len(inc) != 3:
                continue
            arcs = [g.outgoing_arc(eid, fwd) for eid, fwd in inc]
            angs = sorted(a.start_angle % (2 * math.pi) for a in arcs)
            gaps = np.diff(angs + [angs[0] + 2 * math.pi])
            angle[v.id] = float(np.max(np.abs(gaps - 2 * math.pi / 3)))
            balance[v.id] = abs(sum(a.h for a in arcs))
        else:
            for eid, fwd in inc:
                ortho[v.id] = meets_unit_circle_orthogonally(g.outgoing_arc(eid, fwd))
    fit = g.metadata.get("curvature_residuals", {})
    for e in g.edges:
        curv[e.id] = float(fit.get(e.id, fit.get(str(e.id), 0.0)))
    return StationarityReport(angle, balance, ortho, curv, g.check_degrees())
