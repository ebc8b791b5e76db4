"""Partition graphs made of exact circular arcs."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .geometry import (
    TOL_GEOM,
    ArcEdge,
    GeometryError,
    Point,
    arc_polygon_area,
    boundary_arcs,
    signed_area_contribution,
)
from .topology import BoundaryArc, EdgeSpec, HalfEdge, trace_faces

INTERIOR = "interior"
BOUNDARY = "boundary"


@dataclass(frozen=True)
class Vertex:
    id: int
    point: Point
    kind: str


@dataclass(frozen=True)
class Edge:
    """An arc between two vertices; ``arc.h`` is the curvature toward ``left``."""

    id: int
    arc: ArcEdge
    tail: int
    head: int
    left: int
    right: int


@dataclass(frozen=True)
class Region:
    id: int
    target_area: float | None = None
    pressure: float | None = None


@dataclass(frozen=True)
class Face:
    """A connected component of a region, traced counterclockwise."""

    id: int
    region: int
    items: tuple
    area: float
    n_edges: int  # interior edges plus boundary arcs (one arc per boundary stretch)
    touches_boundary: bool

    @property
    def interior_edges(self) -> list[int]:
        return [it.edge for it in self.items if isinstance(it, HalfEdge)]


@dataclass(frozen=True)
class PartitionGraph:
    vertices: tuple[Vertex, ...]
    edges: tuple[Edge, ...]
    regions: tuple[Region, ...]
    metadata: dict = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        ids = [v.id for v in self.vertices]
        if ids != list(range(len(ids))):
            raise GeometryError("vertex ids must be 0..V-1 in order")
        if [e.id for e in self.edges] != list(range(len(self.edges))):
            raise GeometryError("edge ids must be 0..E-1 in order")
        if [r.id for r in self.regions] != list(range(len(self.regions))):
            raise GeometryError("region ids must be 0..n-1 in order")
        for e in self.edges:
            if e.arc.p0.dist(self.vertices[e.tail].point) > 1e3 * TOL_GEOM:
                raise GeometryError(f"edge {e.id} does not start at vertex {e.tail}")
            if e.arc.p1.dist(self.vertices[e.head].point) > 1e3 * TOL_GEOM:
                raise GeometryError(f"edge {e.id} does not end at vertex {e.head}")

    @property
    def n_regions(self) -> int:
        return len(self.regions)

    @cached_property
    def degree(self) -> list[int]:
        deg = [0] * len(self.vertices)
        for e in self.edges:
            deg[e.tail] += 1
            deg[e.head] += 1
        return deg

    def check_degrees(self) -> list[str]:
        problems = []
        for v in self.vertices:
            want = 3 if v.kind == INTERIOR else 1
            if self.degree[v.id] != want:
                problems.append(f"vertex {v.id} ({v.kind}) has degree {self.degree[v.id]}")
        return problems

    def incident(self, vid: int) -> list[tuple[int, bool]]:
        """(edge id, edge starts at vid) for each edge end at ``vid``."""
        res = []
        for e in self.edges:
            if e.tail == vid:
                res.append((e.id, True))
            if e.head == vid:
                res.append((e.id, False))
        return res

    def outgoing_arc(self, eid: int, from_tail: bool) -> ArcEdge:
        a = self.edges[eid].arc
        return a if from_tail else a.reversed()

    @cached_property
    def faces(self) -> tuple[Face, ...]:
        specs = []
        for e in self.edges:
            specs.append(EdgeSpec(e.tail, e.head, e.arc.start_angle, e.arc.reversed().start_angle))
        bang = {v.id: math.atan2(v.point.y, v.point.x) for v in self.vertices if v.kind == BOUNDARY}
        if not self.edges:
            return (Face(0, 0, (), math.pi, 1, True),)
        raw = trace_faces(specs, bang)
        faces = []
        for k, items in enumerate(raw):
            regions = set()
            area = 0.0
            n_edges = 0
            touches = False
            prev_arc = False
            for it in items:
                if isinstance(it, HalfEdge):
                    e = self.edges[it.edge]
                    regions.add(e.left if it.forward else e.right)
                    arc = e.arc if it.forward else e.arc.reversed()
                    area += signed_area_contribution(arc)
                    n_edges += 1
                    prev_arc = False
                else:
                    th0 = bang[it.start]
                    th1 = bang[it.end]
                    for a in boundary_arcs(th0, th1):
                        area += signed_area_contribution(a)
                    touches = True
                    if not prev_arc:
                        n_edges += 1
                    prev_arc = True
            if len(regions) != 1:
                raise GeometryError(f"face {k} carries inconsistent region labels {sorted(regions)}")
            faces.append(Face(k, regions.pop(), tuple(items), area, n_edges, touches))
        return tuple(faces)

    def face_of(self, eid: int, left: bool) -> Face:
        for f in self.faces:
            for it in f.items:
                if isinstance(it, HalfEdge) and it.edge == eid and it.forward == left:
                    return f
        raise KeyError((eid, left))

    def region_areas(self) -> np.ndarray:
        areas = np.zeros(self.n_regions)
        for f in self.faces:
            areas[f.region] += f.area
        return areas

    def components(self, region: int) -> list[Face]:
        return [f for f in self.faces if f.region == region]

    @property
    def length(self) -> float:
        return float(sum(e.arc.length for e in self.edges))

    def pressures(self) -> np.ndarray | None:
        if any(r.pressure is None for r in self.regions):
            return None
        return np.array([r.pressure for r in self.regions], dtype=float)

    def face_polygon(self, face: Face) -> list[ArcEdge]:
        arcs = []
        bang = {v.id: math.atan2(v.point.y, v.point.x) for v in self.vertices if v.kind == BOUNDARY}
        for it in face.items:
            if isinstance(it, HalfEdge):
                a = self.edges[it.edge].arc
                arcs.append(a if it.forward else a.reversed())
            else:
                arcs.extend(boundary_arcs(bang[it.start], bang[it.end]))
        return arcs

    def face_area_exact(self, face: Face) -> float:
        return arc_polygon_area(self.face_polygon(face))

    def transformed(self, rotation: float = 0.0, reflect: bool = False) -> "PartitionGraph":
        """Rigid image: optional reflection in the x-axis, then a rotation."""

        def tp(p: Point) -> Point:
            q = Point(p.x, -p.y) if reflect else p
            return q.rotated(rotation)

        verts = tuple(Vertex(v.id, tp(v.point), v.kind) for v in self.vertices)
        edges = []
        for e in self.edges:
            a = (e.arc.reflected() if reflect else e.arc).rotated(rotation)
            # a reflection swaps the sides of a fixed traversal
            left, right = (e.right, e.left) if reflect else (e.left, e.right)
            edges.append(Edge(e.id, a, e.tail, e.head, left, right))
        return PartitionGraph(verts, tuple(edges), self.regions, dict(self.metadata))

    def sample_points(self, per_edge: int = 400) -> np.ndarray:
        if not self.edges:
            return np.zeros((0, 2))
        return np.vstack([e.arc.sample(per_edge) for e in self.edges])

    def with_pressures(self, pressures) -> "PartitionGraph":
        regions = tuple(Region(r.id, r.target_area, float(p)) for r, p in zip(self.regions, pressures))
        return PartitionGraph(self.vertices, self.edges, regions, dict(self.metadata))


def fit_pressures(g: PartitionGraph) -> tuple[np.ndarray, float]:
    """Least-squares pressures from h_e = p_left - p_right, zero-sum gauge."""
    n = g.n_regions
    rows = []
    rhs = []
    for e in g.edges:
        r = np.zeros(n)
        r[e.left] += 1.0
        r[e.right] -= 1.0
        rows.append(r)
        rhs.append(e.arc.h)
    rows.append(np.ones(n))
    rhs.append(0.0)
    A = np.array(rows)
    b = np.array(rhs)
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    resid = float(np.max(np.abs(A[:-1] @ p - b[:-1]))) if g.edges else 0.0
    return p, resid


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    from scipy.spatial import cKDTree

    da, _ = cKDTree(b).query(a)
    db, _ = cKDTree(a).query(b)
    return float(max(da.max(), db.max()))
