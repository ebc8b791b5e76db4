"""Face tracing for curve networks drawn in the unit disk.

A network is given by its edges (tail, head and the outgoing tangent
directions at both ends) plus the polar angle of every boundary vertex.
Faces are traced with the face kept on the left, so interior faces come
out counterclockwise.  Boundary arcs are always traversed counterclockwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class HalfEdge:
    edge: int
    forward: bool  # True: tail -> head


@dataclass(frozen=True)
class BoundaryArc:
    start: int  # boundary vertex ids, counterclockwise start -> end
    end: int


@dataclass(frozen=True)
class EdgeSpec:
    tail: int
    head: int
    angle_tail: float  # direction leaving the tail
    angle_head: float  # direction leaving the head (backwards along the edge)


def trace_faces(
    edges: list[EdgeSpec], boundary_angles: dict[int, float]
) -> list[list[HalfEdge | BoundaryArc]]:
    """Return every face as a cyclic list of half-edges and boundary arcs."""
    out: dict[int, list[tuple[float, HalfEdge]]] = {}
    for i, e in enumerate(edges):
        out.setdefault(e.tail, []).append((e.angle_tail % TWO_PI, HalfEdge(i, True)))
        out.setdefault(e.head, []).append((e.angle_head % TWO_PI, HalfEdge(i, False)))
    for v in out:
        out[v].sort(key=lambda t: t[0])

    bverts = sorted(boundary_angles, key=lambda v: boundary_angles[v] % TWO_PI)
    next_b = {v: bverts[(k + 1) % len(bverts)] for k, v in enumerate(bverts)}

    def head_of(he: HalfEdge) -> int:
        e = edges[he.edge]
        return e.head if he.forward else e.tail

    def arrive_angle(he: HalfEdge) -> float:
        e = edges[he.edge]
        return (e.angle_head if he.forward else e.angle_tail) % TWO_PI

    def next_item(item):
        if isinstance(item, BoundaryArc):
            v = item.end
            leaving = [h for _, h in out.get(v, [])]
            if not leaving:
                return BoundaryArc(v, next_b[v])
            if len(leaving) != 1:
                raise ValueError(f"boundary vertex {v} has degree {len(leaving)}")
            return leaving[0]
        v = head_of(item)
        if v in boundary_angles:
            return BoundaryArc(v, next_b[v])
        back = arrive_angle(item)
        # first outgoing direction clockwise from the reversed incoming one
        best, best_gap = None, None
        for ang, he in out[v]:
            if he.edge == item.edge and he.forward != item.forward and len(out[v]) > 1:
                continue
            gap = (back - ang) % TWO_PI
            if gap < 1e-12:
                gap = TWO_PI
            if best_gap is None or gap < best_gap:
                best, best_gap = he, gap
        return best

    items: list = [HalfEdge(i, f) for i in range(len(edges)) for f in (True, False)]
    items += [BoundaryArc(v, next_b[v]) for v in bverts]
    seen: set = set()
    faces = []
    for start in items:
        if start in seen:
            continue
        face = []
        cur = start
        while cur not in seen:
            seen.add(cur)
            face.append(cur)
            cur = next_item(cur)
            if len(face) > 4 * len(items) + 4:
                raise ValueError("face tracing did not close")
        if cur != start:
            raise ValueError("face tracing entered an existing face")
        faces.append(face)
    if not edges and not bverts:
        faces.append([])
    return faces


def face_vertices(face: Iterable, edges: list[EdgeSpec]) -> list[int]:
    vs = []
    for it in face:
        if isinstance(it, BoundaryArc):
            vs.append(it.start)
        else:
            e = edges[it.edge]
            vs.append(e.tail if it.forward else e.head)
    return vs
