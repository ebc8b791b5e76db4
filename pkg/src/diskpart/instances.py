"""Closed-form stationary graphs used as test beds for the stability tools."""

from __future__ import annotations

import math

import numpy as np

from .geometry import ArcEdge, GeometryError, Point
from .graph import BOUNDARY, INTERIOR, Edge, PartitionGraph, Region, Vertex


def arc_to_boundary(p: Point, direction: float, h: float) -> ArcEdge:
    """Arc leaving ``p`` at angle ``direction`` with curvature ``h`` (toward its left), up to the unit circle."""
    P = p.xy
    T = np.array([math.cos(direction), math.sin(direction)])
    if abs(h) < 1e-14:
        b = float(P @ T)
        s = -b + math.sqrt(b * b + 1.0 - float(P @ P))
        return ArcEdge(p, Point.disk(*(P + s * T)), 0.0)
    N = np.array([-T[1], T[0]])
    r = 1.0 / abs(h)
    c = P + N / h
    dc = float(np.linalg.norm(c))
    if dc > 1.0 + r or dc < abs(1.0 - r):
        raise GeometryError("arc does not reach the unit circle")
    # circle-circle intersection
    a = (1.0 - r * r + dc * dc) / (2.0 * dc)
    base = c * (a / dc)
    off = math.sqrt(max(0.0, 1.0 - a * a))
    perp = np.array([-c[1], c[0]]) / dc
    best = None
    for q in (base + off * perp, base - off * perp):
        # forward arc length from p to q along the oriented circle
        u0, u1 = P - c, q - c
        ang = math.atan2(u0[0] * u1[1] - u0[1] * u1[0], float(u0 @ u1))
        ang = ang if h > 0 else -ang
        ang %= 2 * math.pi
        if best is None or ang < best[0]:
            best = (ang, q)
    return ArcEdge(p, Point.disk(*best[1]), h)


def _graph(points, kinds, edges, n_regions, pressures, meta) -> PartitionGraph:
    verts = tuple(Vertex(i, Point.disk(*p) if k == BOUNDARY else Point(*p), k) for i, (p, k) in enumerate(zip(points, kinds)))
    es = []
    for k, (t, hd, arc, left, right) in enumerate(edges):
        es.append(Edge(k, arc, t, hd, left, right))
    g = PartitionGraph(verts, tuple(es), tuple(Region(i, None, None) for i in range(n_regions)), meta)
    areas = g.region_areas()
    regions = tuple(Region(i, float(areas[i]), float(pressures[i])) for i in range(n_regions))
    return PartitionGraph(verts, tuple(es), regions, meta)


def configuration_a(t: float) -> PartitionGraph:
    """Two boundary caps of region 0 joined through a vertical segment at heights +-t.

    Region 1 lies left of the segment, region 2 right of it.  The caps
    have curvature sqrt(3) t / (1 - t^2) toward region 0.
    """
    if not 0.0 < t < 1.0:
        raise GeometryError("t must lie in (0, 1)")
    k = math.sqrt(3.0) * t / (1.0 - t * t)
    top, bot = Point(0.0, t), Point(0.0, -t)
    r_up = arc_to_boundary(top, math.pi / 6, k)
    l_up = arc_to_boundary(top, 5 * math.pi / 6, -k)
    r_dn = arc_to_boundary(bot, -math.pi / 6, -k)
    l_dn = arc_to_boundary(bot, -5 * math.pi / 6, k)
    pts = [top.xy, bot.xy, r_up.p1.xy, l_up.p1.xy, r_dn.p1.xy, l_dn.p1.xy]
    kinds = [INTERIOR, INTERIOR] + [BOUNDARY] * 4
    edges = [
        (0, 1, ArcEdge(top, bot, 0.0), 2, 1),  # downward: left side is +x
        (0, 2, r_up, 0, 2),
        (0, 3, l_up, 1, 0),
        (1, 4, r_dn, 2, 0),
        (1, 5, l_dn, 0, 1),
    ]
    p = (2 * k / 3, -k / 3, -k / 3)
    return _graph(pts, kinds, edges, 3, p, {"kind": "conf_a", "t": t})


def hexagon_graph(side: float | None = None, rotation: float = 0.0) -> PartitionGraph:
    """Regular hexagon (region 2) with six radial spokes; the sectors alternate regions 0 and 1.

    The default side gives three equal areas.
    """
    s = math.sqrt(2 * math.pi / (9 * math.sqrt(3))) if side is None else side
    if not 0.0 < s < 1.0:
        raise GeometryError("side must lie in (0, 1)")
    angs = [rotation + k * math.pi / 3 for k in range(6)]
    inner = [Point(s * math.cos(a), s * math.sin(a)) for a in angs]
    outer = [Point.polar(1.0, a) for a in angs]
    pts = [p.xy for p in inner] + [p.xy for p in outer]
    kinds = [INTERIOR] * 6 + [BOUNDARY] * 6
    edges = []
    # sector k lies between spokes k and k+1
    sector = lambda k: k % 2
    for k in range(6):
        # hexagon side k -> k+1, hexagon on the left
        edges.append((k, (k + 1) % 6, ArcEdge(inner[k], inner[(k + 1) % 6], 0.0), 2, sector(k)))
    for k in range(6):
        # spoke outward: sector k on the left, sector k-1 on the right
        edges.append((k, 6 + k, ArcEdge(inner[k], outer[k], 0.0), sector(k), sector(k - 1)))
    return _graph(pts, kinds, edges, 3, (0.0, 0.0, 0.0), {"kind": "hex", "side": s})


def square_configuration_c(r: float) -> PartitionGraph:
    """Central 4-component of region 0 with vertices at radius ``r`` on the diagonals.

    Radial spokes separate region 1 (top and bottom) from region 2 (left and right).
    """
    if not 0.0 < r < 1.0:
        raise GeometryError("r must lie in (0, 1)")
    k = math.sqrt(2.0) * math.sin(math.pi / 12) / r
    angs = [math.pi / 4 + j * math.pi / 2 for j in range(4)]
    inner = [Point(r * math.cos(a), r * math.sin(a)) for a in angs]
    outer = [Point.polar(1.0, a) for a in angs]
    pts = [p.xy for p in inner] + [p.xy for p in outer]
    kinds = [INTERIOR] * 4 + [BOUNDARY] * 4
    outside = [1, 2, 1, 2]  # above, left, below, right of the quad side j -> j+1
    edges = []
    for j in range(4):
        edges.append((j, (j + 1) % 4, ArcEdge(inner[j], inner[(j + 1) % 4], k), 0, outside[j]))
    for j in range(4):
        edges.append((j, 4 + j, ArcEdge(inner[j], outer[j], 0.0), outside[j], outside[j - 1]))
    p = (2 * k / 3, -k / 3, -k / 3)
    return _graph(pts, kinds, edges, 3, p, {"kind": "conf_c", "r": r})
