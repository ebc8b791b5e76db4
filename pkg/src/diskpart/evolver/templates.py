"""Catalog of candidate topologies with hand-authored seed geometry.

A template lists its junctions (interior points or boundary angles), its
edges as junction pairs, and one marker point per face carrying the region
label.  The seed is drawn with straight edges; side labels are read off
the faces that contain the markers.  Seeds are artifact data: they only
fix the combinatorics, the geometry is relaxed afterwards.

Region 0 is the region whose components the topology is organised around
(the largest-pressure region in the three-region case analysis).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..graph import BOUNDARY, INTERIOR
from ..topology import BoundaryArc, EdgeSpec, HalfEdge, trace_faces
from .discrete import DiscreteGraph, TemplateError


class InfeasibleTemplateError(RuntimeError):
    """The seed could not be deformed to the requested areas."""


@dataclass(frozen=True)
class Template:
    name: str
    n_regions: int
    kinds: tuple[str, ...]
    points: tuple[tuple[float, float], ...]
    edges: tuple[tuple[int, int], ...]
    markers: tuple[tuple[int, float, float], ...]
    description: str = ""
    group: str = ""
    labeled_edges: tuple[tuple[int, int, int, int], ...] = field(default=(), compare=False)

    def sides(self) -> tuple[tuple[int, int, int, int], ...]:
        """(tail, head, left, right) for every edge."""
        return self.labeled_edges or _label_edges(self)


class _Builder:
    def __init__(self):
        self.kinds: list[str] = []
        self.points: list[tuple[float, float]] = []
        self.edges: list[tuple[int, int]] = []

    def junction(self, x: float, y: float) -> int:
        self.kinds.append(INTERIOR)
        self.points.append((float(x), float(y)))
        return len(self.kinds) - 1

    def spoke(self, j: int, degrees: float) -> int:
        """A boundary junction at the given polar angle, joined to junction ``j``."""
        t = math.radians(degrees)
        self.kinds.append(BOUNDARY)
        self.points.append((math.cos(t), math.sin(t)))
        b = len(self.kinds) - 1
        self.edges.append((j, b))
        return b

    def edge(self, a: int, b: int) -> None:
        self.edges.append((a, b))

    def cycle(self, js: list[int]) -> None:
        for k in range(len(js)):
            self.edge(js[k], js[(k + 1) % len(js)])

    def build(self, name, n_regions, markers, description, group) -> Template:
        t = Template(
            name,
            n_regions,
            tuple(self.kinds),
            tuple(self.points),
            tuple(self.edges),
            tuple((int(r), float(x), float(y)) for r, x, y in markers),
            description,
            group,
        )
        return Template(**{**t.__dict__, "labeled_edges": _label_edges(t)})


def _polar(r: float, degrees: float) -> tuple[float, float]:
    t = math.radians(degrees)
    return r * math.cos(t), r * math.sin(t)


def _inside(pt, poly: np.ndarray) -> bool:
    x, y = pt
    xs, ys = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(xs, -1), np.roll(ys, -1)
    cross = (ys > y) != (yn > y)
    with np.errstate(divide="ignore", invalid="ignore"):
        xi = xs + (y - ys) * (xn - xs) / (yn - ys)
    return bool(np.count_nonzero(cross & (x < xi)) % 2)


def _label_edges(t: Template) -> tuple[tuple[int, int, int, int], ...]:
    if not t.edges:
        return ()
    P = np.array(t.points)
    specs = []
    for a, b in t.edges:
        d = P[b] - P[a]
        specs.append(EdgeSpec(a, b, math.atan2(d[1], d[0]), math.atan2(-d[1], -d[0])))
    bang = {j: math.atan2(P[j, 1], P[j, 0]) for j, k in enumerate(t.kinds) if k == BOUNDARY}
    faces = trace_faces(specs, bang)
    left = [None] * len(t.edges)
    right = [None] * len(t.edges)
    used = set()
    for items in faces:
        poly = []
        for it in items:
            if isinstance(it, HalfEdge):
                a, b = t.edges[it.edge]
                poly.append(P[a] if it.forward else P[b])
            else:
                t0, t1 = bang[it.start], bang[it.end]
                span = (t1 - t0) % (2 * math.pi) or 2 * math.pi
                for s in np.linspace(0.0, span, 64, endpoint=False):
                    poly.append((math.cos(t0 + s), math.sin(t0 + s)))
        poly = np.array(poly)
        hits = [k for k, (_, x, y) in enumerate(t.markers) if _inside((x, y), poly)]
        if len(hits) != 1:
            raise TemplateError(f"template {t.name}: a face contains {len(hits)} markers")
        used.add(hits[0])
        label = t.markers[hits[0]][0]
        for it in items:
            if isinstance(it, HalfEdge):
                (left if it.forward else right)[it.edge] = label
    if len(used) != len(t.markers):
        raise TemplateError(f"template {t.name}: unused markers")
    return tuple((a, b, left[e], right[e]) for e, (a, b) in enumerate(t.edges))


# -- three regions -------------------------------------------------------------------


def _conf_a() -> Template:
    b = _Builder()
    top, bot = b.junction(0, 0.3), b.junction(0, -0.3)
    b.edge(top, bot)
    b.spoke(top, 60), b.spoke(top, 120), b.spoke(bot, -60), b.spoke(bot, -120)
    return b.build(
        "conf_a", 3, [(0, 0, 0.8), (0, 0, -0.8), (1, -0.5, 0), (2, 0.5, 0)],
        "two boundary 3-components of region 0 joined through a segment", "three",
    )


def _chain(b: _Builder, xs, y=0.0) -> list[int]:
    js = [b.junction(x, y) for x in xs]
    for k in range(len(js) - 1):
        b.edge(js[k], js[k + 1])
    return js


def _conf_b() -> Template:
    b = _Builder()
    w = _chain(b, [-0.55, -0.2, 0.2, 0.55])
    b.spoke(w[0], 150), b.spoke(w[0], 210), b.spoke(w[1], 100), b.spoke(w[2], 80)
    b.spoke(w[3], 30), b.spoke(w[3], -30)
    markers = [(0, -0.45, 0.5), (2, 0, 0.5), (0, 0.45, 0.5), (1, 0, -0.5), (2, -0.85, 0), (2, 0.85, 0)]
    return b.build("conf_b", 3, markers, "two boundary 4-components of region 0 on a four-junction chain", "three")


def _ring(b: _Builder, center, radius, angles) -> list[int]:
    js = [b.junction(center[0] + radius * math.cos(math.radians(a)), center[1] + radius * math.sin(math.radians(a))) for a in angles]
    b.cycle(js)
    return js


def _conf_c() -> Template:
    b = _Builder()
    q = _ring(b, (0, 0), 0.4, [45, 135, 225, 315])
    for j, a in zip(q, [45, 135, 225, 315]):
        b.spoke(j, a)
    markers = [(0, 0, 0), (1, 0.8, 0), (2, 0, 0.8), (1, -0.8, 0), (2, 0, -0.8)]
    return b.build("conf_c", 3, markers, "interior 4-component of region 0 with four spokes", "three")


def _quad_with_three_spokes(b: _Builder) -> list[int]:
    q = _ring(b, (-0.25, 0), 0.35, [0, 90, 180, 270])
    b.spoke(q[1], 100), b.spoke(q[2], 180), b.spoke(q[3], 260)
    return q


def _conf_d() -> Template:
    b = _Builder()
    q = _quad_with_three_spokes(b)
    w = b.junction(0.45, 0)
    b.edge(q[0], w)
    b.spoke(w, 40), b.spoke(w, -40)
    markers = [(0, -0.25, 0), (0, 0.85, 0), (1, -0.6, 0.45), (2, -0.6, -0.45), (2, 0.3, 0.6), (1, 0.3, -0.6)]
    return b.build("conf_d", 3, markers, "interior 4-component and boundary 3-component of region 0", "three")


def _conf_e() -> Template:
    b = _Builder()
    q = _quad_with_three_spokes(b)
    w1, w2 = b.junction(0.4, 0.05), b.junction(0.45, -0.3)
    b.edge(q[0], w1)
    b.edge(w1, w2)
    b.spoke(w1, 40), b.spoke(w2, -15), b.spoke(w2, -60)
    markers = [(0, -0.25, 0), (0, 0.8, 0.1), (1, -0.6, 0.45), (2, -0.6, -0.45), (2, 0.2, 0.6), (1, 0.0, -0.7), (2, 0.75, -0.45)]
    return b.build("conf_e", 3, markers, "interior 4-component and boundary 4-component of region 0, off-chain", "three")


def _conf_f() -> Template:
    b = _Builder()
    q1 = _ring(b, (-0.45, 0), 0.2, [0, 90, 180, 270])
    q2 = _ring(b, (0.45, 0), 0.2, [180, 90, 0, 270])
    b.edge(q1[0], q2[0])
    b.spoke(q1[1], 115), b.spoke(q1[2], 180), b.spoke(q1[3], 245)
    b.spoke(q2[1], 65), b.spoke(q2[2], 0), b.spoke(q2[3], -65)
    markers = [
        (0, -0.45, 0), (0, 0.45, 0), (1, 0, 0.6), (2, 0, -0.6),
        (2, -0.75, 0.35), (1, -0.75, -0.35), (2, 0.75, 0.35), (1, 0.75, -0.35),
    ]
    return b.build("conf_f", 3, markers, "two interior 4-components of region 0 joined by an edge", "three")


def _conf_g() -> Template:
    b = _Builder()
    w = _chain(b, [-0.45, 0.0, 0.45])
    b.spoke(w[0], 150), b.spoke(w[0], 210), b.spoke(w[1], 90), b.spoke(w[2], 30), b.spoke(w[2], -30)
    markers = [(1, -0.85, 0), (0, -0.3, 0.5), (1, 0.3, 0.5), (2, 0, -0.5), (0, 0.85, 0)]
    return b.build("conf_g", 3, markers, "boundary 4-component and boundary 3-component of region 0", "three")


def _ladder(b: _Builder, xs, half=0.2):
    tops = _chain(b, xs, half)
    bots = _chain(b, xs, -half)
    for t, u in zip(tops, bots):
        b.edge(t, u)
    b.spoke(tops[0], 150), b.spoke(bots[0], 210), b.spoke(tops[-1], 30), b.spoke(bots[-1], -30)
    return tops, bots


def _conf_h() -> Template:
    b = _Builder()
    xs = [-0.35, 0.0, 0.35]
    _ladder(b, xs)
    markers = [(1, -0.75, 0), (0, -0.175, 0), (1, 0.175, 0), (0, 0.75, 0), (2, 0, 0.6), (2, 0, -0.6)]
    return b.build("conf_h", 3, markers, "chain of four 4-components alternating regions 1 and 0", "three")


def _conf_i() -> Template:
    b = _Builder()
    xs = [-0.45, -0.15, 0.15, 0.45]
    _ladder(b, xs)
    markers = [(1, -0.8, 0), (0, -0.3, 0), (1, 0, 0), (0, 0.3, 0), (1, 0.8, 0), (2, 0, 0.6), (2, 0, -0.6)]
    return b.build("conf_i", 3, markers, "chain of five 4-components with two interior components of region 0", "three")


def _star(b: _Builder, center, radius_spokes: list[float]) -> int:
    j = b.junction(*center)
    for a in radius_spokes:
        b.spoke(j, a)
    return j


def _conf_j() -> Template:
    b = _Builder()
    _star(b, (0, 0), [90, 210, 330])
    markers = [(0, *_polar(0.5, 150)), (1, *_polar(0.5, 270)), (2, *_polar(0.5, 30))]
    return b.build("conf_j", 3, markers, "standard graph: three arcs meeting at one junction", "three")


def _polygon_with_spokes(name, n_sides, inner_label, labels, radius, description, group) -> Template:
    b = _Builder()
    angles = [90 + 360 * k / n_sides for k in range(n_sides)]
    js = _ring(b, (0, 0), radius, angles)
    for j, a in zip(js, angles):
        b.spoke(j, a)
    markers = [(inner_label, 0, 0)]
    for k in range(n_sides):
        markers.append((labels[k], *_polar(0.5 * (1 + radius), angles[k] + 180 / n_sides)))
    return b.build(name, max([inner_label, *labels]) + 1, markers, description, group)


def _hex() -> Template:
    return _polygon_with_spokes(
        "hex", 6, 2, [0, 1, 0, 1, 0, 1], 0.5, "interior hexagon of region 2 with six spokes", "three"
    )


# -- four to six regions --------------------------------------------------------------


def _std4() -> Template:
    b = _Builder()
    top, bot = b.junction(0, 0.25), b.junction(0, -0.25)
    b.edge(top, bot)
    b.spoke(top, 45), b.spoke(top, 135), b.spoke(bot, -45), b.spoke(bot, -135)
    markers = [(0, 0, 0.8), (1, 0, -0.8), (2, -0.6, 0), (3, 0.6, 0)]
    return b.build("std4", 4, markers, "two junctions joined by a segment, four boundary regions", "four")


def _std4_alt() -> Template:
    return _polygon_with_spokes(
        "std4_alt", 3, 3, [0, 1, 2], 0.35, "interior triangle surrounded by three boundary regions", "four"
    )


def _std5() -> Template:
    b = _Builder()
    w = _chain(b, [-0.4, 0.0, 0.4], -0.1)
    b.spoke(w[0], 140), b.spoke(w[0], 220), b.spoke(w[1], 90), b.spoke(w[2], 40), b.spoke(w[2], -40)
    markers = [(0, -0.85, 0), (1, -0.3, 0.5), (2, 0.3, 0.5), (3, 0, -0.6), (4, 0.85, 0)]
    return b.build("std5", 5, markers, "three-junction chain, five boundary regions", "five")


def _std5_alt() -> Template:
    return _polygon_with_spokes(
        "std5_alt", 4, 4, [0, 1, 2, 3], 0.4, "interior quadrilateral surrounded by four boundary regions", "five"
    )


def _std6() -> Template:
    return _polygon_with_spokes(
        "std6", 5, 5, [0, 1, 2, 3, 4], 0.4, "interior pentagon surrounded by five boundary regions", "six"
    )


def _std6_star() -> Template:
    b = _Builder()
    c = b.junction(0, 0)
    markers = []
    for k, a in enumerate([90, 210, 330]):
        j = b.junction(*_polar(0.45, a))
        b.edge(c, j)
        b.spoke(j, a - 30), b.spoke(j, a + 30)
        markers.append((2 * k, *_polar(0.85, a)))
        markers.append((2 * k + 1, *_polar(0.6, a + 60)))
    return b.build("std6_star", 6, markers, "junction tree with a central junction and three forks", "six")


def _std6_chain() -> Template:
    b = _Builder()
    w = _chain(b, [-0.55, -0.2, 0.2, 0.55])
    b.spoke(w[0], 150), b.spoke(w[0], 210), b.spoke(w[1], 120), b.spoke(w[2], 60)
    b.spoke(w[3], 30), b.spoke(w[3], -30)
    markers = [(0, -0.85, 0), (1, -0.45, 0.5), (2, 0, 0.5), (3, 0.45, 0.5), (4, 0.85, 0), (5, 0, -0.5)]
    return b.build("std6_chain", 6, markers, "four-junction chain with both middle spokes on one side", "six")


def _std6_zigzag() -> Template:
    b = _Builder()
    w = _chain(b, [-0.55, -0.2, 0.2, 0.55])
    b.spoke(w[0], 150), b.spoke(w[0], 210), b.spoke(w[1], 100), b.spoke(w[2], -80)
    b.spoke(w[3], 30), b.spoke(w[3], -30)
    markers = [(0, -0.85, 0), (1, -0.4, 0.5), (2, 0.3, 0.5), (3, -0.3, -0.5), (4, 0.4, -0.5), (5, 0.85, 0)]
    return b.build("std6_zigzag", 6, markers, "four-junction chain with middle spokes on opposite sides", "six")


_FACTORIES = [
    _conf_a, _conf_b, _conf_c, _conf_d, _conf_e, _conf_f, _conf_g, _conf_h, _conf_i, _conf_j, _hex,
    _std4, _std4_alt, _std5, _std5_alt, _std6, _std6_star, _std6_chain, _std6_zigzag,
]

CATALOG: dict[str, Template] = {f().name: f() for f in _FACTORIES}

# the conjectured minimizer for each n and its stable-looking competitors
CONJECTURES = {
    4: ("std4", ("std4_alt",)),
    5: ("std5", ("std5_alt",)),
    6: ("std6", ("std6_star", "std6_chain", "std6_zigzag")),
}


def catalog_for(n: int) -> list[Template]:
    if n == 1:
        return [single_region_template()]
    return [t for t in CATALOG.values() if t.n_regions == n]


def get_template(name: str) -> Template:
    try:
        return CATALOG[name]
    except KeyError:
        raise KeyError(f"unknown template {name!r}; known: {', '.join(CATALOG)}") from None


def single_region_template() -> Template:
    return Template("single", 1, (), (), (), ((0, 0.0, 0.0),), "the whole disk, no edges", "one")


def template_instantiate(t: Template, areas, n_pts: int = 32, stages: int = 8) -> DiscreteGraph:
    """Seed graph for ``t`` deformed to the target areas.

    The straight seed is moved through ``stages`` intermediate area
    targets, each reached by the weighted Newton projection of ``project_areas``.
    """
    from .relax import project_areas

    a = np.array([float(x) for x in areas])
    if len(a) != t.n_regions:
        raise ValueError(f"template {t.name} has {t.n_regions} regions, got {len(a)} areas")
    if abs(a.sum() - math.pi) > 1e-9 or np.any(a <= 0):
        raise ValueError("areas must be positive and sum to pi")
    g = DiscreteGraph(t.kinds, t.points, t.sides(), a, n_pts=n_pts, name=t.name)
    if not t.edges:
        return g
    start = g.region_areas()
    for k in range(1, stages + 1):
        g.targets = start + (a - start) * (k / stages)
        if not project_areas(g):
            raise InfeasibleTemplateError(f"{t.name}: cannot reach the areas at stage {k}/{stages}")
    g.targets = a
    g.multipliers = None
    return g
