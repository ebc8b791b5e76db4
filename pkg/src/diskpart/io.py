"""Graph documents (JSON), SVG rendering and CSV tables.

A graph document is the interchange format of every command:

    {"schema_version": "1.0",
     "vertices": [{"id", "kind", "x", "y"}],
     "edges":    [{"id", "tail", "head", "left", "right", "curvature"} or {..., "polyline": [[x, y], ...]}],
     "regions":  [{"id", "target_area", "pressure"}],
     "metadata": {...}}

``curvature`` is the signed curvature toward the ``left`` region.  Edges
given as polylines are read back as the least-squares circular arc through
their end points; the fit residual is kept in the metadata.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np

from .geometry import ArcEdge, Point
from .graph import BOUNDARY, INTERIOR, Edge, PartitionGraph, Region, Vertex

SCHEMA_VERSION = "1.0"


class DocumentError(ValueError):
    pass


def _plain(obj):
    """JSON-safe copy: numpy scalars and arrays to Python, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


@dataclass
class GraphDocument:
    vertices: list[dict]
    edges: list[dict]
    regions: list[dict]
    metadata: dict = field(default_factory=dict)
    schema_version: str = SCHEMA_VERSION

    # -- construction ---------------------------------------------------------------------

    @classmethod
    def from_partition_graph(cls, g: PartitionGraph, metadata: dict | None = None) -> "GraphDocument":
        verts = [{"id": v.id, "kind": v.kind, "x": v.point.x, "y": v.point.y} for v in g.vertices]
        edges = [
            {"id": e.id, "tail": e.tail, "head": e.head, "left": e.left, "right": e.right, "curvature": e.arc.h}
            for e in g.edges
        ]
        regions = [{"id": r.id, "target_area": r.target_area, "pressure": r.pressure} for r in g.regions]
        meta = _plain({**g.metadata, **(metadata or {})})
        return cls(verts, edges, regions, meta)

    @classmethod
    def from_discrete(cls, g, metadata: dict | None = None) -> "GraphDocument":
        """Document of a polyline graph; boundary junctions are snapped onto the circle."""
        d = g.to_dict()
        verts = []
        for j in d["junctions"]:
            x, y = j["x"], j["y"]
            if j["kind"] == BOUNDARY:
                r = math.hypot(x, y)
                x, y = x / r, y / r
            verts.append({"id": j["id"], "kind": j["kind"], "x": x, "y": y})
        edges = [{k: e[k] for k in ("id", "tail", "head", "left", "right", "polyline")} for e in d["edges"]]
        for e in edges:
            e["polyline"][0] = [verts[e["tail"]]["x"], verts[e["tail"]]["y"]]
            e["polyline"][-1] = [verts[e["head"]]["x"], verts[e["head"]]["y"]]
        regions = [{"id": r["id"], "target_area": r["target_area"], "pressure": r["multiplier"]} for r in d["regions"]]
        meta = _plain({"template": d["name"], "n_pts": d["n_pts"], **(metadata or {})})
        return cls(verts, edges, regions, meta)

    # -- conversion -----------------------------------------------------------------------

    def to_partition_graph(self) -> PartitionGraph:
        from .evolver.discrete import fit_chord_circle

        try:
            verts = tuple(Vertex(int(v["id"]), Point(float(v["x"]), float(v["y"])), v["kind"]) for v in self.vertices)
            for v in verts:
                if v.kind not in (INTERIOR, BOUNDARY):
                    raise DocumentError(f"vertex {v.id} has unknown kind {v.kind!r}")
            edges = []
            resid = {}
            for e in self.edges:
                p0, p1 = verts[int(e["tail"])].point, verts[int(e["head"])].point
                if "curvature" in e:
                    h = float(e["curvature"])
                elif "polyline" in e:
                    h, resid[int(e["id"])] = fit_chord_circle(np.asarray(e["polyline"], dtype=float))
                    hmax = 2.0 / p0.dist(p1) * (1 - 1e-12)
                    h = float(np.clip(h, -hmax, hmax))
                else:
                    raise DocumentError(f"edge {e.get('id')} has neither curvature nor polyline")
                edges.append(Edge(int(e["id"]), ArcEdge(p0, p1, h), int(e["tail"]), int(e["head"]), int(e["left"]), int(e["right"])))
            regions = tuple(Region(int(r["id"]), r.get("target_area"), r.get("pressure")) for r in self.regions)
        except (KeyError, TypeError, IndexError) as exc:
            raise DocumentError(f"malformed graph document: {exc!r}") from exc
        meta = dict(self.metadata)
        if resid:
            meta["curvature_residuals"] = resid
        return PartitionGraph(verts, tuple(edges), regions, meta)

    # -- serialization --------------------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "schema_version": self.schema_version,
            "vertices": self.vertices,
            "edges": self.edges,
            "regions": self.regions,
            "metadata": self.metadata,
        }

    def dumps(self) -> str:
        """Canonical JSON text: sorted keys, shortest round-tripping floats."""
        return json.dumps(_plain(self.to_dict()), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def loads(cls, text: str) -> "GraphDocument":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DocumentError(f"not JSON: {exc}") from exc
        if not isinstance(d, dict):
            raise DocumentError("a graph document is a JSON object")
        version = d.get("schema_version")
        if version != SCHEMA_VERSION:
            raise DocumentError(f"unsupported schema_version {version!r}; expected {SCHEMA_VERSION!r}")
        for key in ("vertices", "edges", "regions"):
            if not isinstance(d.get(key), list):
                raise DocumentError(f"missing list {key!r}")
        return cls(d["vertices"], d["edges"], d["regions"], d.get("metadata") or {}, version)


def load_graph(path: str) -> PartitionGraph:
    with open(path, encoding="utf-8") as fh:
        return GraphDocument.loads(fh.read()).to_partition_graph()


# -- SVG --------------------------------------------------------------------------------

SIZE = 512
_SCALE = 240.0

_FILLS = ("#4e79a7", "#f28e2b", "#59a14f", "#e15759", "#b07aa1", "#76b7b2", "#edc948", "#9c755f")


def _xy(x: float, y: float) -> str:
    return f"{SIZE / 2 + _SCALE * x:.4f} {SIZE / 2 - _SCALE * y:.4f}"


def _arc_path(a: ArcEdge) -> str:
    start = f"M {_xy(a.p0.x, a.p0.y)}"
    if a.is_straight:
        return f"{start} L {_xy(a.p1.x, a.p1.y)}"
    r = _SCALE * a.radius
    # the y flip turns a left-turning arc (h > 0) into a negative-angle sweep
    sweep = 0 if a.h > 0 else 1
    return f"{start} A {r:.4f} {r:.4f} 0 0 {sweep} {_xy(a.p1.x, a.p1.y)}"


def _polyline_path(q: Iterable) -> str:
    pts = [_xy(float(x), float(y)) for x, y in q]
    return "M " + " L ".join(pts)


def _inside(p: np.ndarray, poly: np.ndarray) -> np.ndarray:
    """Even-odd test of many points ``p`` (k, 2) against a closed polygon."""
    x, y = p[:, 0:1], p[:, 1:2]
    x0, y0 = poly[:, 0][None, :], poly[:, 1][None, :]
    x1, y1 = np.roll(poly[:, 0], -1)[None, :], np.roll(poly[:, 1], -1)[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        cross = ((y0 > y) != (y1 > y)) & (x < (x1 - x0) * (y - y0) / (y1 - y0) + x0)
    return cross.sum(axis=1) % 2 == 1


def _label_positions(g: PartitionGraph) -> list[tuple[int, float, float]]:
    """One well-inside point per face: the grid point farthest from the face outline."""
    h = 0.02
    ax = np.arange(-1.0 + h / 2, 1.0, h)
    X, Y = np.meshgrid(ax, ax)
    grid = np.column_stack([X.ravel(), Y.ravel()])
    grid = grid[np.hypot(grid[:, 0], grid[:, 1]) < 1.0]
    out = []
    for f in g.faces:
        poly = np.vstack([a.sample(24)[:-1] for a in g.face_polygon(f)])
        inside = grid[_inside(grid, poly)]
        if len(inside) == 0:
            c = poly.mean(axis=0)
            out.append((f.region, float(c[0]), float(c[1])))
            continue
        d = np.min(np.hypot(inside[:, None, 0] - poly[None, :, 0], inside[:, None, 1] - poly[None, :, 1]), axis=1)
        k = int(np.argmax(d))
        out.append((f.region, float(inside[k, 0]), float(inside[k, 1])))
    return out


def render_svg(doc: GraphDocument, labels: bool = True) -> str:
    """Deterministic 512x512 picture: unit circle, one path per edge, region labels."""
    g = doc.to_partition_graph()
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<rect width="{SIZE}" height="{SIZE}" fill="white"/>',
        f'<path class="boundary" d="M {_xy(1.0, 0.0)} A {_SCALE:.4f} {_SCALE:.4f} 0 1 0 {_xy(-1.0, 0.0)} '
        f'A {_SCALE:.4f} {_SCALE:.4f} 0 1 0 {_xy(1.0, 0.0)} Z" fill="none" stroke="black" stroke-width="2"/>',
    ]
    for e in doc.edges:
        if "polyline" in e:
            d = _polyline_path(e["polyline"])
        else:
            d = _arc_path(g.edges[int(e["id"])].arc)
        lines.append(f'<path class="edge" id="e{int(e["id"])}" d="{d}" fill="none" stroke="black" stroke-width="2"/>')
    if labels:
        for region, x, y in _label_positions(g):
            fill = _FILLS[region % len(_FILLS)]
            lines.append(
                f'<text x="{SIZE / 2 + _SCALE * x:.2f}" y="{SIZE / 2 - _SCALE * y:.2f}" font-family="sans-serif" '
                f'font-size="16" text-anchor="middle" dominant-baseline="middle" fill="{fill}">R{region + 1}</text>'
            )
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


# -- CSV --------------------------------------------------------------------------------


def profile_csv(points, n: int) -> str:
    """Rows (a1, ..., an, perimeter, error) with shortest round-tripping floats."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([f"a{i + 1}" for i in range(n)] + ["perimeter", "error"])
    for p in points:
        w.writerow([repr(float(a)) for a in p.areas] + [repr(float(p.perimeter)), p.error or ""])
    return buf.getvalue()


def ranking_csv(results) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rank", "template", "perimeter", "converged", "status"])
    for k, r in enumerate(results, 1):
        w.writerow([k, r.name, "" if r.perimeter is None else repr(r.perimeter), r.converged, r.status])
    return buf.getvalue()
