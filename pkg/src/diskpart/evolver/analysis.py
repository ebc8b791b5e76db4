"""Post-processing of relaxed graphs: pressures, cocircular chains, rankings."""

from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from ..geometry import ArcEdge, cocircular
from ..graph import BOUNDARY, INTERIOR, PartitionGraph, hausdorff
from ..topology import BoundaryArc, HalfEdge
from .discrete import DiscreteGraph, TemplateError, fit_chord_circle
from .relax import RelaxError, TopologyEvent, constrained_gradient, relax
from .templates import InfeasibleTemplateError, Template, catalog_for, template_instantiate


class UnrelaxedWarning(UserWarning):
    pass


@dataclass
class PressureEstimate:
    pressures: np.ndarray
    curvatures: np.ndarray
    fit_residual: float
    balance_residual: float
    circle_residual: float
    relaxed: bool

    def to_dict(self) -> dict:
        return {
            "pressures": [float(p) for p in self.pressures],
            "fit_residual": self.fit_residual,
            "balance_residual": self.balance_residual,
            "circle_residual": self.circle_residual,
            "relaxed": self.relaxed,
        }


def pressures_estimate(g: DiscreteGraph, tol: float = 1e-6) -> PressureEstimate:
    """Zero-sum least-squares pressures from circle fits of the polyline edges."""
    n = g.n_regions
    hs, crs = [], []
    for Q in g.polylines():
        h, cr = fit_chord_circle(Q)
        hs.append(h)
        crs.append(cr)
    hs = np.array(hs)
    res, _ = constrained_gradient(g) if g.edges else (np.zeros(0), None)
    relaxed = float(np.abs(res).max(initial=0.0)) < tol
    if not relaxed:
        warnings.warn(f"{g.name}: graph is not relaxed; pressures are indicative only", UnrelaxedWarning)
    A = np.zeros((len(g.edges) + 1, n))
    for e, (_, _, left, right) in enumerate(g.edges):
        A[e, left] += 1.0
        A[e, right] -= 1.0
    A[-1] = 1.0
    b = np.append(hs, 0.0)
    p, *_ = np.linalg.lstsq(A, b, rcond=None)
    fit = float(np.abs(A[:-1] @ p - hs).max(initial=0.0))
    bal = 0.0
    for j, kind in enumerate(g.kinds):
        if kind != INTERIOR:
            continue
        s = sum(hs[e] if g.tail[e] == j else -hs[e] for e in range(len(g.edges)) if j in (g.tail[e], g.head[e]))
        bal = max(bal, abs(s))
    return PressureEstimate(p, hs, fit, bal, float(max(crs, default=0.0)), relaxed)


# -- alignment ------------------------------------------------------------------------


def _as_graph(g):
    if isinstance(g, (DiscreteGraph, PartitionGraph)):
        return g
    return g.to_partition_graph()


def _points(g, per_edge: int) -> np.ndarray:
    if isinstance(g, DiscreteGraph):
        return g.sample_points(max(2, -(-per_edge // (g.n_pts - 1))))
    return g.sample_points(per_edge)


def _boundary_angles(g) -> list[float]:
    if isinstance(g, DiscreteGraph):
        J = g.junction_positions()
        return [math.atan2(J[j, 1], J[j, 0]) for j, k in enumerate(g.kinds) if k == BOUNDARY]
    return [math.atan2(v.point.y, v.point.x) for v in g.vertices if v.kind == BOUNDARY]


def _transform(P: np.ndarray, rotation: float, reflect: bool) -> np.ndarray:
    Q = P * np.array([1.0, -1.0]) if reflect else P
    c, s = math.cos(rotation), math.sin(rotation)
    return Q @ np.array([[c, s], [-s, c]])


def aligned_hausdorff(a, b) -> tuple[float, float, bool]:
    """Hausdorff distance between two graphs after the best rotation and reflection of ``a``.

    Rotations are seeded by matching boundary vertices and refined by a
    bounded scalar search.  Returns (distance, rotation, reflected).
    """
    a, b = _as_graph(a), _as_graph(b)
    ta, tb = _boundary_angles(a), _boundary_angles(b)
    # coarse samples choose the seed; dense ones keep the spacing far below 1e-3
    Pa, Pb = _points(a, 200), _points(b, 200)
    best = (math.inf, 0.0, False)
    for reflect in (False, True):
        src = [-t for t in ta] if reflect else ta
        seeds = {round((y - x) % (2 * math.pi), 12) for x in src for y in tb} or {0.0}
        for th in sorted(seeds):
            d = hausdorff(_transform(Pa, th, reflect), Pb)
            if d < best[0]:
                best = (d, th, reflect)
    _, th0, refl = best
    Pa, Pb = _points(a, 4000), _points(b, 4000)
    d0 = hausdorff(_transform(Pa, th0, refl), Pb)
    res = minimize_scalar(
        lambda t: hausdorff(_transform(Pa, t, refl), Pb),
        bounds=(th0 - 0.01, th0 + 0.01),
        method="bounded",
        options={"xatol": 1e-8},
    )
    if res.fun < d0:
        return float(res.fun), float(res.x), refl
    return d0, th0, refl


# -- cocircular chains ----------------------------------------------------------------


def circle_deviation(e1: ArcEdge, e2: ArcEdge) -> float:
    """Largest distance of either edge's end and mid points from the other edge's circle (or line)."""

    def dev(a: ArcEdge, b: ArcEdge) -> float:
        pts = np.vstack([b.p0.xy, b.point_at(0.5 * b.length), b.p1.xy])
        if a.is_straight:
            d = a.p1.xy - a.p0.xy
            n = np.array([-d[1], d[0]]) / np.linalg.norm(d)
            return float(np.abs((pts - a.p0.xy) @ n).max())
        c = a.center.xy
        return float(np.abs(np.linalg.norm(pts - c, axis=1) - a.radius).max())

    return max(dev(e1, e2), dev(e2, e1))


def _four_faces(g: PartitionGraph):
    out = {}
    for f in g.faces:
        if f.n_edges != 4:
            continue
        hes = [it for it in f.items if isinstance(it, HalfEdge)]
        if f.touches_boundary:
            # rotate the cycle to start right after the boundary stretch
            items = list(f.items)
            k = max(i for i, it in enumerate(items) if isinstance(it, BoundaryArc))
            items = items[k + 1 :] + items[: k + 1]
            hes = [it for it in items if isinstance(it, HalfEdge)]
            if len(hes) != 3:
                continue
            out[f.id] = {"boundary": True, "edges": [h.edge for h in hes]}
        else:
            out[f.id] = {"boundary": False, "edges": [h.edge for h in hes]}
    return out


def cocircular_chain_report(g, tol: float = 1e-3) -> dict:
    """Chains of 4-components from boundary to boundary and the cocircularity of their side edges.

    Side pairs are decided by ``geometry.cocircular`` on the fitted arcs;
    ``deviation`` is an independent point-to-circle cross-check.  A chain whose side pairs are all cocircular, of length at least three,
    whose outside components lie in one region, admits a slide that
    preserves perimeter and areas.  Its freedom, the chain length minus
    the two boundary ends, is reported; the slide is never executed.
    """
    pg = g.to_partition_graph() if isinstance(g, DiscreteGraph) else g
    fours = _four_faces(pg)
    edge_faces: dict[int, list[int]] = {}
    for f in pg.faces:
        for it in f.items:
            if isinstance(it, HalfEdge):
                edge_faces.setdefault(it.edge, []).append(f.id)

    def across(fid: int, eid: int) -> int:
        return next(x for x in edge_faces[eid] if x != fid)

    comps = []
    for fid, info in fours.items():
        es = info["edges"]
        if info["boundary"]:
            pairs = [(es[0], es[2])]
        else:
            pairs = [(es[0], es[2]), (es[1], es[3])]
        arcs = [(pg.edges[a].arc, pg.edges[b].arc) for a, b in pairs]
        comps.append(
            {
                "face": fid,
                "region": pg.faces[fid].region,
                "boundary": info["boundary"],
                "opposite_pairs": pairs,
                "cocircular": [cocircular(x, y, tol) for x, y in arcs],
                "deviation": [circle_deviation(x, y) for x, y in arcs],
            }
        )

    chains = []
    seen = set()
    for fid, info in fours.items():
        if not info["boundary"]:
            continue
        seq, sides = [fid], []
        mid = info["edges"][1]
        sides.append((info["edges"][0], info["edges"][2]))
        cur, entry = across(fid, mid), mid
        ok = False
        while cur in fours and cur not in seq:
            ci = fours[cur]
            seq.append(cur)
            if ci["boundary"]:
                if ci["edges"][1] == entry:
                    sides.append((ci["edges"][0], ci["edges"][2]))
                    ok = True
                break
            es = ci["edges"]
            k = es.index(entry)
            sides.append((es[(k + 1) % 4], es[(k + 3) % 4]))
            entry = es[(k + 2) % 4]
            cur = across(cur, entry)
        if not ok or len(seq) < 2:
            continue
        key = tuple(sorted((seq[0], seq[-1])))
        if key in seen:
            continue
        seen.add(key)
        arcs = [(pg.edges[a].arc, pg.edges[b].arc) for a, b in sides]
        devs = [circle_deviation(x, y) for x, y in arcs]
        cocirc = [cocircular(x, y, tol) for x, y in arcs]
        chain_faces = set(seq)
        outside = set()
        for a, b in sides:
            for e in (a, b):
                outside.update(pg.faces[x].region for x in edge_faces[e] if x not in chain_faces)
        all_c = all(cocirc)
        slide = all_c and len(seq) >= 3 and len(outside) == 1
        chains.append(
            {
                "faces": seq,
                "regions": [pg.faces[x].region for x in seq],
                "side_pairs": sides,
                "deviation": devs,
                "cocircular": cocirc,
                "all_cocircular": all_c,
                "outside_regions": sorted(outside),
                "slide_available": slide,
                "slide_freedom": len(seq) - 2 if slide else 0,
            }
        )
    return {"four_components": comps, "chains": chains}


# -- comparison -----------------------------------------------------------------------


@dataclass
class CandidateResult:
    name: str
    perimeter: float | None
    converged: bool
    iterations: int = 0
    grad_norm: float | None = None
    status: str = "ok"  # ok | max-iters | topology-event | infeasible
    detail: dict = field(default_factory=dict)
    result: object = None

    def to_dict(self) -> dict:
        return {
            "template": self.name,
            "perimeter": self.perimeter,
            "converged": self.converged,
            "iterations": self.iterations,
            "grad_norm": self.grad_norm,
            "status": self.status,
            "detail": self.detail,
        }


def run_candidate(t: Template, areas: Sequence[float], n_pts: int = 32, max_iters: int = 100, tol: float = 1e-9) -> CandidateResult:
    try:
        g = template_instantiate(t, areas, n_pts=n_pts)
        r = relax(g, max_iters=max_iters, tol=tol)
    except TopologyEvent as ev:
        return CandidateResult(t.name, None, False, status="topology-event", detail=ev.to_dict())
    except (InfeasibleTemplateError, RelaxError, TemplateError) as exc:
        return CandidateResult(t.name, None, False, status="infeasible", detail={"message": str(exc)})
    status = "ok" if r.converged else "max-iters"
    return CandidateResult(t.name, r.perimeter, r.converged, r.iterations, r.grad_norm, status, result=r)


def compare_candidates(
    areas: Sequence[float],
    catalog: Sequence[Template] | None = None,
    n_pts: int = 32,
    max_iters: int = 100,
    tol: float = 1e-9,
    workers: int = 1,
) -> list[CandidateResult]:
    """Relax every template; relaxed ones sorted by perimeter, failures after them by name."""
    areas = [float(a) for a in areas]
    catalog = list(catalog_for(len(areas)) if catalog is None else catalog)
    catalog = sorted(catalog, key=lambda t: t.name)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(lambda t: run_candidate(t, areas, n_pts, max_iters, tol), catalog))
    else:
        results = [run_candidate(t, areas, n_pts, max_iters, tol) for t in catalog]
    ok = sorted((r for r in results if r.perimeter is not None), key=lambda r: (r.perimeter, r.name))
    bad = sorted((r for r in results if r.perimeter is None), key=lambda r: r.name)
    return ok + bad
