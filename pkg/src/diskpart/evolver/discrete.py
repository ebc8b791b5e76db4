"""Polyline curve networks in the unit disk with exact derivatives.

Each edge is a chain of ``n_pts`` points.  Its interior points sit at
fixed fractions of the chord between its two junctions and move only
along the chord normal, so an edge is described by one offset per
interior point.  Interior junctions carry (x, y), boundary junctions the
polar angle on the unit circle.  These numbers form the degree-of-freedom
vector ``x``; point positions, perimeter and region areas are functions of
``x`` with exact sparse first and second derivatives.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.sparse as sp

from ..geometry import ArcEdge, GeometryError, Point
from ..graph import BOUNDARY, INTERIOR, Edge, PartitionGraph, Region, Vertex
from ..topology import BoundaryArc, EdgeSpec, HalfEdge, trace_faces

TWO_PI = 2.0 * math.pi


class TemplateError(ValueError):
    """Combinatorics that violate the degree or labeling rules."""


@dataclass(frozen=True)
class DiscreteFace:
    id: int
    region: int
    items: tuple
    n_edges: int
    touches_boundary: bool

    @property
    def interior_edges(self) -> list[int]:
        return [it.edge for it in self.items if isinstance(it, HalfEdge)]


def _rot(v: np.ndarray) -> np.ndarray:
    """Rotate by +90 degrees along the last axis."""
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


class DiscreteGraph:
    """A mutable polyline partition of the unit disk."""

    def __init__(
        self,
        kinds: Sequence[str],
        points,
        edges: Sequence[tuple[int, int, int, int]],
        targets: Sequence[float],
        n_pts: int = 32,
        name: str = "",
        offsets=None,
    ):
        if n_pts < 3:
            raise ValueError("n_pts must be at least 3")
        self.name = name
        self.kinds = tuple(kinds)
        self.edges = tuple(tuple(int(v) for v in e) for e in edges)
        self.targets = np.array([float(a) for a in targets])
        self.n_pts = int(n_pts)
        self.multipliers: np.ndarray | None = None
        pts = np.asarray(points, dtype=float).reshape(-1, 2)
        if len(pts) != len(self.kinds):
            raise TemplateError("one position per junction is required")

        nj = len(self.kinds)
        self.jdof = np.zeros(nj, dtype=int)
        k = 0
        for j, kind in enumerate(self.kinds):
            self.jdof[j] = k
            k += 2 if kind == INTERIOR else 1
        self.n_jdof = k
        m = self.n_pts - 1
        self.n_dof = k + len(self.edges) * (m - 1)
        x = np.zeros(self.n_dof)
        for j, kind in enumerate(self.kinds):
            d = self.jdof[j]
            if kind == INTERIOR:
                x[d : d + 2] = pts[j]
            else:
                x[d] = math.atan2(pts[j, 1], pts[j, 0])
        if offsets is not None:
            x[k:] = np.asarray(offsets, dtype=float).ravel()
        self.x = x
        self.boundary_order = self._cyclic_boundary_order(x)

        # node layout: junctions first, then the interior points of each edge
        self.n_nodes = nj + len(self.edges) * (m - 1)
        self.s = np.arange(1, m) / m
        chains = np.zeros((len(self.edges), m + 1), dtype=int)
        for e, (t, h, _, _) in enumerate(self.edges):
            chains[e, 0] = t
            chains[e, 1:m] = nj + e * (m - 1) + np.arange(m - 1)
            chains[e, m] = h
        self.chains = chains
        self.tail = np.array([e[0] for e in self.edges], dtype=int)
        self.head = np.array([e[1] for e in self.edges], dtype=int)
        self._check_degrees()
        self.faces = self._trace()
        n = len(self.targets)
        self.sigma = np.zeros((n, len(self.edges)))
        for e, (_, _, left, right) in enumerate(self.edges):
            if not (0 <= left < n and 0 <= right < n) or left == right:
                raise TemplateError(f"edge {e} has invalid side labels {left}, {right}")
            self.sigma[left, e] += 1.0
            self.sigma[right, e] -= 1.0
        self._arc_items = [
            (f.region, it.start, it.end) for f in self.faces for it in f.items if isinstance(it, BoundaryArc)
        ]

    # -- combinatorics ---------------------------------------------------------------

    @property
    def n_regions(self) -> int:
        return len(self.targets)

    @property
    def n_junctions(self) -> int:
        return len(self.kinds)

    def _check_degrees(self) -> None:
        deg = np.zeros(self.n_junctions, dtype=int)
        for t, h, _, _ in self.edges:
            if t == h:
                raise TemplateError("loops are not allowed")
            deg[t] += 1
            deg[h] += 1
        for j, kind in enumerate(self.kinds):
            want = 3 if kind == INTERIOR else 1
            if deg[j] != want:
                raise TemplateError(f"junction {j} ({kind}) has degree {deg[j]}, expected {want}")

    def edge_spec(self, e: int, P: np.ndarray | None = None) -> EdgeSpec:
        P = self.positions() if P is None else P
        c = self.chains[e]
        d0 = P[c[1]] - P[c[0]]
        d1 = P[c[-2]] - P[c[-1]]
        return EdgeSpec(int(c[0]), int(c[-1]), math.atan2(d0[1], d0[0]), math.atan2(d1[1], d1[0]))

    def _trace(self) -> tuple[DiscreteFace, ...]:
        if not self.edges:
            return (DiscreteFace(0, 0, (), 1, True),)
        P = self.positions()
        specs = [self.edge_spec(e, P) for e in range(len(self.edges))]
        bang = {j: float(self.x[self.jdof[j]]) for j, k in enumerate(self.kinds) if k == BOUNDARY}
        faces = []
        for k, items in enumerate(trace_faces(specs, bang)):
            labels = set()
            n_edges = 0
            touches = False
            prev_arc = False
            for it in items:
                if isinstance(it, HalfEdge):
                    _, _, left, right = self.edges[it.edge]
                    labels.add(left if it.forward else right)
                    n_edges += 1
                    prev_arc = False
                else:
                    touches = True
                    if not prev_arc:
                        n_edges += 1
                    prev_arc = True
            if len(labels) != 1:
                raise TemplateError(f"face {k} carries inconsistent labels {sorted(labels)}")
            if n_edges <= 2:
                raise TemplateError(f"face {k} is a {n_edges}-component")
            faces.append(DiscreteFace(k, labels.pop(), tuple(items), n_edges, touches))
        return tuple(faces)

    def _cyclic_boundary_order(self, x: np.ndarray) -> tuple[int, ...]:
        bj = [j for j, k in enumerate(self.kinds) if k == BOUNDARY]
        if not bj:
            return ()
        order = [bj[i] for i in np.argsort([x[self.jdof[j]] % TWO_PI for j in bj], kind="stable")]
        k = order.index(min(order))
        return tuple(order[k:] + order[:k])

    def components(self, region: int) -> list[DiscreteFace]:
        return [f for f in self.faces if f.region == region]

    # -- geometry ---------------------------------------------------------------------

    def junction_positions(self, x: np.ndarray | None = None) -> np.ndarray:
        x = self.x if x is None else x
        P = np.zeros((self.n_junctions, 2))
        for j, kind in enumerate(self.kinds):
            d = self.jdof[j]
            if kind == INTERIOR:
                P[j] = x[d : d + 2]
            else:
                P[j] = (math.cos(x[d]), math.sin(x[d]))
        return P

    def offsets(self, x: np.ndarray | None = None) -> np.ndarray:
        x = self.x if x is None else x
        return x[self.n_jdof :].reshape(len(self.edges), self.n_pts - 2)

    def positions(self, x: np.ndarray | None = None) -> np.ndarray:
        x = self.x if x is None else x
        J = self.junction_positions(x)
        if not self.edges:
            return J
        a, b = J[self.tail], J[self.head]
        y = self.offsets(x)
        s = self.s[None, :, None]
        inner = a[:, None, :] * (1 - s) + b[:, None, :] * s + y[..., None] * _rot(b - a)[:, None, :]
        return np.vstack([J, inner.reshape(-1, 2)])

    def polylines(self, x: np.ndarray | None = None) -> list[np.ndarray]:
        P = self.positions(x)
        return [P[c] for c in self.chains]

    def edge_lengths(self, x: np.ndarray | None = None) -> np.ndarray:
        P = self.positions(x)
        d = np.diff(P[self.chains], axis=1)
        return np.linalg.norm(d, axis=2).sum(axis=1)

    def chord_lengths(self, x: np.ndarray | None = None) -> np.ndarray:
        J = self.junction_positions(x)
        return np.linalg.norm(J[self.head] - J[self.tail], axis=1)

    def perimeter(self, x: np.ndarray | None = None) -> float:
        if not self.edges:
            return 0.0
        return float(self.edge_lengths(x).sum())

    def _shoelace(self, P: np.ndarray) -> np.ndarray:
        Q = P[self.chains]
        p, q = Q[:, :-1], Q[:, 1:]
        return 0.5 * np.sum(p[..., 0] * q[..., 1] - q[..., 0] * p[..., 1], axis=1)

    def _arc_delta(self, x: np.ndarray, start: int, end: int) -> float:
        d = (x[self.jdof[end]] - x[self.jdof[start]]) % TWO_PI
        return TWO_PI if d == 0.0 else d

    def face_areas(self, x: np.ndarray | None = None) -> np.ndarray:
        x = self.x if x is None else x
        if not self.edges:
            return np.array([math.pi])
        S = self._shoelace(self.positions(x))
        out = np.zeros(len(self.faces))
        for f in self.faces:
            for it in f.items:
                if isinstance(it, HalfEdge):
                    out[f.id] += S[it.edge] if it.forward else -S[it.edge]
                else:
                    out[f.id] += 0.5 * self._arc_delta(x, it.start, it.end)
        return out

    def region_areas(self, x: np.ndarray | None = None) -> np.ndarray:
        x = self.x if x is None else x
        if not self.edges:
            return np.array([math.pi])
        A = self.sigma @ self._shoelace(self.positions(x))
        for r, a, b in self._arc_items:
            A[r] += 0.5 * self._arc_delta(x, a, b)
        return A

    def copy(self) -> "DiscreteGraph":
        g = object.__new__(DiscreteGraph)
        g.__dict__.update(self.__dict__)
        g.x = self.x.copy()
        g.multipliers = None if self.multipliers is None else self.multipliers.copy()
        return g

    def validity_problems(self, x: np.ndarray | None = None, min_length: float = 0.0) -> list[str]:
        """Geometric sanity: junctions inside, faces positive, boundary order kept, edges long enough."""
        x = self.x if x is None else x
        probs = []
        if not self.edges:
            return probs
        P = self.positions(x)
        nj = self.n_junctions
        r = np.linalg.norm(P, axis=1)
        for j, kind in enumerate(self.kinds):
            if kind == INTERIOR and r[j] >= 1.0:
                probs.append(f"junction {j} left the disk")
        if np.any(r[nj:] > 1.0 + 1e-12):
            probs.append("an edge leaves the disk")
        if np.any(self.face_areas(x) <= 0):
            probs.append("a face has nonpositive area")
        chord = self.chord_lengths(x)
        short = np.flatnonzero(chord < min_length)
        for e in short:
            probs.append(f"edge {int(e)} is shorter than {min_length}")
        if np.abs(self.offsets(x)).max(initial=0.0) > 0.45:
            probs.append("an edge bends past a half circle")
        if self._cyclic_boundary_order(x) != self.boundary_order:
            probs.append("boundary junctions changed their cyclic order")
        return probs

    # -- derivatives ------------------------------------------------------------------

    def jacobian(self, x: np.ndarray | None = None) -> sp.csr_matrix:
        """d(point coordinates)/dx as a (2 N, n_dof) sparse matrix."""
        x = self.x if x is None else x
        rows, cols, vals = [], [], []
        J = self.junction_positions(x)
        tang = {}
        for j, kind in enumerate(self.kinds):
            d = self.jdof[j]
            if kind == INTERIOR:
                rows += [2 * j, 2 * j + 1]
                cols += [d, d + 1]
                vals += [1.0, 1.0]
            else:
                t = np.array([-J[j, 1], J[j, 0]])
                tang[j] = t
                rows += [2 * j, 2 * j + 1]
                cols += [d, d]
                vals += [t[0], t[1]]
        m1 = self.n_pts - 2
        s = self.s
        y = self.offsets(x)
        for e in range(len(self.edges)):
            nodes = self.chains[e, 1:-1]
            rx, ry = 2 * nodes, 2 * nodes + 1
            for end, w in ((self.tail[e], "a"), (self.head[e], "b")):
                # M_a = (1-s) I - y R, M_b = s I + y R with R = [[0,-1],[1,0]]
                c = (1 - s) if w == "a" else s
                sg = -1.0 if w == "a" else 1.0
                m00, m01, m10, m11 = c, -sg * y[e], sg * y[e], c
                d = self.jdof[end]
                if self.kinds[end] == INTERIOR:
                    rows += [rx, rx, ry, ry]
                    cols += [np.full(m1, d), np.full(m1, d + 1), np.full(m1, d), np.full(m1, d + 1)]
                    vals += [m00, m01, m10, m11]
                else:
                    t = tang[end]
                    rows += [rx, ry]
                    cols += [np.full(m1, d), np.full(m1, d)]
                    vals += [m00 * t[0] + m01 * t[1], m10 * t[0] + m11 * t[1]]
            rv = _rot(J[self.head[e]] - J[self.tail[e]])
            dy = self.n_jdof + e * m1 + np.arange(m1)
            rows += [rx, ry]
            cols += [dy, dy]
            vals += [np.full(m1, rv[0]), np.full(m1, rv[1])]
        rows = np.concatenate([np.atleast_1d(np.asarray(r)) for r in rows])
        cols = np.concatenate([np.atleast_1d(np.asarray(c)) for c in cols])
        vals = np.concatenate([np.atleast_1d(np.asarray(v, dtype=float)) for v in vals])
        return sp.csr_matrix((vals, (rows, cols)), shape=(2 * self.n_nodes, self.n_dof))

    def _length_terms(self, P: np.ndarray):
        Q = P[self.chains]
        p_idx, q_idx = self.chains[:, :-1].ravel(), self.chains[:, 1:].ravel()
        d = (Q[:, 1:] - Q[:, :-1]).reshape(-1, 2)
        ell = np.linalg.norm(d, axis=1)
        u = d / ell[:, None]
        grad = np.zeros((self.n_nodes, 2))
        np.add.at(grad, p_idx, -u)
        np.add.at(grad, q_idx, u)
        K = (np.eye(2)[None] - u[:, :, None] * u[:, None, :]) / ell[:, None, None]
        return float(ell.sum()), grad, (p_idx, q_idx, K)

    def _shoelace_grad(self, P: np.ndarray, weights: np.ndarray) -> np.ndarray:
        """Gradient in point coordinates of sum_e weights[e] * S_e."""
        Q = P[self.chains]
        w = np.repeat(weights, self.n_pts - 1)
        p, q = Q[:, :-1].reshape(-1, 2), Q[:, 1:].reshape(-1, 2)
        grad = np.zeros((self.n_nodes, 2))
        np.add.at(grad, self.chains[:, :-1].ravel(), 0.5 * w[:, None] * np.stack([q[:, 1], -q[:, 0]], axis=1))
        np.add.at(grad, self.chains[:, 1:].ravel(), 0.5 * w[:, None] * np.stack([-p[:, 1], p[:, 0]], axis=1))
        return grad

    def area_jacobian(self, x: np.ndarray | None = None, Jac: sp.csr_matrix | None = None) -> np.ndarray:
        """(n_regions, n_dof) derivative of the region areas."""
        x = self.x if x is None else x
        P = self.positions(x)
        Jac = self.jacobian(x) if Jac is None else Jac
        C = np.zeros((self.n_regions, self.n_dof))
        for r in range(self.n_regions):
            C[r] = Jac.T @ self._shoelace_grad(P, self.sigma[r]).ravel()
        for r, a, b in self._arc_items:
            C[r, self.jdof[b]] += 0.5
            C[r, self.jdof[a]] -= 0.5
        return C

    def length_gradient(self, x: np.ndarray | None = None, Jac: sp.csr_matrix | None = None) -> np.ndarray:
        x = self.x if x is None else x
        Jac = self.jacobian(x) if Jac is None else Jac
        _, g, _ = self._length_terms(self.positions(x))
        return Jac.T @ g.ravel()

    def lagrangian_hessian(self, lam: np.ndarray, x: np.ndarray | None = None, Jac: sp.csr_matrix | None = None):
        """Hessian of L - sum_r lam_r A_r with respect to x (sparse, symmetric)."""
        x = self.x if x is None else x
        Jac = self.jacobian(x) if Jac is None else Jac
        P = self.positions(x)
        _, gl, (pi, qi, K) = self._length_terms(P)
        w = self.sigma.T @ lam  # per-edge weight of S_e in sum_r lam_r A_r
        g = gl - self._shoelace_grad(P, w)

        rows, cols, vals = [], [], []
        for a_idx, b_idx, sgn in ((pi, pi, 1.0), (qi, qi, 1.0), (pi, qi, -1.0), (qi, pi, -1.0)):
            for c0 in range(2):
                for c1 in range(2):
                    rows.append(2 * a_idx + c0)
                    cols.append(2 * b_idx + c1)
                    vals.append(sgn * K[:, c0, c1])
        # shoelace: d2/(dp_x dq_y) = 1/2, d2/(dp_y dq_x) = -1/2 for each segment p -> q
        ws = -np.repeat(w, self.n_pts - 1) * 0.5
        for a_idx, b_idx, sgn in ((pi, qi, 1.0), (qi, pi, -1.0)):
            rows += [2 * a_idx, 2 * a_idx + 1]
            cols += [2 * b_idx + 1, 2 * b_idx]
            vals += [sgn * ws, -sgn * ws]
        HP = sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(2 * self.n_nodes, 2 * self.n_nodes),
        )
        H = (Jac.T @ HP @ Jac).tocsr()
        return H + self._curvature_terms(x, g), g

    def _curvature_terms(self, x: np.ndarray, g: np.ndarray) -> sp.csr_matrix:
        """sum_i g_i . d2 P_i / dx2 for the point-gradient ``g``."""
        J = self.junction_positions(x)
        rows, cols, vals = [], [], []
        for j, kind in enumerate(self.kinds):
            if kind == BOUNDARY:
                d = self.jdof[j]
                rows.append([d])
                cols.append([d])
                vals.append([-float(g[j] @ J[j])])
        m1 = self.n_pts - 2
        y = self.offsets(x)
        s = self.s
        for e in range(len(self.edges)):
            ge = g[self.chains[e, 1:-1]]
            rg = np.stack([ge[:, 1], -ge[:, 0]], axis=1)  # R^T g
            dy = self.n_jdof + e * m1 + np.arange(m1)
            for end, sg, c in ((self.tail[e], -1.0, 1 - s), (self.head[e], 1.0, s)):
                d = self.jdof[end]
                if self.kinds[end] == INTERIOR:
                    for k in range(2):
                        v = sg * rg[:, k]
                        rows += [dy, np.full(m1, d + k)]
                        cols += [np.full(m1, d + k), dy]
                        vals += [v, v]
                else:
                    t = np.array([-J[end, 1], J[end, 0]])
                    v = sg * (rg @ t)
                    rows += [dy, np.full(m1, d)]
                    cols += [np.full(m1, d), dy]
                    vals += [v, v]
                    coef = (c[:, None] * ge + sg * y[e][:, None] * rg).sum(axis=0)
                    rows.append([d])
                    cols.append([d])
                    vals.append([-float(coef @ J[end])])
        if not rows:
            return sp.csr_matrix((self.n_dof, self.n_dof))
        return sp.csr_matrix(
            (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
            shape=(self.n_dof, self.n_dof),
        )

    # -- conversion -------------------------------------------------------------------

    def fitted_curvatures(self) -> np.ndarray:
        """Least-squares circle through each polyline's end points; curvature toward the left."""
        out = np.zeros(len(self.edges))
        for e, Q in enumerate(self.polylines()):
            out[e] = fit_chord_circle(Q)[0]
        return out

    def to_partition_graph(self, pressures=None) -> PartitionGraph:
        """Exact-arc graph through the junctions with the fitted curvatures."""
        J = self.junction_positions()
        verts = []
        for j, kind in enumerate(self.kinds):
            p = J[j] / np.linalg.norm(J[j]) if kind == BOUNDARY else J[j]
            verts.append(Vertex(j, Point(float(p[0]), float(p[1])), kind))
        hs = self.fitted_curvatures()
        edges = []
        for e, (t, h, left, right) in enumerate(self.edges):
            p0, p1 = verts[t].point, verts[h].point
            hmax = 2.0 / p0.dist(p1)
            k = float(np.clip(hs[e], -hmax * (1 - 1e-12), hmax * (1 - 1e-12)))
            try:
                edges.append(Edge(e, ArcEdge(p0, p1, k), t, h, left, right))
            except GeometryError as exc:
                raise GeometryError(f"edge {e} cannot be fitted by a minor arc") from exc
        p = self.multipliers if pressures is None else pressures
        regions = tuple(
            Region(r, float(self.targets[r]), None if p is None else float(p[r])) for r in range(self.n_regions)
        )
        return PartitionGraph(tuple(verts), tuple(edges), regions, {"template": self.name})

    def sample_points(self, per_segment: int = 8) -> np.ndarray:
        """Points on the polylines, densified linearly between nodes."""
        if not self.edges:
            return np.zeros((0, 2))
        t = np.arange(per_segment) / per_segment
        out = []
        for Q in self.polylines():
            seg = Q[:-1, None, :] * (1 - t)[None, :, None] + Q[1:, None, :] * t[None, :, None]
            out.append(seg.reshape(-1, 2))
            out.append(Q[-1:])
        return np.vstack(out)

    def to_dict(self) -> dict:
        J = self.junction_positions()
        return {
            "name": self.name,
            "n_pts": self.n_pts,
            "junctions": [
                {"id": j, "kind": k, "x": float(J[j, 0]), "y": float(J[j, 1])} for j, k in enumerate(self.kinds)
            ],
            "edges": [
                {"id": e, "tail": t, "head": h, "left": l, "right": r, "polyline": Q.tolist()}
                for e, ((t, h, l, r), Q) in enumerate(zip(self.edges, self.polylines()))
            ],
            "regions": [
                {
                    "id": r,
                    "target_area": float(self.targets[r]),
                    "multiplier": None if self.multipliers is None else float(self.multipliers[r]),
                }
                for r in range(self.n_regions)
            ],
        }


def fit_chord_circle(Q: np.ndarray) -> tuple[float, float]:
    """Curvature (toward the left) of the least-squares circle through both end points of ``Q``.

    Returns the curvature and the RMS distance of the points to the circle.
    """
    a, b = Q[0], Q[-1]
    c = float(np.linalg.norm(b - a))
    t = (b - a) / c
    n = np.array([-t[1], t[0]])
    mid = 0.5 * (a + b)
    u = (Q - mid) @ t
    v = (Q - mid) @ n
    # circle through (+-c/2, 0) with center (0, v0): u^2 + v^2 - c^2/4 = 2 v v0
    w = u * u + v * v - 0.25 * c * c
    svv, swv = float(v @ v), float(w @ v)
    if svv == 0.0:
        return 0.0, 0.0
    k = 2.0 * svv / swv if swv != 0.0 else math.inf  # 1 / v0
    h = k / math.sqrt(1.0 + 0.25 * c * c * k * k) if math.isfinite(k) else 2.0 / c
    if h == 0.0:
        return 0.0, float(np.sqrt(np.mean(v * v)))
    v0 = 1.0 / k
    R = math.sqrt(0.25 * c * c + v0 * v0)
    resid = np.sqrt(u * u + (v - v0) ** 2) - R
    return float(h), float(np.sqrt(np.mean(resid * resid)))
