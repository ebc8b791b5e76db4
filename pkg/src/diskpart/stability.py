"""Second variation of length on exact partition graphs.

Admissible functions are discretized with continuous piecewise-quadratic
elements on ``m + 1`` equally spaced nodes per edge (``m`` even).  The
value of ``u`` at an edge end is the normal component of the velocity of
the vertex, so each interior vertex contributes a 2-vector of unknowns and
each boundary vertex one tangential speed.  This makes every discrete
function satisfy the vertex compatibility condition by construction.

The index form is assembled in integrated-by-parts form::

    Q(u, u) = sum_e int (u'^2 - h^2 u^2)
              + sum_{interior ends} q u^2 - sum_{boundary ends} u^2

with ``q = (h_ki + h_kj) / sqrt(3)`` for the third region ``k`` at the
vertex.  The integrals are exact for the quadratic interpolant, and the
area rows integrate it with Simpson's rule (also exact).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as sla

from .geometry import TOL_GEOM
from .graph import BOUNDARY, INTERIOR, Face, PartitionGraph
from .standard import check_stationary
from .topology import HalfEdge

SQRT3 = math.sqrt(3.0)
DEFAULT_M = 64

# reference P2 element on [-1, 1]; scale mass by half-length, stiffness by its inverse
_MASS = np.array([[4.0, 2.0, -1.0], [2.0, 16.0, 2.0], [-1.0, 2.0, 4.0]]) / 15.0
_STIFF = np.array([[7.0, -8.0, 1.0], [-8.0, 16.0, -8.0], [1.0, -8.0, 7.0]]) / 6.0


class PreconditionError(ValueError):
    pass


class ShapeError(ValueError):
    pass


def simpson_weights(m: int, length: float) -> np.ndarray:
    if m % 2:
        raise ShapeError("m must be even")
    w = np.ones(m + 1)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return w * (length / m) / 3.0


@dataclass
class VariationSpace:
    """Index bookkeeping between free unknowns and per-edge nodal values."""

    graph: PartitionGraph
    m: int
    edge_offset: list[int] = field(init=False)
    interior_dofs: dict[int, np.ndarray] = field(init=False)
    vertex_dofs: dict[int, np.ndarray] = field(init=False)
    n_full: int = field(init=False)
    n_free: int = field(init=False)
    T: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        g, m = self.graph, self.m
        if m < 2 or m % 2:
            raise ShapeError("m must be a positive even integer")
        self.edge_offset = [k * (m + 1) for k in range(len(g.edges))]
        self.n_full = len(g.edges) * (m + 1)
        nxt = 0
        self.interior_dofs = {}
        for e in g.edges:
            self.interior_dofs[e.id] = np.arange(nxt, nxt + m - 1)
            nxt += m - 1
        self.vertex_dofs = {}
        for v in g.vertices:
            size = 2 if v.kind == INTERIOR else 1
            self.vertex_dofs[v.id] = np.arange(nxt, nxt + size)
            nxt += size
        self.n_free = nxt
        T = np.zeros((self.n_full, self.n_free))
        for e in g.edges:
            o = self.edge_offset[e.id]
            T[o + 1 + np.arange(m - 1), self.interior_dofs[e.id]] = 1.0
            for vid, node in ((e.tail, o), (e.head, o + m)):
                T[node, self.vertex_dofs[vid]] = self.end_coupling(e.id, vid)
        self.T = T

    def end_normal(self, eid: int, vid: int) -> np.ndarray:
        e = self.graph.edges[eid]
        s = 0.0 if vid == e.tail else e.arc.length
        return e.arc.normal_at(s)

    def end_tangent(self, eid: int, vid: int) -> np.ndarray:
        e = self.graph.edges[eid]
        s = 0.0 if vid == e.tail else e.arc.length
        return e.arc.tangent_at(s)

    def boundary_tangent(self, vid: int) -> np.ndarray:
        p = self.graph.vertices[vid].point
        return np.array([-p.y, p.x]) / p.norm

    def end_coupling(self, eid: int, vid: int) -> np.ndarray:
        """Row mapping the vertex unknowns to u_e at that end."""
        n = self.end_normal(eid, vid)
        if self.graph.vertices[vid].kind == INTERIOR:
            return n
        return np.array([float(np.dot(self.boundary_tangent(vid), n))])

    def nodes(self, eid: int) -> np.ndarray:
        return np.linspace(0.0, self.graph.edges[eid].arc.length, self.m + 1)

    def edge_slice(self, eid: int) -> slice:
        o = self.edge_offset[eid]
        return slice(o, o + self.m + 1)

    def zero(self) -> "DiscretizedVariation":
        return DiscretizedVariation(self, np.zeros(self.n_free))

    def from_samples(self, values: dict[int, np.ndarray], vertex_vectors: dict[int, np.ndarray]) -> "DiscretizedVariation":
        """Build a variation from nodal values and vertex velocities.

        ``vertex_vectors`` holds 2-vectors; at boundary vertices only the
        tangential part is kept.  Edge-end values are overwritten by the
        normal components of the vertex vectors.
        """
        xi = np.zeros(self.n_free)
        for eid, vals in values.items():
            vals = np.asarray(vals, dtype=float)
            if vals.shape != (self.m + 1,):
                raise ShapeError(f"edge {eid}: expected {self.m + 1} samples, got {vals.shape}")
            xi[self.interior_dofs[eid]] = vals[1:-1]
        for v in self.graph.vertices:
            X = np.asarray(vertex_vectors.get(v.id, np.zeros(2)), dtype=float)
            if v.kind == INTERIOR:
                xi[self.vertex_dofs[v.id]] = X
            else:
                xi[self.vertex_dofs[v.id]] = float(np.dot(X, self.boundary_tangent(v.id)))
        return DiscretizedVariation(self, xi)

    def from_edge_values(self, values: dict[int, np.ndarray]) -> "DiscretizedVariation":
        """Variation from nodal values alone; vertex velocities are fitted to the end values."""
        vecs = {}
        g = self.graph
        for v in g.vertices:
            rows, rhs = [], []
            for eid, _ in g.incident(v.id):
                vals = values.get(eid)
                end = 0 if g.edges[eid].tail == v.id else -1
                rows.append(self.end_normal(eid, v.id))
                rhs.append(0.0 if vals is None else float(np.asarray(vals)[end]))
            if not rows:
                continue
            if v.kind == INTERIOR:
                vecs[v.id] = np.linalg.lstsq(np.array(rows), np.array(rhs), rcond=None)[0]
            else:
                tau = self.boundary_tangent(v.id)
                c = float(np.dot(tau, rows[0]))
                vecs[v.id] = tau * (rhs[0] / c)
        return self.from_samples(values, vecs)


@dataclass
class DiscretizedVariation:
    space: VariationSpace
    xi: np.ndarray

    @property
    def full(self) -> np.ndarray:
        return self.space.T @ self.xi

    def values(self, eid: int) -> np.ndarray:
        return self.full[self.space.edge_slice(eid)]

    def vertex_vector(self, vid: int) -> np.ndarray:
        sp = self.space
        dofs = self.xi[sp.vertex_dofs[vid]]
        if sp.graph.vertices[vid].kind == INTERIOR:
            return dofs.copy()
        return dofs[0] * sp.boundary_tangent(vid)

    def compatibility_residual(self) -> float:
        """max |u_ij + u_jk + u_ki| over interior vertices (cyclic orientation)."""
        g = self.space.graph
        worst = 0.0
        for v in g.vertices:
            if v.kind != INTERIOR:
                continue
            total = 0.0
            for eid, from_tail in g.incident(v.id):
                vals = self.values(eid)
                # outgoing orientation: u w.r.t. the left normal of the outgoing arc
                total += vals[0] if from_tail else -vals[-1]
            worst = max(worst, abs(total))
        return worst

    def __add__(self, other: "DiscretizedVariation") -> "DiscretizedVariation":
        return DiscretizedVariation(self.space, self.xi + other.xi)

    def __sub__(self, other: "DiscretizedVariation") -> "DiscretizedVariation":
        return DiscretizedVariation(self.space, self.xi - other.xi)

    def __mul__(self, c: float) -> "DiscretizedVariation":
        return DiscretizedVariation(self.space, c * self.xi)

    __rmul__ = __mul__


@dataclass
class IndexFormMatrix:
    space: VariationSpace
    Q: np.ndarray
    M: np.ndarray
    A: np.ndarray

    def value(self, u: DiscretizedVariation, v: DiscretizedVariation | None = None) -> float:
        v = u if v is None else v
        return float(u.xi @ self.Q @ v.xi)

    def constraint_rank(self) -> int:
        return int(np.linalg.matrix_rank(self.A, tol=1e-10 * max(1.0, np.abs(self.A).max())))


# ---------------------------------------------------------------------------
# first variation and area derivatives


def area_rows_full(space: VariationSpace) -> np.ndarray:
    g = space.graph
    A = np.zeros((g.n_regions, space.n_full))
    for e in g.edges:
        w = simpson_weights(space.m, e.arc.length)
        sl = space.edge_slice(e.id)
        A[e.left, sl] -= w
        A[e.right, sl] += w
    return A


def area_derivatives(g: PartitionGraph, u: DiscretizedVariation) -> np.ndarray:
    """dA_i/dt = -sum_j int u_ij for each region."""
    if u.space.graph is not g:
        _check_same_shape(g, u)
    return area_rows_full(u.space) @ u.full


def _check_same_shape(g: PartitionGraph, u: DiscretizedVariation) -> None:
    if len(g.edges) != len(u.space.graph.edges) or len(g.vertices) != len(u.space.graph.vertices):
        raise ShapeError("variation was discretized on a different graph")


def first_variation_length(g: PartitionGraph, u: DiscretizedVariation) -> float:
    """dL/dt = -sum_e ( int h_e u_e + sum_ends X(p) . nu_e(p) )."""
    _check_same_shape(g, u)
    sp = u.space
    total = 0.0
    for e in g.edges:
        w = simpson_weights(sp.m, e.arc.length)
        total -= e.arc.h * float(w @ u.values(e.id))
        # inner conormals: +tangent at the tail, -tangent at the head
        total -= float(np.dot(u.vertex_vector(e.tail), e.arc.tangent_at(0.0)))
        total += float(np.dot(u.vertex_vector(e.head), e.arc.tangent_at(e.arc.length)))
    return total


# ---------------------------------------------------------------------------
# index form


def vertex_potential(g: PartitionGraph, vid: int) -> dict[int, float]:
    """q_e at the interior vertex ``vid`` for each incident edge."""
    inc = g.incident(vid)
    arcs = [(eid, g.outgoing_arc(eid, fwd)) for eid, fwd in inc]
    arcs.sort(key=lambda t: t[1].start_angle % (2 * math.pi))
    q = {}
    for k, (eid, _) in enumerate(arcs):
        b = arcs[(k + 1) % 3][1]
        c = arcs[(k + 2) % 3][1]
        # third face lies left of the outgoing b and right of the outgoing c
        q[eid] = (b.h - c.h) / SQRT3
    return q


def assemble_full(space: VariationSpace) -> tuple[np.ndarray, np.ndarray]:
    g, m = space.graph, space.m
    Qf = np.zeros((space.n_full, space.n_full))
    Mf = np.zeros((space.n_full, space.n_full))
    for e in g.edges:
        half = e.arc.length / m  # half-length of each quadratic element
        o = space.edge_offset[e.id]
        Ke = _STIFF / half - e.arc.h**2 * _MASS * half
        Me = _MASS * half
        for j in range(0, m, 2):
            idx = o + j + np.arange(3)
            Qf[np.ix_(idx, idx)] += Ke
            Mf[np.ix_(idx, idx)] += Me
    for v in g.vertices:
        if v.kind == INTERIOR:
            for eid, q in vertex_potential(g, v.id).items():
                e = g.edges[eid]
                node = space.edge_offset[eid] + (0 if e.tail == v.id else m)
                Qf[node, node] += q
        else:
            for eid, _ in g.incident(v.id):
                e = g.edges[eid]
                node = space.edge_offset[eid] + (0 if e.tail == v.id else m)
                Qf[node, node] -= 1.0  # curvature of the unit circle
    return Qf, Mf


def assemble_index_form(g: PartitionGraph, m: int = DEFAULT_M, check: bool = True, tol: float = 1e-6) -> IndexFormMatrix:
    """Index form, mass matrix and area rows on the admissible space."""
    if check:
        rep = check_stationary(g)
        if not rep.ok(tol):
            raise PreconditionError(f"graph is not stationary (max residual {rep.max_residual():.3g})")
    space = VariationSpace(g, m)
    Qf, Mf = assemble_full(space)
    T = space.T
    Q = T.T @ Qf @ T
    Q = 0.5 * (Q + Q.T)
    M = T.T @ Mf @ T
    M = 0.5 * (M + M.T)
    A = area_rows_full(space) @ T
    return IndexFormMatrix(space, Q, M, A)


def constrained_min_eigenvalue(q: IndexFormMatrix, k: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Smallest generalized eigenpairs of (Q, M) on the null space of the area rows."""
    scale = max(1.0, float(np.abs(q.A).max()))
    Z = sla.null_space(q.A, rcond=1e-10 * scale / max(1.0, np.abs(q.A).max()))
    Qz = Z.T @ q.Q @ Z
    Mz = Z.T @ q.M @ Z
    k = min(k, Z.shape[1])
    w, y = sla.eigh(0.5 * (Qz + Qz.T), 0.5 * (Mz + Mz.T), subset_by_index=[0, k - 1])
    return w, Z @ y


def project_area_preserving(q: IndexFormMatrix, u: DiscretizedVariation) -> DiscretizedVariation:
    """M-orthogonal projection of ``u`` onto the area-preserving subspace."""
    A, M = q.A, q.M
    Minv_At = np.linalg.solve(M, A.T)
    lam = np.linalg.lstsq(A @ Minv_At, A @ u.xi, rcond=None)[0]
    return DiscretizedVariation(u.space, u.xi - Minv_At @ lam)


# ---------------------------------------------------------------------------
# Jacobi functions and nodal regions


def rotation_jacobi(g: PartitionGraph, m: int = DEFAULT_M, space: VariationSpace | None = None) -> DiscretizedVariation:
    """Normal component of the rotation field X(x, y) = (-y, x)."""
    space = space or VariationSpace(g, m)
    vals = {}
    for e in g.edges:
        s = space.nodes(e.id)
        pts = e.arc.point_at(s)
        X = np.stack([-pts[:, 1], pts[:, 0]], axis=-1)
        vals[e.id] = np.einsum("ij,ij->i", X, e.arc.normal_at(s))
    vecs = {v.id: np.array([-v.point.y, v.point.x]) for v in g.vertices}
    return space.from_samples(vals, vecs)


def jacobi_residual(u: DiscretizedVariation) -> float:
    """max over edges of |u'' + h^2 u| / max|u| from a spectral (Chebyshev) fit."""
    g = u.space.graph
    worst = 0.0
    scale = max(1e-300, float(np.abs(u.full).max()))
    for e in g.edges:
        s = u.space.nodes(e.id)
        L = e.arc.length
        x = 2.0 * s / L - 1.0
        deg = min(len(s) - 1, 16)
        c = np.polynomial.chebyshev.chebfit(x, u.values(e.id), deg)
        d2 = np.polynomial.chebyshev.chebder(c, 2) * (2.0 / L) ** 2
        r = np.polynomial.chebyshev.chebval(x, d2) + e.arc.h**2 * np.polynomial.chebyshev.chebval(x, c)
        worst = max(worst, float(np.abs(r).max()) / scale)
    return worst


@dataclass
class NodalReport:
    count: int
    vertex_flags: list[int]
    node_flags: list[tuple[int, int]]
    degenerate: bool

    def to_dict(self) -> dict:
        return {
            "count": self.count,
            "vertex_flags": self.vertex_flags,
            "node_flags": [list(t) for t in self.node_flags],
            "degenerate": self.degenerate,
        }


def nodal_region_count(g: PartitionGraph, u: DiscretizedVariation, zero_tol: float = 1e-10) -> NodalReport:
    """Connected components of {u != 0} on the graph.

    Segments between consecutive nodes are merged unless ``u`` changes sign
    or vanishes there; the pieces of different edges meeting at a vertex
    are merged when their end values are nonzero.  Vertices where some
    incident edge has a vanishing end value are flagged.
    """
    _check_same_shape(g, u)
    scale = float(np.abs(u.full).max())
    if scale == 0.0:
        return NodalReport(0, [], [], True)
    tol = zero_tol * max(1.0, scale)
    parent: dict = {}

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(a, b):
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb

    node_flags = []
    for e in g.edges:
        vals = u.values(e.id)
        nz = np.abs(vals) > tol
        for k in range(len(vals)):
            if nz[k]:
                parent[(e.id, k)] = (e.id, k)
            elif 0 < k < len(vals) - 1:
                node_flags.append((e.id, k))
        for k in range(len(vals) - 1):
            if nz[k] and nz[k + 1] and vals[k] * vals[k + 1] > 0:
                union((e.id, k), (e.id, k + 1))
    vertex_flags = []
    for v in g.vertices:
        ends = []
        flagged = False
        for eid, from_tail in g.incident(v.id):
            k = 0 if from_tail else u.space.m
            if abs(u.values(eid)[k]) > tol:
                ends.append((eid, k))
            else:
                flagged = True
        if flagged:
            vertex_flags.append(v.id)
        for a, b in zip(ends, ends[1:]):
            union(a, b)
    roots = {find(a) for a in parent}
    return NodalReport(len(roots), vertex_flags, node_flags, degenerate=bool(vertex_flags) or not roots)


# ---------------------------------------------------------------------------
# explicit instability certificates


def face_indicator(space: VariationSpace, face: Face) -> DiscretizedVariation:
    """u = 1 on the boundary of ``face`` (normal pointing into it), 0 elsewhere."""
    vals = {}
    for it in face.items:
        if isinstance(it, HalfEdge):
            sign = 1.0 if it.forward else -1.0
            vals[it.edge] = vals.get(it.edge, np.zeros(space.m + 1)) + sign
    return space.from_edge_values(vals)


def is_hexagonal(g: PartitionGraph, face: Face) -> bool:
    if face.touches_boundary or face.n_edges != 6:
        return False
    return all(g.edges[eid].arc.is_straight for eid in face.interior_edges)


def _region_pressures(g: PartitionGraph) -> np.ndarray:
    p = g.pressures()
    if p is None:
        from .graph import fit_pressures

        p, _ = fit_pressures(g)
    return p


def _best_combination(q: IndexFormMatrix, us: list[DiscretizedVariation]) -> tuple[float, np.ndarray, float]:
    """Most negative normalized Q over area-preserving combinations of ``us``."""
    U = np.array([u.xi for u in us]).T
    G = U.T @ q.Q @ U
    N = U.T @ q.M @ U
    C = q.A @ U
    Z = sla.null_space(C, rcond=1e-9)
    if Z.shape[1] == 0:
        return math.inf, np.zeros(len(us)), math.inf
    w, y = sla.eigh(Z.T @ G @ Z, Z.T @ N @ Z)
    c = Z @ y[:, 0]
    c /= np.abs(c).max()
    u = U @ c
    return float(u @ q.Q @ u), c, float(np.abs(q.A @ u).max())


def largest_pressure_component_bound(g: PartitionGraph, q: IndexFormMatrix | None = None) -> dict:
    """Check the component bound for the largest-pressure region.

    When that region has at least n nonhexagonal components, the
    area-preserving combination of component indicators with the most
    negative index form is reported as a certificate.
    """
    q = q or assemble_index_form(g, check=False)
    p = _region_pressures(g)
    n = g.n_regions
    pmax = float(np.max(p))
    tied = [i for i in range(n) if pmax - p[i] < 1e-9 * max(1.0, abs(pmax))]
    counts = {i: [f for f in g.components(i) if not is_hexagonal(g, f)] for i in tied}
    region = max(tied, key=lambda i: (len(counts[i]), -i))
    comps = counts[region]
    report = {
        "region": region,
        "nonhexagonal_components": len(comps),
        "bound": n - 1,
        "satisfied": len(comps) <= n - 1,
        "certificate": None,
    }
    if len(comps) >= n:
        us = [face_indicator(q.space, f) for f in comps]
        val, coeffs, area_res = _best_combination(q, us)
        report["certificate"] = {
            "kind": "largest-pressure-components",
            "Q_value": val,
            "coefficients": coeffs.tolist(),
            "area_residual": area_res,
            "support": [f.id for f in comps],
        }
    return report


def boundary_three_component_certificate(g: PartitionGraph, q: IndexFormMatrix | None = None) -> dict | None:
    """u = u1 - u2 on two boundary 3-components of one region, if present."""
    q = q or assemble_index_form(g, check=False)
    for r in range(g.n_regions):
        caps = [f for f in g.components(r) if f.touches_boundary and f.n_edges == 3]
        if len(caps) >= 2:
            u1 = face_indicator(q.space, caps[0])
            u2 = face_indicator(q.space, caps[1])
            u = u1 - u2
            return {
                "kind": "two-boundary-3-components",
                "Q_value": q.value(u),
                "area_residual": float(np.abs(q.A @ u.xi).max()),
                "support": [caps[0].id, caps[1].id],
                "region": r,
            }
    return None


def two_interior_component_certificate(g: PartitionGraph, q: IndexFormMatrix | None = None) -> dict | None:
    """+1/-1 indicators on two congruent interior 4-components of one region."""
    q = q or assemble_index_form(g, check=False)
    for r in range(g.n_regions):
        quads = [f for f in g.components(r) if not f.touches_boundary and f.n_edges == 4]
        for i in range(len(quads)):
            for j in range(i + 1, len(quads)):
                a, b = quads[i], quads[j]
                if abs(a.area - b.area) > 1e-8:
                    continue
                u = face_indicator(q.space, a) - face_indicator(q.space, b)
                return {
                    "kind": "congruent-interior-4-components",
                    "Q_value": q.value(u),
                    "area_residual": float(np.abs(q.A @ u.xi).max()),
                    "support": [a.id, b.id],
                    "region": r,
                }
    return None


@dataclass
class StabilityReport:
    lambda_min: float
    modes: list[float]
    constraint_rank: int
    certificates: list[dict]
    nodal: dict | None
    component_bound: dict | None

    @property
    def verdict(self) -> str:
        return "stable" if self.lambda_min >= -1e-6 else "unstable"

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "lambda_min": self.lambda_min,
            "modes": self.modes,
            "constraint_rank": self.constraint_rank,
            "certificates": self.certificates,
            "nodal": self.nodal,
            "component_bound": self.component_bound,
        }


def analyze(g: PartitionGraph, k: int = 4, m: int = DEFAULT_M, tol: float = 1e-6) -> StabilityReport:
    """Spectrum on the area-preserving space plus every applicable certificate."""
    q = assemble_index_form(g, m, tol=tol)
    w, _ = constrained_min_eigenvalue(q, k)
    certs = []
    for fn in (boundary_three_component_certificate, two_interior_component_certificate):
        c = fn(g, q)
        if c is not None:
            certs.append(c)
    bound = largest_pressure_component_bound(g, q)
    if bound["certificate"] is not None:
        certs.append(bound["certificate"])
    u = rotation_jacobi(g, space=q.space)
    nod = nodal_region_count(g, u)
    nodal = nod.to_dict()
    if nod.count >= 4:
        nodal["applies"] = g.n_regions == 3 and not nod.vertex_flags
    return StabilityReport(float(w[0]), [float(x) for x in w], q.constraint_rank(), certs, nodal, bound)
