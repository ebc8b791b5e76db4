from __future__ import annotations

import json
import math

import numpy as np
import pytest

from diskpart.geometry import ArcEdge, Point
from diskpart.graph import INTERIOR, Edge, PartitionGraph
from diskpart.instances import configuration_a, hexagon_graph, square_configuration_c
from diskpart.solver import AreaTargets, solve
from diskpart.stability import (
    PreconditionError,
    ShapeError,
    VariationSpace,
    analyze,
    area_derivatives,
    assemble_index_form,
    boundary_three_component_certificate,
    constrained_min_eigenvalue,
    face_indicator,
    first_variation_length,
    jacobi_residual,
    largest_pressure_component_bound,
    nodal_region_count,
    project_area_preserving,
    rotation_jacobi,
    two_interior_component_certificate,
    vertex_potential,
)
from diskpart.standard import check_stationary
from oracles import oracle_for, random_admissible

STATIONARY = {
    "standard": lambda: solve(AreaTargets((1.2, 1.0, math.pi - 2.2))).transformed(0.4),
    "equal": lambda: solve(AreaTargets.equal(3)),
    "splitter": lambda: solve(AreaTargets((1.0, math.pi - 1.0))),
    "conf_a": lambda: configuration_a(0.35),
    "hex": lambda: hexagon_graph(),
    "conf_c": lambda: square_configuration_c(0.45),
}


@pytest.fixture(params=sorted(STATIONARY))
def graph(request):
    return STATIONARY[request.param]()


def test_instances_are_stationary(graph):
    assert check_stationary(graph).max_residual() < 1e-12
    assert graph.region_areas().sum() == pytest.approx(math.pi, abs=1e-12)


def test_matrices_well_formed(graph):
    q = assemble_index_form(graph, 16)
    assert np.abs(q.Q - q.Q.T).max() < 1e-12
    assert np.linalg.eigvalsh(q.M).min() > 0
    assert q.constraint_rank() == graph.n_regions - 1


class TestVariations:
    def test_first_variation_matches_finite_differences(self, graph):
        rng = np.random.default_rng(3)
        q = assemble_index_form(graph, 32)
        u = random_admissible(q.space, rng)
        fd = oracle_for(u).first_derivative()
        assert first_variation_length(graph, u) == pytest.approx(fd, rel=1e-6, abs=1e-8)

    def test_area_derivatives_match_finite_differences(self, graph):
        rng = np.random.default_rng(4)
        q = assemble_index_form(graph, 32)
        u = random_admissible(q.space, rng)
        assert np.allclose(area_derivatives(graph, u), oracle_for(u).area_derivatives(), atol=1e-6)

    def test_index_form_matches_second_difference(self, graph):
        rng = np.random.default_rng(5)
        q = assemble_index_form(graph, 32)
        u = project_area_preserving(q, random_admissible(q.space, rng))
        assert np.abs(q.A @ u.xi).max() < 1e-12
        fd = oracle_for(u).second_derivative_fixed_area()
        assert q.value(u) == pytest.approx(fd, rel=1e-4)

    def test_stationary_first_variation_vanishes_on_area_preserving(self, graph):
        rng = np.random.default_rng(6)
        q = assemble_index_form(graph, 32)
        u = project_area_preserving(q, random_admissible(q.space, rng))
        assert abs(first_variation_length(graph, u)) < 1e-10

    def test_first_variation_is_pressure_weighted(self, graph):
        rng = np.random.default_rng(7)
        q = assemble_index_form(graph, 32)
        u = random_admissible(q.space, rng)
        p = graph.pressures()
        assert first_variation_length(graph, u) == pytest.approx(float(p @ area_derivatives(graph, u)), abs=1e-10)

    def test_zero_and_segment_graph(self):
        g = solve(AreaTargets.equal(3))
        sp = VariationSpace(g, 16)
        assert np.all(area_derivatives(g, sp.zero()) == 0.0)
        # all edges straight, vertices fixed: every term vanishes
        vals = {e.id: np.sin(np.pi * sp.nodes(e.id) / e.arc.length) for e in g.edges}
        u = sp.from_samples(vals, {})
        assert abs(first_variation_length(g, u)) < 1e-14

    def test_component_indicator_area_rates(self):
        g = hexagon_graph()
        sp = VariationSpace(g, 16)
        f = next(f for f in g.faces if f.touches_boundary and f.region == 0)
        u = face_indicator(sp, f)
        dA = area_derivatives(g, u)
        inner = sum(g.edges[eid].arc.length for eid in f.interior_edges)
        assert dA[0] == pytest.approx(-inner, abs=1e-12)
        assert dA[1] + dA[2] == pytest.approx(inner, abs=1e-12)

    def test_compatibility_holds(self, graph):
        rng = np.random.default_rng(8)
        u = random_admissible(VariationSpace(graph, 16), rng)
        assert u.compatibility_residual() < 1e-13

    def test_shape_error(self):
        a, b = solve(AreaTargets.equal(3)), hexagon_graph()
        u = VariationSpace(a, 8).zero()
        with pytest.raises(ShapeError):
            first_variation_length(b, u)
        with pytest.raises(ShapeError):
            VariationSpace(a, 7)


class TestIndexForm:
    def test_rotation_is_null(self, graph):
        q = assemble_index_form(graph)
        u = rotation_jacobi(graph, space=q.space)
        assert abs(q.value(u)) < 1e-6
        assert jacobi_residual(u) < 1e-6
        assert u.compatibility_residual() < 1e-13
        assert np.abs(q.A @ u.xi).max() < 1e-12

    def test_rotation_on_radial_segment(self):
        # the rotation field is perpendicular to radii: u = +-distance to the center
        g = hexagon_graph()
        u = rotation_jacobi(g, m=8)
        for e in g.edges[6:]:
            r = np.linalg.norm(e.arc.point_at(u.space.nodes(e.id)), axis=1)
            assert np.allclose(np.abs(u.values(e.id)), r, atol=1e-14)

    def test_rotation_vanishes_on_circles_about_origin(self):
        # an edge on a circle centered at the origin would give u = 0; check on
        # a tangent-free construction: a point moving on such a circle has
        # velocity parallel to the edge, so X.N = 0 at every node
        e = ArcEdge(Point(0.5, 0.0), Point(0.0, 0.5), 2.0)
        pts = e.point_at(np.linspace(0, e.length, 9))
        X = np.stack([-pts[:, 1], pts[:, 0]], axis=1)
        assert np.abs(np.einsum("ij,ij->i", X, e.normal_at(np.linspace(0, e.length, 9)))).max() < 1e-14

    def test_hexagon_indicator_is_null(self):
        g = hexagon_graph()
        q = assemble_index_form(g, 16)
        hexa = next(f for f in g.faces if not f.touches_boundary)
        assert abs(q.value(face_indicator(q.space, hexa))) < 1e-12

    def test_boundary_component_of_top_pressure_region(self):
        g = configuration_a(0.4)
        q = assemble_index_form(g, 16)
        assert int(np.argmax(g.pressures())) == 0
        cap = next(f for f in g.components(0) if f.touches_boundary)
        assert q.value(face_indicator(q.space, cap)) < 0

    def test_vertex_coefficient_identity(self):
        g = configuration_a(0.5)
        p = g.pressures()
        for v in g.vertices:
            if v.kind != INTERIOR:
                continue
            q = vertex_potential(g, v.id)
            into_top = [eid for eid in q if 0 in (g.edges[eid].left, g.edges[eid].right)]
            other = [eid for eid in q if eid not in into_top][0]
            # the two edges of region 0 meet the third region k across `other`
            k, j = g.edges[other].left, g.edges[other].right
            expect = ((p[k] - p[0]) + (p[j] - p[0])) / math.sqrt(3)
            assert sum(q[eid] for eid in into_top) == pytest.approx(expect, abs=1e-12)
            assert expect <= 0

    def test_refinement_invariance(self, graph):
        w1, _ = constrained_min_eigenvalue(assemble_index_form(graph, 64), 3)
        w2, _ = constrained_min_eigenvalue(assemble_index_form(graph, 128), 3)
        assert np.allclose(w1, w2, atol=1e-4, rtol=1e-4)

    def test_precondition(self):
        g = solve(AreaTargets.equal(3))
        e = g.edges[0]
        bent = Edge(e.id, ArcEdge(e.arc.p0, e.arc.p1, 0.3), e.tail, e.head, e.left, e.right)
        bad = PartitionGraph(g.vertices, (bent,) + g.edges[1:], g.regions)
        with pytest.raises(PreconditionError):
            assemble_index_form(bad)


class TestSpectrum:
    @pytest.mark.parametrize("areas", [(1.0, 1.0, math.pi - 2.0), (0.4, 1.7, math.pi - 2.1), (2.5, 0.3, math.pi - 2.8)])
    def test_standard_stable(self, areas):
        w, _ = constrained_min_eigenvalue(assemble_index_form(solve(AreaTargets(areas))), 2)
        assert w[0] >= -1e-6
        assert w[1] > 1.0

    def test_diameter_stable_with_rotation_mode(self):
        g = solve(AreaTargets.equal(2))
        q = assemble_index_form(g)
        w, vecs = constrained_min_eigenvalue(q, 2)
        assert w[0] >= -1e-6 and abs(w[0]) < 1e-6
        rot = rotation_jacobi(g, space=q.space).xi
        c = vecs[:, 0] @ q.M @ rot / (rot @ q.M @ rot)
        assert np.allclose(vecs[:, 0], c * rot, atol=1e-8)

    def test_configuration_a_unstable(self):
        g = configuration_a(0.3)
        w, _ = constrained_min_eigenvalue(assemble_index_form(g), 1)
        assert w[0] < -1e-3
        cert = boundary_three_component_certificate(g)
        assert cert["Q_value"] < 0 and cert["area_residual"] < 1e-12

    def test_hexagon_unstable(self):
        g = hexagon_graph()
        w, _ = constrained_min_eigenvalue(assemble_index_form(g), 1)
        assert w[0] < -1e-3
        rep = largest_pressure_component_bound(g)
        assert rep["nonhexagonal_components"] == 3 and not rep["satisfied"]
        assert rep["certificate"]["Q_value"] < 0
        assert rep["certificate"]["area_residual"] < 1e-12

    def test_interior_component_certificate_mechanics(self):
        # the seeded conf_i graph is not stationary, so only the construction is checked
        from diskpart.evolver import get_template, template_instantiate
        from diskpart.io import GraphDocument

        g = GraphDocument.from_discrete(template_instantiate(get_template("conf_i"), [math.pi / 3] * 3)).to_partition_graph()
        q = assemble_index_form(g, check=False)
        cert = two_interior_component_certificate(g, q)
        assert cert["kind"] == "congruent-interior-4-components" and cert["region"] == 0
        assert cert["area_residual"] < 1e-12
        a, b = (next(f for f in g.faces if f.id == k) for k in cert["support"])
        assert not a.touches_boundary and a.n_edges == b.n_edges == 4
        parts = q.value(face_indicator(q.space, a)) + q.value(face_indicator(q.space, b))
        assert cert["Q_value"] == pytest.approx(parts, rel=1e-9)
        assert two_interior_component_certificate(solve(AreaTargets.equal(3))) is None

    def test_standard_component_bound(self):
        rep = largest_pressure_component_bound(solve(AreaTargets((1.0, 1.2, math.pi - 2.2))))
        assert rep["nonhexagonal_components"] == 1
        assert rep["satisfied"] and rep["certificate"] is None


class TestNodal:
    def test_zero_function(self):
        g = solve(AreaTargets.equal(3))
        assert nodal_region_count(g, VariationSpace(g, 8).zero()).count == 0

    def test_configuration_c_has_four(self):
        g = square_configuration_c(0.5)
        rep = nodal_region_count(g, rotation_jacobi(g))
        assert rep.count >= 4
        assert not rep.vertex_flags

    def test_equal_standard_vertex_flagged(self):
        # u_rot = +-r on the three radii: it vanishes only at the junction
        g = solve(AreaTargets.equal(3))
        rep = nodal_region_count(g, rotation_jacobi(g))
        assert rep.degenerate and rep.vertex_flags == [0]
        assert rep.count == 3

    def test_report_json(self):
        rep = analyze(square_configuration_c(0.5), k=3, m=16)
        d = json.loads(json.dumps(rep.to_dict()))
        assert {"lambda_min", "modes", "constraint_rank", "certificates"} <= set(d)
        assert d["verdict"] == "unstable"
        assert d["nodal"]["count"] >= 4 and d["nodal"]["applies"]
