from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from diskpart.geometry import arc_polygon_area, boundary_arcs
from diskpart.graph import hausdorff
from diskpart.solver import (
    AreaTargets,
    AreaTargetsError,
    DegenerateTargetsError,
    profile_sweep,
    radii_upper_bound,
    simplex_grid,
    solve,
    solve_three_areas,
    solve_two_areas,
    splitter_left_area,
)
from diskpart.standard import splitter_from_curvature, vertex_height
from oracles import quadrature_splitter_area, shooting_standard

# Frozen from the independent oracles in tests/oracles.py: dense-quadrature
# root find for the splitter, and the shooting construction for three areas.
SPLITTER_3PI4_H = -0.6908968471358
SPLITTER_3PI4_LENGTH = 1.7501608378251
THREE_AREA_LENGTHS = {
    (math.pi / 2, math.pi / 4, math.pi / 4): 2.9019736015728,
    (1.2, 1.0, math.pi - 2.2): 2.9909668426864,
    (0.5, 1.0, math.pi - 1.5): 2.8265867615749,
}


def _random_triple(rng):
    w = rng.dirichlet([2.0, 2.0, 2.0])
    return AreaTargets.of(w, normalize=True)


class TestTargets:
    def test_sum_checked(self):
        with pytest.raises(AreaTargetsError):
            AreaTargets((1.0, 1.0))

    def test_positive(self):
        with pytest.raises(AreaTargetsError):
            AreaTargets.of([-1.0, 1.0], normalize=True)

    def test_normalize(self):
        t = AreaTargets.of([1, 2, 3], normalize=True)
        assert sum(t) == pytest.approx(math.pi, abs=1e-15)
        assert t[2] == pytest.approx(math.pi / 2)

    def test_degenerate(self):
        with pytest.raises(DegenerateTargetsError):
            solve_three_areas((math.pi - 1.0 - 1e-7, 1.0, 1e-7))


class TestTwoAreas:
    def test_diameter(self):
        s = solve_two_areas(math.pi / 2, math.pi / 2)
        assert s.h == 0.0
        assert s.length == pytest.approx(2.0, abs=1e-12)

    def test_small_cap(self):
        s = solve_two_areas(math.pi - 1e-3, 1e-3)
        assert s.length < 0.2
        assert s.region_areas()[1] == pytest.approx(1e-3, abs=1e-12)
        assert quadrature_splitter_area(s.h) == pytest.approx(math.pi - 1e-3, abs=1e-9)

    def test_frozen_oracle(self):
        s = solve_two_areas(3 * math.pi / 4, math.pi / 4)
        assert s.h == pytest.approx(SPLITTER_3PI4_H, abs=1e-9)
        assert s.length == pytest.approx(SPLITTER_3PI4_LENGTH, abs=1e-9)

    def test_brute_force_scan(self):
        hs = np.linspace(-2.0, 0.0, 100_001)
        best, best_err = None, math.inf
        for h in hs:
            e = splitter_from_curvature(h).edge
            th0 = math.atan2(e.p0.y, e.p0.x)
            th1 = math.atan2(e.p1.y, e.p1.x)
            err = abs(arc_polygon_area([e] + boundary_arcs(th1, th0)) - 3 * math.pi / 4)
            if err < best_err:
                best, best_err = h, err
        s = solve_two_areas(3 * math.pi / 4, math.pi / 4)
        assert abs(s.h - best) <= 2e-5
        assert s.length == pytest.approx(splitter_from_curvature(best).length, abs=1e-4)

    def test_closed_form_matches_polygon_area(self):
        for h in np.linspace(-5, 5, 41):
            assert splitter_left_area(h) == pytest.approx(splitter_from_curvature(h).region_areas()[0], abs=1e-13)

    @settings(max_examples=40, deadline=None)
    @given(st.floats(0.01, math.pi - 0.01))
    def test_areas_and_bound(self, a1):
        s = solve_two_areas(a1, math.pi - a1)
        assert s.region_areas()[0] == pytest.approx(a1, abs=1e-9)
        assert s.length <= 2.0 + 1e-12
        assert s.length <= radii_upper_bound((a1, math.pi - a1))

    def test_bad_input(self):
        with pytest.raises(AreaTargetsError):
            solve_two_areas(1.0, 1.0)


class TestThreeAreas:
    def test_equal_areas(self):
        g = solve_three_areas(AreaTargets.equal(3))
        assert g.length == pytest.approx(3.0, abs=1e-9)
        assert max(abs(h) for h in g.curvatures) < 1e-9

    @pytest.mark.parametrize("areas", list(THREE_AREA_LENGTHS))
    def test_frozen_oracle(self, areas):
        g = solve_three_areas(areas)
        assert g.length == pytest.approx(THREE_AREA_LENGTHS[areas], abs=1e-8)
        assert np.abs(g.region_areas() - np.array(areas)).max() < 1e-9

    def test_live_shooting_oracle(self):
        areas = (0.8, 1.3, math.pi - 2.1)
        arcs, third_orth, res = shooting_standard(areas)
        assert res < 1e-8 and third_orth < 1e-8
        assert solve_three_areas(areas).length == pytest.approx(sum(a.length for a in arcs), abs=1e-7)

    def test_canonical_placement(self):
        g = solve_three_areas((1.0, 0.9, math.pi - 1.9))
        c12 = g.edges[0]
        # C12 starts at the lower end of the splitter symmetric about the x-axis
        s = splitter_from_curvature(c12.h)
        assert c12.p0.dist(s.edge.p0) < 1e-12
        vertex_height(s, g.interior_vertex)  # raises unless the vertex is on the splitter

    def test_permutation_gives_congruent_graphs(self):
        a = 0.7
        base = solve(AreaTargets((a, a, math.pi - 2 * a)))
        other = solve(AreaTargets((math.pi - 2 * a, a, a)))
        assert base.length == pytest.approx(other.length, abs=1e-9)
        pa = base.sample_points(200)
        best = min(
            hausdorff(pa, other.transformed(th, refl).sample_points(200))
            for th in np.linspace(0, 2 * math.pi, 721)
            for refl in (False, True)
        )
        assert best < 2e-2  # limited by the rotation grid
        # exact: the sorted edge lengths coincide
        la = sorted(e.arc.length for e in base.edges)
        lb = sorted(e.arc.length for e in other.edges)
        assert np.allclose(la, lb, atol=1e-9)

    def test_seed_independence(self):
        rng = np.random.default_rng(11)
        t = _random_triple(rng)
        ref = solve_three_areas(t).to_partition_graph().sample_points(300)
        for seed in rng.uniform(-5, 5, 3):
            g = solve_three_areas(t, h12_seed=float(seed)).to_partition_graph().sample_points(300)
            assert hausdorff(ref, g) < 1e-6

    def test_continuity_to_two_regions(self):
        a1 = 1.0
        two = solve_two_areas(a1, math.pi - a1).length
        diffs = []
        for a3 in (1e-2, 1e-3, 1e-4):
            g = solve_three_areas((a1, math.pi - a1 - a3, a3))
            diffs.append(g.length - two)
        assert all(d > 0 for d in diffs)
        assert diffs[0] > diffs[1] > diffs[2]
        assert diffs[2] < 0.05

    @settings(max_examples=15, deadline=None)
    @given(st.floats(0.2, 1.4), st.floats(0.2, 1.4))
    def test_residuals_and_bound(self, a1, a2):
        t = AreaTargets((a1, a2, math.pi - a1 - a2))
        g = solve_three_areas(t)
        assert np.abs(g.region_areas() - np.array(t.a)).max() < 1e-9
        assert g.length <= 3.0 + 1e-9

    def test_solve_dispatch(self):
        assert solve(AreaTargets.equal(1)).length == 0.0
        assert solve(AreaTargets.equal(2)).length == pytest.approx(2.0)
        with pytest.raises(AreaTargetsError):
            solve(AreaTargets.equal(4))


class TestProfile:
    def test_grid_points(self):
        pts = simplex_grid(3, 11)
        assert all(min(p) > 0 and sum(p) == pytest.approx(math.pi) for p in pts)
        assert (math.pi / 3,) * 3 in pts
        assert len(simplex_grid(2, 11)) == 9

    def test_two_regions_symmetric(self):
        prof = profile_sweep(2, 11)
        vals = [p.perimeter for p in prof]
        assert np.allclose(vals, vals[::-1], atol=1e-9)
        assert max(vals) == pytest.approx(2.0)

    def test_three_regions_bound(self):
        prof = profile_sweep(3, 11)
        vals = np.array([p.perimeter for p in prof])
        assert np.all(vals <= 3.0 + 1e-9)
        k = int(np.argmax(vals))
        assert prof[k].areas == pytest.approx((math.pi / 3,) * 3)
        assert vals[k] == pytest.approx(3.0, abs=1e-9)

    def test_permutation_symmetric(self):
        prof = {tuple(round(x, 9) for x in p.areas): p.perimeter for p in profile_sweep(3, 8)}
        for a, v in prof.items():
            for perm in ((a[1], a[0], a[2]), (a[2], a[1], a[0])):
                assert prof[perm] == pytest.approx(v, abs=1e-9)

    def test_parallel_matches_sequential(self):
        a = profile_sweep(3, 7)
        b = profile_sweep(3, 7, workers=4)
        assert [p.areas for p in a] == [p.areas for p in b]
        assert [p.perimeter for p in a] == [p.perimeter for p in b]

    def test_bad_grid(self):
        with pytest.raises(ValueError):
            profile_sweep(3, 1)
