from __future__ import annotations

import csv
import io
import itertools
import json
import math
import re

import numpy as np
import pytest

from diskpart import cli
from diskpart.evolver import get_template, relax, template_instantiate
from diskpart.instances import configuration_a, hexagon_graph
from diskpart.io import SCHEMA_VERSION, DocumentError, GraphDocument, render_svg
from diskpart.solver import AreaTargets, SolverError, solve
from diskpart.standard import check_stationary

THIRD = "1.0471975512"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def svg_arc_center(x1, y1, rx, large, sweep, x2, y2):
    """Centre of an SVG circular arc from its endpoint parameterization (SVG 1.1, F.6.5)."""
    mx, my = (x1 - x2) / 2, (y1 - y2) / 2
    r2 = rx * rx
    num = r2 * r2 - r2 * my * my - r2 * mx * mx
    coef = math.sqrt(max(num, 0.0) / (r2 * (mx * mx + my * my)))
    if large == sweep:
        coef = -coef
    cx_, cy_ = coef * my, -coef * mx
    return cx_ + (x1 + x2) / 2, cy_ + (y1 + y2) / 2


# -- documents --------------------------------------------------------------------------


def test_document_round_trip_is_lossless():
    g = solve(AreaTargets((1.9, 0.8, math.pi - 2.7))).transformed(0.3)
    doc = GraphDocument.from_partition_graph(g)
    text = doc.dumps()
    again = GraphDocument.loads(text)
    assert again.dumps() == text
    g2 = again.to_partition_graph()
    for e1, e2 in zip(g.edges, g2.edges):
        assert e1.arc == e2.arc and (e1.left, e1.right) == (e2.left, e2.right)
    r1, r2 = check_stationary(g).to_dict(), check_stationary(g2).to_dict()
    assert abs(r1["max_residual"] - r2["max_residual"]) < 1e-12


def test_instance_documents_round_trip():
    for g in (configuration_a(0.35), hexagon_graph()):
        doc = GraphDocument.from_partition_graph(g)
        g2 = GraphDocument.loads(doc.dumps()).to_partition_graph()
        assert g2.edges == g.edges
        assert [r.pressure for r in g2.regions] == [r.pressure for r in g.regions]


def test_polyline_document_round_trip():
    g = template_instantiate(get_template("conf_j"), (1.3, 0.8, math.pi - 2.1), n_pts=16)
    relax(g)
    doc = GraphDocument.from_discrete(g)
    text = doc.dumps()
    assert GraphDocument.loads(text).dumps() == text
    pg = doc.to_partition_graph()
    assert np.abs(pg.region_areas() - g.targets).max() < 1e-3
    assert "curvature_residuals" in pg.metadata


def test_schema_version_checked():
    doc = GraphDocument.from_partition_graph(solve(AreaTargets.equal(3)))
    d = json.loads(doc.dumps())
    d["schema_version"] = "0.9"
    with pytest.raises(DocumentError):
        GraphDocument.loads(json.dumps(d))
    del d["schema_version"]
    with pytest.raises(DocumentError):
        GraphDocument.loads(json.dumps(d))
    with pytest.raises(DocumentError):
        GraphDocument.loads("[1, 2]")
    assert GraphDocument.loads(doc.dumps()).schema_version == SCHEMA_VERSION


def test_malformed_edges_rejected():
    doc = GraphDocument.from_partition_graph(solve(AreaTargets.equal(3)))
    del doc.edges[0]["curvature"]
    with pytest.raises(DocumentError):
        doc.to_partition_graph()


# -- SVG --------------------------------------------------------------------------------


def test_svg_is_deterministic_and_structured():
    doc = GraphDocument.from_partition_graph(solve(AreaTargets((2.0, 1.0, math.pi - 3.0))))
    a, b = render_svg(doc), render_svg(GraphDocument.loads(doc.dumps()))
    assert a == b
    assert a.count("<path") == 3 + 1
    assert 'width="512"' in a and 'height="512"' in a
    assert len(re.findall(r"<text ", a)) == 3


def test_svg_arcs_have_the_right_centres():
    g = solve(AreaTargets((2.0, 1.0, math.pi - 3.0)))
    svg = render_svg(GraphDocument.from_partition_graph(g))
    for e in g.edges:
        m = re.search(rf'id="e{e.id}" d="M ([-\d.]+) ([-\d.]+) A ([\d.]+) [\d.]+ 0 (\d) (\d) ([-\d.]+) ([-\d.]+)"', svg)
        x1, y1, r, large, sweep, x2, y2 = (float(v) for v in m.groups())
        cx, cy = svg_arc_center(x1, y1, r, int(large), int(sweep), x2, y2)
        c = e.arc.center
        assert math.hypot(cx - (256 + 240 * c.x), cy - (256 - 240 * c.y)) < 1e-2


# -- CLI: solve -------------------------------------------------------------------------


def test_cli_solve_equal_areas(capsys):
    code, out, err = run(capsys, "solve", "--areas", ",".join([THIRD] * 3))
    assert code == 0
    doc = json.loads(out)
    assert abs(doc["metadata"]["perimeter"] - 3.0) < 1e-9
    assert "perimeter 3.0000" in err


def test_cli_solve_two_regions_is_a_diameter(capsys):
    code, out, _ = run(capsys, "solve", "--areas", "1.5707963268,1.5707963268")
    assert code == 0
    doc = json.loads(out)
    assert len(doc["edges"]) == 1 and abs(doc["edges"][0]["curvature"]) < 1e-9
    assert abs(doc["metadata"]["perimeter"] - 2.0) < 1e-9


def test_cli_solve_svg(capsys, tmp_path):
    svg = tmp_path / "out.svg"
    code, out, _ = run(capsys, "solve", "--areas", "2,1,0.1415926536", "--svg", str(svg))
    assert code == 0
    json.loads(out)
    assert svg.read_text().count("<path") == 3 + 1


def test_cli_invalid_areas_exit_2(capsys):
    code, out, err = run(capsys, "solve", "--areas", "1,1,1")
    assert code == 2 and out == "" and "normalize" in err
    code, _, _ = run(capsys, "solve", "--areas", "a,b")
    assert code == 2
    code, _, _ = run(capsys, "solve", "--areas", "1,1,1,1", "--normalize")
    assert code == 2
    code, _, _ = run(capsys, "solve", "--bogus")
    assert code == 2


def test_cli_normalize(capsys):
    code, out, _ = run(capsys, "solve", "--areas", "1,1,1", "--normalize")
    assert code == 0
    assert abs(json.loads(out)["metadata"]["perimeter"] - 3.0) < 1e-9


def test_cli_solver_failure_exit_3(capsys, monkeypatch):
    import diskpart.solver

    def boom(targets):
        raise SolverError("no bracket")

    monkeypatch.setattr(diskpart.solver, "solve", boom)
    code, out, err = run(capsys, "solve", "--areas", "equal", "--n", "3")
    assert code == 3 and out == "" and "no bracket" in err


# -- CLI: stability and check -----------------------------------------------------------


def test_cli_stability_standard_graph(capsys, tmp_path):
    path = tmp_path / "g.json"
    run(capsys, "solve", "--areas", "1.2,1.1,0.8415926536", "--json", str(path))
    code, out, _ = run(capsys, "stability", str(path))
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "stable" and rep["lambda_min"] >= -1e-6


@pytest.mark.parametrize(
    "template,kind", [("conf_a", "two-boundary-3-components"), ("hex", "largest-pressure-components")]
)
def test_cli_stability_certificates(capsys, tmp_path, template, kind):
    g = configuration_a(0.35) if template == "conf_a" else hexagon_graph()
    path = tmp_path / "g.json"
    path.write_text(GraphDocument.from_partition_graph(g).dumps())
    code, out, _ = run(capsys, "stability", str(path))
    rep = json.loads(out)
    assert code == 0 and rep["verdict"] == "unstable"
    assert kind in {c["kind"] for c in rep["certificates"]}


def test_cli_non_stationary_exit_4(capsys, tmp_path):
    doc = GraphDocument.from_partition_graph(solve(AreaTargets.equal(3)))
    doc.edges[0]["curvature"] = 0.3
    path = tmp_path / "bad.json"
    path.write_text(doc.dumps())
    code, out, _ = run(capsys, "stability", str(path))
    assert code == 4
    assert json.loads(out)["stationary"] is False
    code, out, _ = run(capsys, "check", str(path))
    assert code == 4 and json.loads(out)["max_residual"] > 1e-3


def test_cli_bad_document_exit_2(capsys, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text('{"schema_version": "2.0"}')
    assert run(capsys, "check", str(path))[0] == 2
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 2


# -- CLI: evolve ------------------------------------------------------------------------


def test_cli_evolve_conf_j(capsys, tmp_path):
    svg = tmp_path / "e.svg"
    code, out, _ = run(capsys, "evolve", "--template", "conf_j", "--areas", "equal", "--svg", str(svg))
    doc = json.loads(out)
    assert code == 0 and doc["converged"] and abs(doc["perimeter"] - 3.0) < 1e-3
    assert all("polyline" in e for e in doc["edges"])
    assert svg.read_text().count("<path") == 4


def test_cli_evolve_hex_and_std5(capsys):
    code, out, _ = run(capsys, "evolve", "--template", "hex", "--areas", "equal")
    assert code == 0 and json.loads(out)["perimeter"] > 3.0
    code, out, _ = run(capsys, "evolve", "--template", "std5", "--areas", "equal", "--n", "5")
    doc = json.loads(out)
    assert code == 0 and doc["converged"] and doc["perimeter"] < 5.0


def test_cli_evolve_topology_event_exit_5(capsys):
    code, out, err = run(capsys, "evolve", "--template", "conf_i", "--areas", "equal")
    assert code == 5
    payload = json.loads(out)
    assert payload["event"] == "edge-collapse" and payload["template"] == "conf_i"
    assert "collapsed" in err


def test_cli_evolve_input_errors(capsys):
    assert run(capsys, "evolve", "--template", "nope")[0] == 2
    assert run(capsys, "evolve", "--template", "std4", "--n", "3")[0] == 2


def test_cli_evolve_document_rechecks(capsys, tmp_path):
    path = tmp_path / "e.json"
    run(capsys, "evolve", "--template", "conf_j", "--areas", "1.3,0.8,1.0415926536", "--json", str(path))
    code, out, _ = run(capsys, "check", str(path), "--tol", "1e-2")
    assert code == 0 and json.loads(out)["stationary"]


# -- CLI: profile and compare -----------------------------------------------------------


def _rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_cli_profile_two_regions(capsys):
    code, out, _ = run(capsys, "profile", "--n", "2", "--grid", "11")
    rows = _rows(out)
    assert code == 0 and len(rows) == 9
    best = max(rows, key=lambda r: float(r["perimeter"]))
    assert abs(float(best["a1"]) - math.pi / 2) < 1e-12
    assert abs(float(best["perimeter"]) - 2.0) < 1e-9


def test_cli_profile_three_regions(capsys, tmp_path):
    path = tmp_path / "p.csv"
    code, out, _ = run(capsys, "profile", "--n", "3", "--grid", "11", "--csv", str(path))
    assert code == 0 and out == ""
    rows = _rows(path.read_text())
    assert all(r["error"] == "" and float(r["perimeter"]) <= 3.0 + 1e-12 for r in rows)
    table = {tuple(round(float(r[k]), 9) for k in ("a1", "a2", "a3")): float(r["perimeter"]) for r in rows}
    for key, val in table.items():
        for perm in itertools.permutations(key):
            if perm in table:
                assert abs(table[perm] - val) < 1e-9


def test_cli_compare_four_regions(capsys, tmp_path):
    path = tmp_path / "c.json"
    code, out, _ = run(capsys, "compare", "--n", "4", "--json", str(path))
    assert code == 0 and out.splitlines()[1].startswith("std4 ")
    ranking = json.loads(path.read_text())["ranking"]
    assert [r["template"] for r in ranking] == ["std4", "std4_alt"]
