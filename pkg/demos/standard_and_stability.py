"""Exact standard graphs and their second-variation spectrum.

Solves a few area triples, prints perimeter and pressures, then compares the
lowest area-preserving eigenvalue of the standard graph with the exact
unstable instances (configuration (a), the hex graph, configuration (c)).

    python demos/standard_and_stability.py
"""

from __future__ import annotations

import math

from diskpart.instances import configuration_a, hexagon_graph, square_configuration_c
from diskpart.solver import AreaTargets, solve
from diskpart.stability import analyze


def main() -> None:
    print("standard graphs")
    for areas in [(math.pi / 3,) * 3, (1.2, 1.0, math.pi - 2.2), (0.4, 1.7, math.pi - 2.1), (math.pi / 2,) * 2]:
        g = solve(AreaTargets(areas))
        rep = analyze(g, k=2)
        p = ", ".join(f"{x:+.4f}" for x in g.pressures())
        print(f"  areas {tuple(round(a, 4) for a in areas)}  perimeter {g.length:.6f}  pressures [{p}]  "
              f"lambda_min {rep.lambda_min:+.2e}  {rep.verdict}")
    print("exact stationary instances")
    for name, g in [("conf_a", configuration_a(0.35)), ("hex", hexagon_graph()), ("conf_c", square_configuration_c(0.45))]:
        rep = analyze(g, k=2)
        kinds = ", ".join(f"{c['kind']} Q={c['Q_value']:.3f}" for c in rep.certificates) or "none"
        print(f"  {name:7s} lambda_min {rep.lambda_min:+.3f}  {rep.verdict:8s} certificates: {kinds}")


if __name__ == "__main__":
    main()
