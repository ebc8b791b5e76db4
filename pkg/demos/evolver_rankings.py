"""Rank the relaxed candidate topologies for n = 3..6 equal areas.

For n = 3 the ten configurations (a)-(j) are relaxed; the standard graph
(conf_j) should come first and match the exact solver.  For n = 4, 5, 6 the
conjectured minimizer is compared with its alternates.

    python demos/evolver_rankings.py [--workers 4]
"""

from __future__ import annotations

import argparse
import math

from diskpart.evolver import CONJECTURES, aligned_hausdorff, compare_candidates, get_template, relax, template_instantiate
from diskpart.solver import solve_three_areas


def show(n: int, results) -> None:
    print(f"n = {n}, equal areas (I <= {n})")
    for r in results:
        per = "-" if r.perimeter is None else f"{r.perimeter:.6f}"
        print(f"  {r.name:12s} {per:>10s}  {r.status}")


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--workers", type=int, default=1)
    args = ap.parse_args()

    areas = [math.pi / 3] * 3
    show(3, compare_candidates(areas, workers=args.workers))
    g = template_instantiate(get_template("conf_j"), areas, n_pts=64)
    relax(g)
    d, _, _ = aligned_hausdorff(g, solve_three_areas(areas))
    print(f"  conf_j vs exact solver: Hausdorff {d:.2e}")
    for n, (best, alts) in CONJECTURES.items():
        show(n, compare_candidates([math.pi / n] * n, [get_template(x) for x in (best, *alts)], workers=args.workers))


if __name__ == "__main__":
    main()
