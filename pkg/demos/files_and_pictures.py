"""Write graph documents, SVG pictures and a profile table to a directory.

    python demos/files_and_pictures.py out/
"""

from __future__ import annotations

import argparse
import math
from pathlib import Path

from diskpart.evolver import get_template, relax, template_instantiate
from diskpart.io import GraphDocument, profile_csv, render_svg
from diskpart.solver import AreaTargets, profile_sweep, solve


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("out", type=Path)
    out = ap.parse_args().out
    out.mkdir(parents=True, exist_ok=True)

    doc = GraphDocument.from_partition_graph(solve(AreaTargets((1.5, 0.9, math.pi - 2.4))))
    (out / "standard.json").write_text(doc.dumps())
    (out / "standard.svg").write_text(render_svg(doc))

    g = template_instantiate(get_template("std6"), [math.pi / 6] * 6)
    r = relax(g)
    doc = GraphDocument.from_discrete(g, {"perimeter": r.perimeter})
    (out / "std6.json").write_text(doc.dumps())
    (out / "std6.svg").write_text(render_svg(doc))

    (out / "profile3.csv").write_text(profile_csv(profile_sweep(3, 11), 3))
    for p in sorted(out.iterdir()):
        print(p)


if __name__ == "__main__":
    main()
