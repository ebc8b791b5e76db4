"""Exact least-perimeter partitions for two and three regions."""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import brentq

from .graph import PartitionGraph
from .standard import (
    StandardGraph,
    TwoRegionSplitter,
    splitter_from_curvature,
    standard_from_height,
)

AREA_TOL = 1e-9
MIN_AREA = 1e-6


class SolverError(RuntimeError):
    def __init__(self, message: str, last_iterate=None):
        super().__init__(message)
        self.last_iterate = last_iterate


class DegenerateTargetsError(ValueError):
    """Some target area is below the degeneracy threshold."""


class AreaTargetsError(ValueError):
    pass


@dataclass(frozen=True)
class AreaTargets:
    a: tuple[float, ...]

    def __post_init__(self):
        if len(self.a) < 1:
            raise AreaTargetsError("at least one area is required")
        if any(not math.isfinite(x) or x <= 0 for x in self.a):
            raise AreaTargetsError("areas must be positive and finite")
        if abs(sum(self.a) - math.pi) > 1e-9:
            raise AreaTargetsError(f"areas sum to {sum(self.a)!r}, not pi")

    @classmethod
    def of(cls, areas: Sequence[float], normalize: bool = False) -> "AreaTargets":
        a = [float(x) for x in areas]
        if normalize:
            if any(not math.isfinite(x) or x <= 0 for x in a):
                raise AreaTargetsError("areas must be positive and finite")
            s = sum(a)
            a = [math.pi * x / s for x in a]
            # put the rounding residue on the largest entry
            k = int(np.argmax(a))
            a[k] += math.pi - sum(a)
        return cls(tuple(a))

    @classmethod
    def equal(cls, n: int) -> "AreaTargets":
        return cls.of([1.0] * n, normalize=True)

    @property
    def n(self) -> int:
        return len(self.a)

    def __iter__(self):
        return iter(self.a)

    def __getitem__(self, i):
        return self.a[i]


@dataclass
class ProfilePoint:
    areas: tuple[float, ...]
    perimeter: float
    graph: PartitionGraph | None
    error: str | None = None


def _check_degenerate(areas: Sequence[float]) -> None:
    small = [x for x in areas if x < MIN_AREA]
    if small:
        raise DegenerateTargetsError(f"target areas below {MIN_AREA:g}: {small}")


# ---------------------------------------------------------------------------
# two regions


def splitter_left_area(h: float) -> float:
    """Area on the left of the orthogonal splitter of curvature ``h``.

    Closed form: the lens between the chord x = -h/sqrt(1+h^2) and the
    circle arc, added to the circular segment of the unit disk.
    """
    if h == 0.0:
        return math.pi / 2
    # unit-disk segment left of the chord through the two endpoints
    s = math.sqrt(1.0 + h * h)
    alpha = math.atan2(1.0, -h)  # polar angle of the upper endpoint
    seg_disk = math.pi - alpha + 0.5 * math.sin(2 * alpha)  # disk area left of the chord
    # circular segment of the splitter circle cut by the same chord
    r = 1.0 / abs(h)
    beta = 2.0 * math.atan(abs(h))  # turning angle of the splitter: 2*atan(1/r)
    seg = 0.5 * r * r * (beta - math.sin(beta))
    # h > 0 bulges right (adds to the left side); h < 0 bulges left
    return seg_disk + (seg if h > 0 else -seg)


def solve_two_areas(a1: float, a2: float, max_steps: int = 200) -> TwoRegionSplitter:
    """Splitter with area ``a1`` on its left (region 1) and ``a2`` on its right."""
    if a1 <= 0 or a2 <= 0 or abs(a1 + a2 - math.pi) > 1e-9:
        raise AreaTargetsError("need a1, a2 > 0 with a1 + a2 = pi")
    _check_degenerate((a1, a2))
    if a1 == a2:
        return splitter_from_curvature(0.0)
    # area on the left decreases monotonically with h; bracket in u = asinh(h)
    g = lambda u: splitter_left_area(math.sinh(u)) - a1
    lo, hi = -1.0, 1.0
    steps = 0
    while g(lo) < 0:
        lo *= 2
        steps += 1
    while g(hi) > 0:
        hi *= 2
        steps += 1
        if steps > max_steps:
            raise SolverError("could not bracket the splitter curvature")
    u, info = brentq(g, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=max_steps, full_output=True)
    if not info.converged:
        raise SolverError("splitter curvature did not converge", math.sinh(u))
    return splitter_from_curvature(math.sinh(u))


# ---------------------------------------------------------------------------
# three regions


def _area3(h12: float, d: float) -> float:
    return float(standard_from_height(h12, d).region_areas()[2])


def _height_for_area3(h12: float, a3: float) -> float:
    """Half-plane height of the vertex giving region 3 the area ``a3``.

    The region grows monotonically with the height (nested regions).
    """
    f = lambda t: _area3(h12, math.exp(t)) - a3
    lo, hi = -1.0, 1.0
    for _ in range(200):
        if f(lo) < 0:
            break
        lo -= 2.0
    for _ in range(200):
        if f(hi) > 0:
            break
        hi += 2.0
    t = brentq(f, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=200)
    return math.exp(t)


def solve_three_areas(targets: AreaTargets | Sequence[float], h12_seed: float = 0.0) -> StandardGraph:
    """The standard graph with region areas ``targets`` (canonically placed).

    Outer search over the splitter curvature h12, inner search over the
    vertex height; both are bracketed monotone root finds.  ``h12_seed``
    only moves the starting bracket.
    """
    t = targets if isinstance(targets, AreaTargets) else AreaTargets.of(targets)
    if t.n != 3:
        raise AreaTargetsError("solve_three_areas needs exactly three areas")
    _check_degenerate(t.a)
    a1, a2, a3 = t.a

    def resid(u: float) -> float:
        h12 = math.sinh(u)
        d = _height_for_area3(h12, a3)
        return float(standard_from_height(h12, d).region_areas()[0] - a1)

    # region 1 shrinks as its pressure excess h12 grows
    u0 = math.asinh(h12_seed)
    lo, hi = u0 - 0.5, u0 + 0.5
    last = None
    try:
        for _ in range(60):
            last = lo
            if resid(lo) > 0:
                break
            lo -= 1.0
        for _ in range(60):
            last = hi
            if resid(hi) < 0:
                break
            hi += 1.0
        u = brentq(resid, lo, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps, maxiter=200)
    except (ValueError, RuntimeError) as exc:
        raise SolverError(f"three-area solve failed: {exc}", last) from exc
    h12 = math.sinh(u)
    g = standard_from_height(h12, _height_for_area3(h12, a3))
    err = np.max(np.abs(g.region_areas() - np.array(t.a)))
    if err > AREA_TOL:
        raise SolverError(f"area residual {err:.3g} above tolerance", g)
    return g


def radii_upper_bound(targets: AreaTargets | Sequence[float]) -> float:
    """Length of n radii cutting sectors of the given areas: always n."""
    t = targets if isinstance(targets, AreaTargets) else AreaTargets.of(targets)
    return float(t.n)


def solve(targets: AreaTargets | Sequence[float]) -> PartitionGraph:
    t = targets if isinstance(targets, AreaTargets) else AreaTargets.of(targets)
    if t.n == 1:
        from .graph import Region

        return PartitionGraph((), (), (Region(0, math.pi, 0.0),), {"kind": "disk"})
    if t.n == 2:
        g = solve_two_areas(*t.a).to_partition_graph()
    elif t.n == 3:
        g = solve_three_areas(t).to_partition_graph(list(t.a))
    else:
        raise AreaTargetsError("exact solutions exist only for n <= 3")
    from .graph import Region

    regions = tuple(Region(r.id, t.a[r.id], r.pressure) for r in g.regions)
    return PartitionGraph(g.vertices, g.edges, regions, g.metadata)


# ---------------------------------------------------------------------------
# profile


def simplex_grid(n: int, grid: int) -> list[tuple[float, ...]]:
    """Interior points of the area simplex with spacing pi/(grid-1).

    For n = 3 the barycenter is appended when it is not a grid node, so
    the equal-areas maximum is always sampled.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    m = grid - 1
    pts = []
    for ks in itertools.product(range(1, m), repeat=n - 1):
        last = m - sum(ks)
        if last >= 1:
            pts.append(tuple(math.pi * k / m for k in ks) + (math.pi * last / m,))
    if n == 3 and m % 3 != 0:
        pts.append((math.pi / 3,) * 3)
    return pts


def _profile_point(n: int, areas: tuple[float, ...], with_graph: bool) -> ProfilePoint:
    try:
        a = list(areas)
        a[-1] = math.pi - sum(a[:-1])
        g = solve(AreaTargets(tuple(a)))
        return ProfilePoint(tuple(a), g.length, g if with_graph else None)
    except Exception as exc:  # recorded per point, the sweep continues
        return ProfilePoint(tuple(areas), math.nan, None, f"{type(exc).__name__}: {exc}")


def profile_sweep(n: int, grid: int, with_graphs: bool = False, workers: int = 1) -> list[ProfilePoint]:
    """Exact least perimeter over the interior simplex grid, in grid order."""
    if n not in (2, 3):
        raise ValueError("profile_sweep supports n = 2 or 3")
    pts = simplex_grid(n, grid)
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            return list(ex.map(lambda p: _profile_point(n, p, with_graphs), pts))
    return [_profile_point(n, p, with_graphs) for p in pts]
