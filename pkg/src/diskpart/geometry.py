"""Circular arcs, arc-bounded polygons and Moebius maps of the unit disk.

Arcs are stored as ``(p0, p1, h)`` with ``h`` the signed curvature measured
against the left normal of the ``p0 -> p1`` direction.  ``h > 0`` means the
arc turns left, so its center lies on the left of the chord.  Only minor
arcs (turning angle at most pi) are representable; longer boundary arcs are
split with :func:`boundary_arcs`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

TOL_GEOM = 1e-9
STRAIGHT_EPS = 1e-10


class GeometryError(ValueError):
    """Raised when a geometric precondition does not hold."""


class TopologyError(GeometryError):
    """Raised when a cycle of edges fails to close."""


class PoleError(GeometryError):
    """Raised when an arc passes through the pole of a Moebius map."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise GeometryError(f"non-finite point ({self.x}, {self.y})")

    @classmethod
    def disk(cls, x: float, y: float) -> "Point":
        """Point of the closed unit disk (checked)."""
        if x * x + y * y > 1.0 + TOL_GEOM:
            raise GeometryError(f"({x}, {y}) lies outside the unit disk")
        return cls(float(x), float(y))

    @classmethod
    def polar(cls, r: float, theta: float) -> "Point":
        return cls(r * math.cos(theta), r * math.sin(theta))

    @property
    def xy(self) -> np.ndarray:
        return np.array([self.x, self.y])

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def rotated(self, angle: float) -> "Point":
        c, s = math.cos(angle), math.sin(angle)
        return Point(c * self.x - s * self.y, s * self.x + c * self.y)

    def dist(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


def as_point(p) -> Point:
    if isinstance(p, Point):
        return p
    if isinstance(p, complex):
        return Point(p.real, p.imag)
    return Point(float(p[0]), float(p[1]))


def _rot90(v: np.ndarray) -> np.ndarray:
    return np.array([-v[1], v[0]])


@dataclass(frozen=True)
class ArcEdge:
    p0: Point
    p1: Point
    h: float = 0.0

    def __post_init__(self):
        chord = self.p0.dist(self.p1)
        if chord == 0.0:
            raise GeometryError("arc endpoints coincide")
        if not math.isfinite(self.h):
            raise GeometryError("non-finite curvature")
        if abs(self.h) * chord / 2.0 > 1.0 + TOL_GEOM:
            raise GeometryError(
                f"chord {chord:.6g} does not fit a circle of curvature {self.h:.6g}"
            )

    @property
    def is_straight(self) -> bool:
        return abs(self.h) < STRAIGHT_EPS

    @property
    def chord(self) -> float:
        return self.p0.dist(self.p1)

    @property
    def half_angle(self) -> float:
        """Half of the turning angle, |h| * length / 2."""
        if self.is_straight:
            return 0.0
        return math.asin(min(1.0, abs(self.h) * self.chord / 2.0))

    @property
    def turning(self) -> float:
        """Signed total turning h * length."""
        return math.copysign(2.0 * self.half_angle, self.h) if not self.is_straight else 0.0

    @property
    def length(self) -> float:
        return arc_length(self)

    @property
    def radius(self) -> float:
        return math.inf if self.is_straight else 1.0 / abs(self.h)

    @property
    def center(self) -> Point | None:
        if self.is_straight:
            return None
        a, b = self.p0.xy, self.p1.xy
        c = self.chord
        mid = 0.5 * (a + b)
        left = _rot90((b - a) / c)
        r = 1.0 / abs(self.h)
        off = math.sqrt(max(r * r - c * c / 4.0, 0.0))
        return as_point(mid + math.copysign(off, self.h) * left)

    @property
    def start_angle(self) -> float:
        """Direction of the unit tangent at p0."""
        d = self.p1.xy - self.p0.xy
        return math.atan2(d[1], d[0]) - 0.5 * self.turning

    def reversed(self) -> "ArcEdge":
        return ArcEdge(self.p1, self.p0, -self.h)

    def point_at(self, s) -> np.ndarray:
        """Point(s) at arc length ``s`` from p0; returns shape (..., 2)."""
        s = np.asarray(s, dtype=float)
        th0 = self.start_angle
        x0, y0 = self.p0.x, self.p0.y
        h = 0.0 if self.is_straight else self.h
        # chord of length s sinc(hs/2) at the mean tangent angle: no cancellation as h -> 0
        chord = s * np.sinc(h * s / (2 * math.pi))
        mid = th0 + 0.5 * h * s
        return np.stack([x0 + chord * np.cos(mid), y0 + chord * np.sin(mid)], axis=-1)

    def tangent_at(self, s) -> np.ndarray:
        s = np.asarray(s, dtype=float)
        th = self.start_angle + self.h * s
        return np.stack([np.cos(th), np.sin(th)], axis=-1)

    def normal_at(self, s) -> np.ndarray:
        """Left unit normal (the direction ``h`` is measured against)."""
        t = self.tangent_at(s)
        return np.stack([-t[..., 1], t[..., 0]], axis=-1)

    def sample(self, n: int) -> np.ndarray:
        """``n`` points equally spaced in arc length, endpoints included."""
        pts = self.point_at(np.linspace(0.0, self.length, n))
        pts[0] = self.p0.xy
        pts[-1] = self.p1.xy
        return pts

    def rotated(self, angle: float) -> "ArcEdge":
        return ArcEdge(self.p0.rotated(angle), self.p1.rotated(angle), self.h)

    def reflected(self) -> "ArcEdge":
        """Mirror image in the x-axis (orientation kept, curvature flips)."""
        return ArcEdge(Point(self.p0.x, -self.p0.y), Point(self.p1.x, -self.p1.y), -self.h)


def arc_length(e: ArcEdge) -> float:
    c = e.chord
    if e.is_straight:
        return c
    return 2.0 * math.asin(min(1.0, abs(e.h) * c / 2.0)) / abs(e.h)


def signed_area_contribution(e: ArcEdge) -> float:
    """Green's-theorem term 1/2 * integral of (x dy - y dx) along ``e``."""
    a, b = e.p0, e.p1
    shoelace = 0.5 * (a.x * b.y - b.x * a.y)
    if e.is_straight:
        return shoelace
    delta = e.turning
    if abs(delta) < 1e-4:
        # (delta - sin delta) / (2 h^2) for small delta
        seg = delta**3 / 12.0 * (1.0 - delta**2 / 20.0) / (e.h * e.h)
    else:
        seg = (delta - math.sin(delta)) / (2.0 * e.h * e.h)
    return shoelace + seg


def unit_circle_arc(theta0: float, theta1: float) -> ArcEdge:
    """Counterclockwise arc of the unit circle from theta0 to theta1 (sweep <= pi)."""
    return ArcEdge(Point.polar(1.0, theta0), Point.polar(1.0, theta1), 1.0)


def boundary_arcs(theta0: float, theta1: float, max_sweep: float = math.pi / 2) -> list[ArcEdge]:
    """Counterclockwise boundary path from theta0 to theta1 split into minor arcs."""
    sweep = (theta1 - theta0) % (2.0 * math.pi)
    if sweep == 0.0:
        sweep = 2.0 * math.pi
    k = max(1, math.ceil(sweep / max_sweep - 1e-12))
    ts = theta0 + sweep * np.arange(k + 1) / k
    arcs = [unit_circle_arc(ts[i], ts[i + 1]) for i in range(k)]
    # pin exact endpoints so consecutive pieces share identical points
    if k > 1:
        arcs[0] = ArcEdge(Point.polar(1.0, theta0), arcs[0].p1, 1.0)
        arcs[-1] = ArcEdge(arcs[-1].p0, Point.polar(1.0, theta1), 1.0)
    return arcs


@dataclass(frozen=True)
class ArcPolygon:
    edges: tuple[ArcEdge, ...]

    def __post_init__(self):
        n = len(self.edges)
        if n == 0:
            raise TopologyError("empty cycle")
        for i, e in enumerate(self.edges):
            nxt = self.edges[(i + 1) % n]
            if e.p1.dist(nxt.p0) > 1e3 * TOL_GEOM:
                raise TopologyError(f"edge {i} does not meet edge {(i + 1) % n}")

    @property
    def perimeter(self) -> float:
        return sum(arc_length(e) for e in self.edges)


def arc_polygon_area(poly: ArcPolygon | Sequence[ArcEdge]) -> float:
    """Area enclosed by a counterclockwise cycle of arcs."""
    if not isinstance(poly, ArcPolygon):
        poly = ArcPolygon(tuple(poly))
    return sum(signed_area_contribution(e) for e in poly.edges)


@dataclass(frozen=True)
class MobiusMap:
    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        if abs(self.a * self.d - self.b * self.c) < 1e-300:
            raise GeometryError("degenerate Moebius map (ad - bc = 0)")

    @property
    def pole(self) -> complex | None:
        if self.c == 0:
            return None
        return -self.d / self.c

    def __call__(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * z + self.b) / (self.c * z + self.d)

    def inverse(self) -> "MobiusMap":
        return MobiusMap(self.d, -self.b, -self.c, self.a)

    def derivative(self, z):
        z = np.asarray(z, dtype=complex)
        return (self.a * self.d - self.b * self.c) / (self.c * z + self.d) ** 2

    @classmethod
    def identity(cls) -> "MobiusMap":
        return cls(1, 0, 0, 1)


def disk_to_halfplane(q) -> MobiusMap:
    """The map z -> i(z + q)/(q - z): disk onto the upper half-plane, q to infinity."""
    qz = as_point(q).z
    if abs(abs(qz) - 1.0) > TOL_GEOM:
        raise GeometryError(f"|q| = {abs(qz)!r} is not on the unit circle")
    return MobiusMap(1j, 1j * qz, -1.0, qz)


@dataclass(frozen=True)
class CircleImage:
    """Image of an arc: an arc of a circle or a piece of a straight line.

    ``curvature`` is signed against the left normal of the start -> end
    traversal, matching :class:`ArcEdge`.
    """

    start: complex
    mid: complex
    end: complex
    curvature: float
    center: complex | None
    radius: float

    @property
    def is_line(self) -> bool:
        return self.center is None

    def tangent_at_start(self) -> complex:
        if self.is_line:
            t = self.mid - self.start
        else:
            r = self.start - self.center
            t = r * 1j * math.copysign(1.0, self.curvature)
        return t / abs(t)

    def tangent_at_end(self) -> complex:
        if self.is_line:
            t = self.end - self.mid
        else:
            r = self.end - self.center
            t = r * 1j * math.copysign(1.0, self.curvature)
        return t / abs(t)

    def as_arc(self) -> ArcEdge:
        if not self.is_line and abs(self.curvature) * abs(self.end - self.start) / 2 > 1 + TOL_GEOM:
            raise GeometryError("image is not a minor arc")
        # the mid point must be on the minor side for an ArcEdge
        if not self.is_line:
            chord = self.end - self.start
            side = (np.conj(chord) * (self.mid - self.start)).imag
            if side * self.curvature > 0:
                raise GeometryError("image is a major arc")
        return ArcEdge(as_point(self.start), as_point(self.end), self.curvature)


def circle_through(z0: complex, z1: complex, z2: complex) -> CircleImage:
    """Oriented circle (or line) through three points traversed z0 -> z1 -> z2."""
    a, b = z1 - z0, z2 - z1
    cross = (np.conj(a) * b).imag
    scale = abs(a) * abs(b) * abs(z2 - z0)
    if scale == 0.0:
        raise GeometryError("repeated points")
    curvature = 2.0 * cross / scale
    if abs(curvature) < STRAIGHT_EPS:
        return CircleImage(z0, z1, z2, 0.0, None, math.inf)
    # circumcenter
    d = 2.0 * (z0.real * (z1.imag - z2.imag) + z1.real * (z2.imag - z0.imag) + z2.real * (z0.imag - z1.imag))
    s0, s1, s2 = abs(z0) ** 2, abs(z1) ** 2, abs(z2) ** 2
    ux = (s0 * (z1.imag - z2.imag) + s1 * (z2.imag - z0.imag) + s2 * (z0.imag - z1.imag)) / d
    uy = (s0 * (z2.real - z1.real) + s1 * (z0.real - z2.real) + s2 * (z1.real - z0.real)) / d
    c = complex(ux, uy)
    return CircleImage(z0, z1, z2, float(curvature), c, abs(z0 - c))


def mobius_image_arc(m: MobiusMap, e: ArcEdge) -> CircleImage:
    """Image of ``e`` under ``m`` via the circle through three image points."""
    pole = m.pole
    if pole is not None:
        pts = e.sample(257)
        if np.min(np.abs(pts[:, 0] + 1j * pts[:, 1] - pole)) < 1e-7 or _passes_through(e, pole):
            raise PoleError("arc passes through the pole of the map")
    mid = e.point_at(0.5 * e.length)
    w0, w1, w2 = (complex(v) for v in m(np.array([e.p0.z, complex(mid[0], mid[1]), e.p1.z])))
    return circle_through(w0, w1, w2)


def _passes_through(e: ArcEdge, z: complex) -> bool:
    p = Point(z.real, z.imag)
    if e.is_straight:
        a, b = e.p0.xy, e.p1.xy
        t = np.dot(p.xy - a, b - a) / np.dot(b - a, b - a)
        if not 0.0 <= t <= 1.0:
            return False
        return float(np.linalg.norm(a + t * (b - a) - p.xy)) < TOL_GEOM
    c = e.center
    if abs(c.dist(p) - e.radius) > TOL_GEOM * max(1.0, e.radius):
        return False
    # on the supporting circle: check it lies on the drawn portion
    ang = lambda q: math.atan2(q.y - c.y, q.x - c.x)
    a0, a1, ap = ang(e.p0), ang(e.p1), ang(p)
    sweep = e.turning
    rel = (ap - a0) % (2 * math.pi) if sweep > 0 else (a0 - ap) % (2 * math.pi)
    return rel <= abs(sweep) + 1e-12


def intersection_angle(t1: complex | np.ndarray, t2: complex | np.ndarray) -> float:
    """Unsigned angle in [0, pi] between two tangent directions."""
    if not isinstance(t1, complex):
        t1 = complex(t1[0], t1[1])
    if not isinstance(t2, complex):
        t2 = complex(t2[0], t2[1])
    return abs(math.atan2((np.conj(t1) * t2).imag, (np.conj(t1) * t2).real))


def _boundary_endpoint(e: ArcEdge) -> tuple[float, np.ndarray, np.ndarray]:
    """Arc-length position, point and tangent at the endpoint lying on the unit circle."""
    d0 = abs(e.p0.norm - 1.0)
    d1 = abs(e.p1.norm - 1.0)
    if min(d0, d1) > TOL_GEOM:
        raise GeometryError("no endpoint of the arc lies on the unit circle")
    s = 0.0 if d0 <= d1 else e.length
    p = e.p0.xy if d0 <= d1 else e.p1.xy
    return s, p, e.tangent_at(s)


def meets_unit_circle_orthogonally(e: ArcEdge) -> float:
    """|angle(tangent, boundary tangent) - pi/2| at the boundary endpoint."""
    _, p, t = _boundary_endpoint(e)
    tau = _rot90(p / np.linalg.norm(p))
    c = min(1.0, abs(float(np.dot(t, tau))))
    return math.asin(c)


def orthogonal_circle_center(h: float, direction: float = 0.0) -> Point:
    """Center of the circle of curvature ``h`` orthogonal to the unit circle.

    The center lies at distance sqrt(1 + 1/h^2) along ``direction``.
    """
    if abs(h) < STRAIGHT_EPS:
        raise GeometryError("a line has no center")
    return Point.polar(math.sqrt(1.0 + 1.0 / (h * h)), direction)


def cocircular(e1: ArcEdge, e2: ArcEdge, tol: float = TOL_GEOM) -> bool:
    """True when both edges lie on a common circle (or a common line)."""
    if e1.is_straight != e2.is_straight:
        return False
    if e1.is_straight:
        a, b = e1.p0.xy, e1.p1.xy
        n = _rot90((b - a) / np.linalg.norm(b - a))
        return all(abs(float(np.dot(q - a, n))) < tol for q in (e2.p0.xy, e2.p1.xy))
    c1, c2 = e1.center, e2.center
    return c1.dist(c2) < tol * max(1.0, e1.radius) and abs(e1.radius - e2.radius) < tol * max(1.0, e1.radius)
