"""Deposited-metal footprints for (double-)oblique evaporation through a bilayer resist.

Two routes are provided and kept independent of each other:

* a general convex-polygon engine (``project_footprint`` / ``junction_overlap``)
  that translates an opening by the shadow displacement and intersects;
* the closed-form narrowed linewidth of a long line opening
  (``narrowed_linewidth``).

Lengths are micrometers, angles are degrees at the interface.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from shadowfab.errors import DomainError

TOL = 1e-9  # absolute tolerance for polygon predicates, micrometers

CONVENTIONS = ("paper", "complement")

Point = tuple[float, float]


class _FullyShadowed:
    """Marker for a line segment that receives no metal at all."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "FULLY_SHADOWED"

    def __reduce__(self):
        return (_FullyShadowed, ())


FULLY_SHADOWED = _FullyShadowed()


def _cross(o: Point, a: Point, b: Point) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _signed_area(pts: Sequence[Point]) -> float:
    n = len(pts)
    s = 0.0
    for i in range(n):
        x0, y0 = pts[i]
        x1, y1 = pts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def _cleanup(pts: Iterable[Point], tol: float = TOL) -> list[Point]:
    """Drop repeated and collinear vertices of a closed ring."""
    ring: list[Point] = []
    for p in pts:
        p = (float(p[0]), float(p[1]))
        if ring and math.dist(ring[-1], p) <= tol:
            continue
        ring.append(p)
    while len(ring) > 1 and math.dist(ring[0], ring[-1]) <= tol:
        ring.pop()

    changed = True
    while changed and len(ring) >= 3:
        changed = False
        for i in range(len(ring)):
            prev, cur, nxt = ring[i - 1], ring[i], ring[(i + 1) % len(ring)]
            base = math.dist(prev, nxt)
            if base <= tol or abs(_cross(prev, cur, nxt)) / base <= tol:
                del ring[i]
                changed = True
                break
    return ring


@dataclass(frozen=True)
class Polygon:
    """Strictly convex polygon with counter-clockwise vertices (micrometers)."""

    vertices: tuple[Point, ...]

    def __post_init__(self):
        verts = tuple((float(x), float(y)) for x, y in self.vertices)
        object.__setattr__(self, "vertices", verts)
        n = len(verts)
        if n < 3:
            raise DomainError(f"polygon needs at least 3 vertices, got {n}")
        if not all(math.isfinite(c) for v in verts for c in v):
            raise DomainError("polygon vertices must be finite")
        for i in range(n):
            for j in range(i + 1, n):
                if math.dist(verts[i], verts[j]) <= TOL:
                    raise DomainError(f"repeated vertex {verts[i]}")
        for i in range(n):
            prev, cur, nxt = verts[i - 1], verts[i], verts[(i + 1) % n]
            base = math.dist(prev, nxt)
            if _cross(prev, cur, nxt) / base <= TOL:
                raise DomainError("polygon must be strictly convex and counter-clockwise")
        if _signed_area(verts) <= 0.0:
            raise DomainError("polygon must have positive signed area")
        # winding once around: the turning angles must sum to 2*pi
        turn = 0.0
        for i in range(n):
            a, b, c = verts[i - 1], verts[i], verts[(i + 1) % n]
            turn += math.atan2(_cross(a, b, c), (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1]))
        if abs(turn - 2 * math.pi) > 1e-6:
            raise DomainError("polygon is self-intersecting")

    @classmethod
    def from_points(cls, points: Iterable[Sequence[float]]) -> "Polygon":
        """Build a polygon from a ring in either orientation, dropping degenerate vertices."""
        ring = _cleanup((p[0], p[1]) for p in points)
        if len(ring) >= 3 and _signed_area(ring) < 0:
            ring.reverse()
        return cls(tuple(ring))

    @classmethod
    def rectangle(cls, width: float, length: float, orientation: float = 0.0,
                  center: Point = (0.0, 0.0)) -> "Polygon":
        """Rectangle whose long axis (``length``) points along ``orientation`` degrees."""
        if width <= 0 or length <= 0:
            raise DomainError("rectangle sides must be positive")
        a = math.radians(orientation)
        ux, uy = math.cos(a), math.sin(a)
        nx, ny = -uy, ux
        hl, hw = 0.5 * length, 0.5 * width
        cx, cy = center
        corners = [(-hl, -hw), (hl, -hw), (hl, hw), (-hl, hw)]
        return cls(tuple((cx + s * ux + t * nx, cy + s * uy + t * ny) for s, t in corners))

    def translate(self, dx: float, dy: float) -> "Polygon":
        return Polygon(tuple((x + dx, y + dy) for x, y in self.vertices))

    @property
    def area(self) -> float:
        return polygon_area(self)

    @property
    def centroid(self) -> Point:
        pts = self.vertices
        a = _signed_area(pts)
        cx = cy = 0.0
        n = len(pts)
        for i in range(n):
            x0, y0 = pts[i]
            x1, y1 = pts[(i + 1) % n]
            c = x0 * y1 - x1 * y0
            cx += (x0 + x1) * c
            cy += (y0 + y1) * c
        return (cx / (6 * a), cy / (6 * a))

    def as_array(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Vectorized closed point-in-polygon test for an ``(N, 2)`` array."""
        pts = np.asarray(points, dtype=float)
        v = self.as_array()
        inside = np.ones(len(pts), dtype=bool)
        for i in range(len(v)):
            a = v[i]
            b = v[(i + 1) % len(v)]
            cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
            inside &= cross >= 0.0
        return inside

    def extent_along(self, direction: float) -> float:
        """Length of the projection onto the in-plane direction ``direction`` (degrees)."""
        a = math.radians(direction)
        proj = self.as_array() @ np.array([math.cos(a), math.sin(a)])
        return float(proj.max() - proj.min())


def polygon_area(p: Polygon) -> float:
    """Shoelace area of a valid polygon."""
    return _signed_area(p.vertices)


def min_width(p: Polygon) -> float:
    """Minimum caliper width of a convex polygon."""
    verts = p.vertices
    n = len(verts)
    best = math.inf
    for i in range(n):
        a, b = verts[i], verts[(i + 1) % n]
        edge = math.dist(a, b)
        far = max(_cross(a, b, v) for v in verts) / edge
        best = min(best, far)
    return best


def polygon_intersect(a: Polygon, b: Polygon) -> Polygon | None:
    """Convex intersection of two polygons (Sutherland-Hodgman); ``None`` when empty."""
    if not isinstance(a, Polygon) or not isinstance(b, Polygon):
        raise DomainError("polygon_intersect expects Polygon operands")
    subject, clipper = a, b
    output = list(subject.vertices)
    cv = clipper.vertices
    for i in range(len(cv)):
        if not output:
            return None
        c1, c2 = cv[i], cv[(i + 1) % len(cv)]
        edge = math.dist(c1, c2)
        inp, output = output, []
        s = inp[-1]
        ds = _cross(c1, c2, s) / edge
        for e in inp:
            de = _cross(c1, c2, e) / edge
            if de >= 0.0:
                if ds < 0.0:
                    output.append(_lerp(s, e, ds, de))
                output.append(e)
            elif ds >= 0.0:
                output.append(_lerp(s, e, ds, de))
            s, ds = e, de
    ring = _cleanup(output)
    if len(ring) < 3 or _signed_area(ring) <= TOL * TOL:
        return None
    try:
        return Polygon(tuple(ring))
    except DomainError:
        # slivers thinner than the predicate tolerance count as empty
        return None


def _lerp(s: Point, e: Point, ds: float, de: float) -> Point:
    t = ds / (ds - de)
    return (s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1]))


@dataclass(frozen=True)
class BilayerResist:
    """Top imaging layer thickness and underlayer undercut, micrometers.

    The undercut is carried for completeness; projection assumes it is large
    enough that only the top layer shadows.
    """

    top_thickness_h: float = 1.8
    undercut: float = 0.0

    def __post_init__(self):
        if not self.top_thickness_h > 0:
            raise DomainError("top_thickness_h must be > 0")
        if not self.undercut >= 0:
            raise DomainError("undercut must be >= 0")


@dataclass(frozen=True)
class EvapStep:
    """One evaporation: tilt from the substrate normal, flux azimuth, film thickness.

    ``effective_top_thickness`` optionally replaces the resist thickness for
    this step (metal accumulated on the resist by earlier steps); it must not
    be thinner than the resist itself.
    """

    theta: float
    azimuth: float
    film_thickness: float = 40.0
    effective_top_thickness: float | None = None

    def __post_init__(self):
        if not 0.0 < self.theta < 90.0:
            raise DomainError(f"theta must lie in (0, 90) degrees, got {self.theta}")
        if not self.film_thickness > 0:
            raise DomainError("film_thickness must be > 0")
        object.__setattr__(self, "azimuth", float(self.azimuth) % 360.0)

    def top_thickness(self, resist: BilayerResist) -> float:
        if self.effective_top_thickness is None:
            return resist.top_thickness_h
        if self.effective_top_thickness < resist.top_thickness_h:
            raise DomainError("effective top thickness cannot be below the resist thickness")
        return self.effective_top_thickness


@dataclass(frozen=True)
class LinePattern:
    """A straight resist opening of width ``w_open`` along ``orientation`` degrees."""

    w_open: float
    orientation: float = 0.0
    length: float = 20.0
    center: Point = (0.0, 0.0)

    def __post_init__(self):
        if not self.w_open > 0:
            raise DomainError("w_open must be > 0")
        if not self.length > self.w_open:
            raise DomainError("line length must exceed its width")

    def polygon(self) -> Polygon:
        return Polygon.rectangle(self.w_open, self.length, self.orientation, self.center)


def in_plane_offset(pattern: LinePattern, step: EvapStep) -> float:
    """Angle between flux azimuth and line direction, folded into [0, 90] degrees."""
    d = (step.azimuth - pattern.orientation) % 180.0
    return min(d, 180.0 - d)


@dataclass(frozen=True)
class Footprint:
    region: Polygon | None
    source_step: EvapStep | None = field(default=None, compare=False)

    @property
    def is_empty(self) -> bool:
        return self.region is None

    @property
    def area(self) -> float:
        return 0.0 if self.region is None else self.region.area


@dataclass(frozen=True)
class JunctionGeometry:
    overlap: Polygon | None
    area: float
    linewidth_1: float
    linewidth_2: float

    @property
    def area_nm2(self) -> float:
        return self.area * 1e6


def shadow_offset(h: float, theta: float, convention: str = "paper") -> float:
    """Substrate-plane displacement of the shadow edge cast by a resist of thickness ``h``.

    ``paper`` evaluates h/tan(theta) and ``complement`` h*tan(theta), theta being
    measured from the substrate normal.
    """
    if not 0.0 < theta < 90.0:
        raise DomainError(f"theta must lie in (0, 90) degrees, got {theta}")
    if not h > 0:
        raise DomainError(f"resist thickness must be > 0, got {h}")
    t = math.tan(math.radians(theta))
    if convention == "paper":
        return h / t
    if convention == "complement":
        return h * t
    raise DomainError(f"unknown shadow convention {convention!r}; expected one of {CONVENTIONS}")


def narrowed_linewidth(w_open: float, h: float, theta: float, phi: float,
                       convention: str = "paper") -> float | _FullyShadowed:
    """Idealized deposited width of a long line: ``w_open - offset * sin(phi)``."""
    if not w_open > 0:
        raise DomainError(f"w_open must be > 0, got {w_open}")
    if not 0.0 <= phi <= 90.0:
        raise DomainError(f"phi must lie in [0, 90] degrees, got {phi}")
    w = w_open - shadow_offset(h, theta, convention) * math.sin(math.radians(phi))
    return w if w > 0 else FULLY_SHADOWED


def shadow_shift(resist: BilayerResist, step: EvapStep, convention: str = "paper") -> tuple[float, float]:
    """In-plane shift vector along the flux azimuth, micrometers."""
    d = shadow_offset(step.top_thickness(resist), step.theta, convention)
    a = math.radians(step.azimuth)
    return (d * math.cos(a), d * math.sin(a))


def project_footprint(opening: Polygon, resist: BilayerResist, step: EvapStep,
                      convention: str = "paper") -> Footprint:
    """Substrate region reached by flux through ``opening``.

    A point p is coated when p and p + shift both lie inside the opening,
    i.e. the footprint is ``opening ∩ (opening - shift)``.
    """
    sx, sy = shadow_shift(resist, step, convention)
    region = polygon_intersect(opening, opening.translate(-sx, -sy))
    return Footprint(region, step)


def junction_overlap(f1: Footprint, f2: Footprint) -> JunctionGeometry:
    w1 = 0.0 if f1.region is None else min_width(f1.region)
    w2 = 0.0 if f2.region is None else min_width(f2.region)
    if f1.region is None or f2.region is None:
        return JunctionGeometry(None, 0.0, w1, w2)
    overlap = polygon_intersect(f1.region, f2.region)
    area = 0.0 if overlap is None else polygon_area(overlap)
    return JunctionGeometry(overlap, area, w1, w2)
