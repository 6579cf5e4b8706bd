import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from shapely.geometry import Polygon as ShapelyPolygon

from shadowfab.errors import DomainError
from shadowfab.geomcore import (
    FULLY_SHADOWED,
    BilayerResist,
    EvapStep,
    Footprint,
    LinePattern,
    Polygon,
    in_plane_offset,
    junction_overlap,
    min_width,
    narrowed_linewidth,
    polygon_area,
    polygon_intersect,
    project_footprint,
    shadow_offset,
)

SIN15 = (math.sqrt(6) - math.sqrt(2)) / 4  # exact
UNIT = Polygon(((0, 0), (1, 0), (1, 1), (0, 1)))


def _shapely(p):
    return ShapelyPolygon(p.vertices)


def random_convex(rng, n=8, scale=2.0, center=(0.0, 0.0)):
    from scipy.spatial import ConvexHull

    pts = rng.uniform(-scale, scale, size=(n, 2)) + np.asarray(center)
    hull = ConvexHull(pts)
    return Polygon.from_points(pts[hull.vertices])


# --- shadow_offset -----------------------------------------------------------

def test_shadow_offset_paper_60():
    assert shadow_offset(1.8, 60) == pytest.approx(1.8 / math.sqrt(3), abs=1e-12)
    assert shadow_offset(1.8, 60) == pytest.approx(1.0392, abs=5e-5)


def test_shadow_offset_45_is_h():
    assert shadow_offset(1.8, 45) == pytest.approx(1.8, rel=1e-12)


def test_shadow_offset_complement():
    assert shadow_offset(1.8, 60, "complement") == pytest.approx(1.8 * math.sqrt(3), rel=1e-12)
    assert shadow_offset(1.8, 60, "complement") == pytest.approx(3.1177, abs=5e-5)


@pytest.mark.parametrize("h,theta", [(1.8, 0), (1.8, 90), (1.8, -5), (0.0, 60), (-1.0, 60)])
def test_shadow_offset_domain(h, theta):
    with pytest.raises(DomainError):
        shadow_offset(h, theta)


def test_shadow_offset_unknown_convention():
    with pytest.raises(DomainError):
        shadow_offset(1.8, 60, "sideways")


# --- narrowed_linewidth ------------------------------------------------------

def test_narrowed_linewidth_phi15():
    expected = 0.5 - (1.8 / math.sqrt(3)) * SIN15
    assert narrowed_linewidth(0.5, 1.8, 60, 15) == pytest.approx(expected, abs=1e-12)
    assert narrowed_linewidth(0.5, 1.8, 60, 15) == pytest.approx(0.23103, abs=5e-6)


def test_narrowed_linewidth_phi0_is_nominal():
    assert narrowed_linewidth(0.5, 1.8, 60, 0) == 0.5


def test_narrowed_linewidth_phi25_matches_polygon_engine():
    # independent route: perpendicular extent of the translate-and-intersect footprint
    line = LinePattern(0.5, 0.0, 20.0)
    fp = project_footprint(line.polygon(), BilayerResist(1.8), EvapStep(60, 25))
    assert narrowed_linewidth(0.5, 1.8, 60, 25) == pytest.approx(fp.region.extent_along(90), abs=1e-12)
    assert narrowed_linewidth(0.5, 1.8, 60, 25) == pytest.approx(0.0608022, abs=1e-7)


def test_narrowed_linewidth_fully_shadowed():
    assert narrowed_linewidth(0.2, 1.8, 60, 25) is FULLY_SHADOWED
    assert repr(FULLY_SHADOWED) == "FULLY_SHADOWED"


@pytest.mark.parametrize("phi", [-1, 90.5])
def test_narrowed_linewidth_phi_domain(phi):
    with pytest.raises(DomainError):
        narrowed_linewidth(0.5, 1.8, 60, phi)


@given(st.floats(0, 89), st.floats(0.1, 1), st.floats(0.1, 3), st.floats(5, 85))
def test_narrowed_linewidth_monotone(phi, dphi, h, theta):
    w = 50.0  # wide enough never to shadow out
    a = narrowed_linewidth(w, h, theta, phi)
    assert narrowed_linewidth(w, h, theta, min(phi + dphi, 90)) <= a
    assert narrowed_linewidth(w, h + dphi, theta, phi) <= a
    assert narrowed_linewidth(w, h, theta + dphi, phi) >= a


# --- polygons ----------------------------------------------------------------

def test_polygon_area_examples():
    assert polygon_area(UNIT) == 1.0
    assert polygon_area(Polygon(((0, 0), (1, 0), (0, 1)))) == 0.5
    assert polygon_area(Polygon.rectangle(0.07, 0.15)) == pytest.approx(0.0105, rel=1e-12)


@pytest.mark.parametrize("verts", [
    ((0, 0), (1, 0)),
    ((0, 0), (0, 1), (1, 1), (1, 0)),  # clockwise
    ((0, 0), (1, 0), (2, 0), (1, 1)),  # collinear
    ((0, 0), (1, 0), (1, 0), (0, 1)),  # repeated
    ((0, 0), (2, 0), (1, 0.1), (2, 1), (0, 1)),  # reflex
    ((0, 0), (1, 1), (1, 0), (0, 1)),  # bow tie
])
def test_polygon_validation(verts):
    with pytest.raises(DomainError):
        Polygon(verts)


def test_from_points_reorients():
    p = Polygon.from_points([(0, 0), (0, 1), (1, 1), (1, 0)])
    assert polygon_area(p) == 1.0


def test_intersect_examples():
    half = polygon_intersect(UNIT, UNIT.translate(0.5, 0))
    assert polygon_area(half) == pytest.approx(0.5, abs=1e-15)
    same = polygon_intersect(UNIT, UNIT)
    assert set(same.vertices) == set(UNIT.vertices)
    assert polygon_intersect(UNIT, UNIT.translate(2, 0)) is None


def test_intersect_touching_is_empty():
    assert polygon_intersect(UNIT, UNIT.translate(1, 0)) is None


def test_intersect_rejects_non_polygon():
    with pytest.raises(DomainError):
        polygon_intersect(UNIT, [(0, 0), (1, 0), (0, 1)])


def test_intersect_against_shapely():
    rng = np.random.default_rng(7)
    for _ in range(200):
        a = random_convex(rng)
        b = random_convex(rng, center=rng.uniform(-1.5, 1.5, 2))
        ours = polygon_intersect(a, b)
        ref = _shapely(a).intersection(_shapely(b)).area
        assert (0.0 if ours is None else ours.area) == pytest.approx(ref, abs=1e-12)


coords = st.floats(-1.0, 1.0, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1), coords, coords)
def test_intersect_properties(seed, tx, ty):
    rng = np.random.default_rng(seed)
    a = random_convex(rng)
    b = random_convex(rng, center=rng.uniform(-2, 2, 2))
    ab = polygon_intersect(a, b)
    ba = polygon_intersect(b, a)
    assert (ab is None) == (ba is None)
    if ab is None:
        return
    assert ab.area == pytest.approx(ba.area, rel=1e-9, abs=1e-15)
    assert ab.area <= min(a.area, b.area) + 1e-12
    # idempotence
    again = polygon_intersect(ab, ab)
    assert again.area == pytest.approx(ab.area, rel=1e-12)
    # translation equivariance
    moved = polygon_intersect(a.translate(tx, ty), b.translate(tx, ty))
    assert moved.area == pytest.approx(ab.area, rel=1e-9, abs=1e-15)
    cx, cy = ab.centroid
    mx, my = moved.centroid
    assert (mx - tx, my - ty) == pytest.approx((cx, cy), abs=1e-9)


def test_min_width_rectangle():
    assert min_width(Polygon.rectangle(0.23, 20, orientation=37)) == pytest.approx(0.23, abs=1e-12)


# --- footprints --------------------------------------------------------------

def test_footprint_parallel_shortens_line():
    line = Polygon.rectangle(0.5, 20.0)
    fp = project_footprint(line, BilayerResist(1.8), EvapStep(60, 0))
    assert fp.region.extent_along(90) == pytest.approx(0.5, abs=1e-12)
    assert fp.region.extent_along(0) == pytest.approx(20.0 - 1.8 / math.sqrt(3), abs=1e-12)


def test_footprint_perpendicular_empty():
    line = Polygon.rectangle(0.5, 20.0)
    fp = project_footprint(line, BilayerResist(1.8), EvapStep(60, 90))
    assert fp.is_empty and fp.area == 0.0


def test_footprint_phi15_width():
    line = Polygon.rectangle(0.5, 20.0)
    fp = project_footprint(line, BilayerResist(1.8), EvapStep(60, 15))
    assert fp.region.extent_along(90) == pytest.approx(0.5 - 1.8 / math.sqrt(3) * SIN15, abs=1e-12)


def test_footprint_phi0_equals_opening_width():
    for orient in (0, 33, 90, 147):
        line = LinePattern(0.8, orient)
        fp = project_footprint(line.polygon(), BilayerResist(1.8), EvapStep(50, orient + 180))
        assert min_width(fp.region) == pytest.approx(0.8, abs=1e-12)


def test_in_plane_offset_folding():
    line = LinePattern(0.5, 10.0)
    assert in_plane_offset(line, EvapStep(60, 25)) == pytest.approx(15)
    assert in_plane_offset(line, EvapStep(60, 185)) == pytest.approx(5)
    assert in_plane_offset(line, EvapStep(60, 355)) == pytest.approx(15)
    assert in_plane_offset(line, EvapStep(60, 100)) == pytest.approx(90)


def test_effective_top_thickness_narrows_more():
    line = Polygon.rectangle(0.5, 20.0)
    plain = project_footprint(line, BilayerResist(1.8), EvapStep(60, 15))
    thick = project_footprint(line, BilayerResist(1.8), EvapStep(60, 15, effective_top_thickness=2.0))
    assert thick.region.extent_along(90) < plain.region.extent_along(90)
    with pytest.raises(DomainError):
        project_footprint(line, BilayerResist(1.8), EvapStep(60, 15, effective_top_thickness=1.0))


def test_evapstep_validation():
    with pytest.raises(DomainError):
        EvapStep(90, 0)
    with pytest.raises(DomainError):
        EvapStep(60, 0, film_thickness=0)
    assert EvapStep(60, -30).azimuth == 330.0


def test_resist_validation():
    with pytest.raises(DomainError):
        BilayerResist(0)
    with pytest.raises(DomainError):
        BilayerResist(1.8, -0.1)


def test_line_validation():
    with pytest.raises(DomainError):
        LinePattern(0.5, length=0.4)


def test_monte_carlo_area_oracle_small():
    rng = np.random.default_rng(3)
    opening = random_convex(rng, scale=1.5)
    step = EvapStep(55, 70)
    fp = project_footprint(opening, BilayerResist(0.6), step)
    sx = 0.6 / math.tan(math.radians(55)) * math.cos(math.radians(70))
    sy = 0.6 / math.tan(math.radians(55)) * math.sin(math.radians(70))
    lo, hi = opening.as_array().min(0), opening.as_array().max(0)
    pts = rng.uniform(lo, hi, size=(200_000, 2))
    hit = opening.contains(pts) & opening.contains(pts + [sx, sy])
    est = hit.mean() * np.prod(hi - lo)
    assert fp.area == pytest.approx(est, rel=0.03)


# --- junction overlap --------------------------------------------------------

def test_overlap_sem_anchor():
    f1 = Footprint(Polygon.rectangle(0.150, 5.0, 0.0))
    f2 = Footprint(Polygon.rectangle(0.070, 5.0, 90.0))
    j = junction_overlap(f1, f2)
    assert j.area == pytest.approx(0.0105, rel=1e-12)
    assert j.area_nm2 == pytest.approx(1.05e4, rel=1e-12)
    assert (j.linewidth_1, j.linewidth_2) == pytest.approx((0.150, 0.070), abs=1e-12)


def test_overlap_identical_and_disjoint():
    r = Polygon.rectangle(0.2, 3.0)
    assert junction_overlap(Footprint(r), Footprint(r)).area == pytest.approx(r.area, rel=1e-12)
    j = junction_overlap(Footprint(r), Footprint(r.translate(10, 0)))
    assert j.area == 0.0 and j.overlap is None


def test_overlap_with_empty_footprint():
    j = junction_overlap(Footprint(None), Footprint(Polygon.rectangle(0.2, 3.0)))
    assert j.area == 0.0 and j.overlap is None and j.linewidth_1 == 0.0


def test_overlap_area_is_shoelace_of_overlap():
    rng = np.random.default_rng(11)
    for _ in range(50):
        a, b = random_convex(rng), random_convex(rng, center=rng.uniform(-1, 1, 2))
        j = junction_overlap(Footprint(a), Footprint(b))
        if j.overlap is not None:
            assert j.area == pytest.approx(polygon_area(j.overlap), rel=1e-12)
