import math

import numpy as np
import pytest
from scipy.integrate import quad

from billiardwells import geometry
from billiardwells.geometry import (GeometryError, Region, ShapeSpec,
                                    build_double_well, region_area)

WELL_AREA = 4.8


def test_rectangle_dimensions_close_analytically():
    g = build_double_well("rectangle")
    assert g.resolved["lx"] * g.resolved["ly"] == pytest.approx(WELL_AREA, abs=0)
    assert g.resolved["lx"] == pytest.approx(2.0)
    assert g.resolved["ly"] == pytest.approx(2.4)


def test_circle_radius_analytic():
    g = build_double_well("circle")
    assert g.resolved["r"] == pytest.approx(math.sqrt(WELL_AREA / math.pi), rel=1e-12)


def test_stadium_straight_side_from_area():
    g = build_double_well("stadium")
    a = g.resolved["straight_length"]
    assert 1.8 * a + math.pi * 0.9 ** 2 == pytest.approx(WELL_AREA, rel=1e-12)


def test_sinai_scatterer_radius():
    g = build_double_well("sinai")
    r = g.resolved["scatterer_radius"]
    assert 2.2 * 2.4 - math.pi * r * r == pytest.approx(WELL_AREA, rel=1e-12)


@pytest.mark.parametrize("kind", geometry.SHAPE_KINDS)
def test_monte_carlo_well_areas(shapes, kind):
    # both wells within 3 standard errors of the target area, 1e7 samples
    g = shapes[kind]
    for region, seed in ((Region.LEFT_WELL, 101), (Region.RIGHT_WELL, 202)):
        area, stderr = region_area(g, region, 10_000_000, seed=seed)
        assert abs(area - WELL_AREA) < 3.0 * stderr
        assert abs(area - WELL_AREA) / WELL_AREA < 1e-3


def test_region_area_reproducible(shapes):
    a1 = region_area(shapes["stadium"], Region.LEFT_WELL, 10_000, seed=5)
    a2 = region_area(shapes["stadium"], Region.LEFT_WELL, 10_000, seed=5)
    assert a1 == a2


def test_region_area_rejects_small_samples(shapes):
    with pytest.raises(ValueError):
        region_area(shapes["circle"], Region.LEFT_WELL, 9_999, seed=1)


def test_classify_rectangle_points(shapes):
    g = shapes["rectangle"]
    assert g.classify_point((0.0, 0.0)) == Region.BARRIER
    assert g.classify_point((-1.0, 0.0)) == Region.LEFT_WELL
    assert g.classify_point((1.0, 0.0)) == Region.RIGHT_WELL
    assert g.classify_point((50.0, 50.0)) == Region.OUTSIDE
    # interface tie-break: barrier; outer wall: outside
    assert g.classify_point((-0.05, 0.3)) == Region.BARRIER
    assert g.classify_point((-2.05, 0.0)) == Region.OUTSIDE
    assert g.classify_point((-1.0, 1.2)) == Region.OUTSIDE


@pytest.mark.parametrize("kind", geometry.SHAPE_KINDS)
def test_mirror_symmetry_exact(shapes, kind):
    g = shapes[kind]
    rng = np.random.default_rng(42)
    x = rng.uniform(g.bbox[0] - 0.3, g.bbox[1] + 0.3, 10_000)
    y = rng.uniform(g.bbox[2] - 0.3, g.bbox[3] + 0.3, 10_000)
    c = np.asarray(g.classify(x, y))
    m = np.asarray(g.classify(-x, y))
    swapped = np.where(c == Region.LEFT_WELL, Region.RIGHT_WELL,
                       np.where(c == Region.RIGHT_WELL, Region.LEFT_WELL, c))
    assert np.array_equal(swapped, m)


@pytest.mark.parametrize("kind", geometry.SHAPE_KINDS)
@pytest.mark.parametrize("side", ["left", "right"])
def test_boundary_loops_closed(shapes, kind, side):
    for loop in shapes[kind].loops(side):
        end = loop[-1].point_at(loop[-1].length)
        start = loop[0].point_at(0.0)
        assert np.hypot(*(end - start)) < 1e-9
        for a, b in zip(loop, loop[1:]):
            gap = np.hypot(*(a.point_at(a.length) - b.point_at(0.0)))
            assert gap < 1e-9


@pytest.mark.parametrize("kind", geometry.SHAPE_KINDS)
def test_boundary_points_on_wall_with_inward_normals(shapes, kind):
    # walking the boundary: points classify as non-well boundary (probing a
    # nudge along the inward normal lands in the well)
    g = shapes[kind]
    total = g.perimeter("left")
    for s in np.linspace(0.0, total, 57, endpoint=False):
        p, n = g.boundary_point("left", float(s))
        assert np.hypot(*n) == pytest.approx(1.0, abs=1e-12)
        # lean the probe slightly along the wall so corner probes leave the
        # adjacent wall plane as well
        tangent = np.array([n[1], -n[0]])
        probe = p + 1e-6 * n + 5e-7 * tangent
        assert g.classify_point(probe) in (Region.LEFT_WELL, Region.BARRIER)


def test_boundary_point_rejects_out_of_range(shapes):
    g = shapes["rectangle"]
    with pytest.raises(ValueError):
        g.boundary_point("left", g.perimeter("left") + 0.1)
    with pytest.raises(ValueError):
        g.boundary_point("left", -0.1)


def test_circle_boundary_radius_everywhere(shapes):
    g = shapes["circle"]
    c = g.resolved["center_offset"]
    r = g.resolved["r"]
    for s in np.linspace(0, g.perimeter("left"), 33, endpoint=False):
        p, _ = g.boundary_point("left", float(s))
        assert math.hypot(p[0] + c, p[1]) == pytest.approx(r, abs=1e-12)


def test_stadium_cap_normal_points_to_cap_center(shapes):
    g = shapes["stadium"]
    a = g.resolved["straight_length"]
    # mid-cap sample: s past the barrier side (length a) plus a quarter cap
    s = a + 0.9 * math.pi / 2.0
    p, n = g.boundary_point("left", s)
    center = np.array([-0.05 - 0.9, a / 2.0])
    to_center = (center - p) / np.hypot(*(center - p))
    assert np.allclose(n, to_center, atol=1e-12)


def test_rectangle_s_origin_at_lower_barrier_corner(shapes):
    p, _ = shapes["rectangle"].boundary_point("left", 0.0)
    assert np.allclose(p, [-0.05, -1.2])
    p, _ = shapes["rectangle"].boundary_point("right", 0.0)
    assert np.allclose(p, [0.05, -1.2])


def test_barrier_width_exact_straight_shapes(shapes):
    # horizontal thickness along the facing interval equals w_b exactly
    for kind in ("rectangle", "stadium", "sinai", "butterfly", "concave"):
        g = shapes[kind]
        span = g.barrier_y_halfspan
        for y in np.linspace(-0.9 * span, 0.9 * span, 7):
            xs = np.linspace(-0.0499999, 0.0499999, 11)
            regions = np.asarray(g.classify(xs, np.full_like(xs, y)))
            assert np.all(regions == Region.BARRIER)
            assert g.classify_point((-0.0500001, y)) == Region.LEFT_WELL
            assert g.classify_point((0.0500001, y)) == Region.RIGHT_WELL


def test_circle_mean_gap_matches_barrier_width(shapes):
    g = shapes["circle"]
    r, c, yb = g.resolved["r"], g.resolved["center_offset"], g.resolved["y_b"]
    mean_gap = quad(lambda y: 2 * c - 2 * math.sqrt(r * r - y * y), -yb, yb)[0] / (2 * yb)
    assert mean_gap == pytest.approx(0.1, rel=1e-2)


def test_perimeter_includes_sinai_scatterer(shapes):
    g = shapes["sinai"]
    r = g.resolved["scatterer_radius"]
    expected = 2 * (2.2 + 2.4) + 2 * math.pi * r
    assert g.perimeter("left") == pytest.approx(expected, rel=1e-12)


def test_boundary_polyline_export(tmp_path, shapes):
    g = shapes["butterfly"]
    rows = g.boundary_polyline("left", 100)
    assert rows.shape == (100, 5)
    assert np.all(np.diff(rows[:, 0]) > 0)
    path = tmp_path / "boundary.csv"
    g.write_boundary_csv("left", 50, str(path))
    text = path.read_text().splitlines()
    assert text[0] == "s,x,y,nx,ny"
    assert len(text) == 51


def test_unknown_shape_and_bad_params_rejected():
    with pytest.raises(GeometryError):
        ShapeSpec(kind="heptagon")
    with pytest.raises(GeometryError):
        ShapeSpec(kind="stadium", params={"cap_width": -1.0})
    with pytest.raises(GeometryError):
        ShapeSpec(kind="stadium", params={"nose_length": 1.0})
    # unresolvable area constraint names the parameter
    with pytest.raises(GeometryError, match="cap_width"):
        build_double_well(ShapeSpec(kind="stadium", params={"cap_width": 10.0}))
    with pytest.raises(GeometryError, match="lx"):
        build_double_well(ShapeSpec(kind="sinai", params={"lx": 1.0, "ly": 2.0}))


def test_spec_defaults():
    spec = ShapeSpec(kind="concave")
    assert spec.barrier_width == 0.1
    assert spec.barrier_height == 1000.0
    assert spec.well_area == 4.8
