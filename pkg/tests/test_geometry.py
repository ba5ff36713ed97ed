import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conefronts import shapes
from conefronts.errors import DegenerateFrontError, InvalidParameterError, InvalidRayError
from conefronts.geometry import (
    TOL_KG,
    ConvexFront,
    curvature_at,
    curvatures,
    dilate,
    check_condition_1,
    hausdorff,
    intersect,
    nearest_feet,
    nearest_points,
    ray_arrays,
    ray_length_gamma,
    ray_lengths,
    read_front_csv,
    remesh_equal_arclength,
    sample_rays,
    signed_distance,
    signed_distances,
    write_front_csv,
)
from conefronts.verification import monte_carlo_integral

from conftest import lens_area, random_convex


# ---------------------------------------------------------------- front type


def test_front_rejects_clockwise():
    m = shapes.disk(1.0, 32).markers[::-1]
    with pytest.raises(DegenerateFrontError):
        ConvexFront(m)


def test_front_rejects_nonconvex():
    with pytest.raises(DegenerateFrontError):
        ConvexFront(shapes.l_shape().markers)


def test_front_rejects_coincident_markers():
    m = shapes.disk(1.0, 32).markers.copy()
    m[5] = m[4]
    with pytest.raises(DegenerateFrontError):
        ConvexFront(m)


def test_front_rejects_too_few_markers():
    with pytest.raises(DegenerateFrontError):
        ConvexFront(shapes.square(2.0, 1).markers)


def test_front_basic_measures(disk512):
    n = 512
    assert disk512.area == pytest.approx(0.5 * n * math.sin(2 * math.pi / n), rel=1e-14)
    assert disk512.perimeter == pytest.approx(2 * n * math.sin(math.pi / n), rel=1e-14)
    assert disk512.diam == pytest.approx(2.0, rel=1e-14)
    assert np.allclose(disk512.centroid, 0.0, atol=1e-14)


def test_csv_round_trip(tmp_path, rsquare):
    path = tmp_path / "front.csv"
    write_front_csv(path, rsquare.markers)
    assert path.read_text().splitlines()[0] == "x,y"
    back = read_front_csv(path)
    assert np.array_equal(back, rsquare.markers)


# ---------------------------------------------------------------- distance


def test_signed_distance_disk_center_and_outside(disk256):
    # inscribed 256-gon: center distance is the apothem cos(pi/N)
    assert signed_distance(disk256, (0.0, 0.0)) == pytest.approx(1.0, abs=1e-4)
    assert signed_distance(disk256, (0.0, 0.0)) == pytest.approx(math.cos(math.pi / 256), abs=1e-14)
    assert signed_distance(disk256, (2.0, 0.0)) == pytest.approx(-1.0, abs=1e-4)


def test_signed_distance_square():
    sq = shapes.square(2.0, 8)
    assert signed_distance(sq, (0.5, 0.0)) == pytest.approx(0.5, abs=1e-15)
    assert signed_distance(sq, (1.0, 0.3)) == pytest.approx(0.0, abs=sq.tol_geom)
    assert signed_distance(sq, (2.0, 2.0)) == pytest.approx(-math.sqrt(2.0), abs=1e-15)


def test_signed_distance_nonconvex_path_matches_segments():
    lsh = shapes.l_shape()
    # inside the L, near the reentrant corner region
    assert signed_distance(lsh, (0.5, 0.5)) == pytest.approx(0.5, abs=1e-12)
    # in the notch (outside)
    assert signed_distance(lsh, (1.6, 1.6)) < 0.0


@given(st.tuples(st.floats(-3, 3), st.floats(-3, 3)), st.tuples(st.floats(-3, 3), st.floats(-3, 3)))
def test_signed_distance_is_1_lipschitz(p, q):
    f = shapes.ellipse(1.3, 0.7, 128)
    dp, dq = signed_distances(f, np.array([p, q]))
    assert abs(dp - dq) <= math.dist(p, q) + 1e-12


# ---------------------------------------------------------------- nearest points


def test_nearest_points_square_center():
    sq = shapes.square(2.0, 8)
    pts = nearest_points(sq, (0.0, 0.0))
    assert len(pts) == 4
    expected = {(0.0, -1.0), (1.0, 0.0), (0.0, 1.0), (-1.0, 0.0)}
    assert {(round(p.x, 12) + 0.0, round(p.y, 12) + 0.0) for p in pts} == expected
    # representative is the smallest arclength (bottom edge, marker 0 at (-1,-1))
    assert pts[0] == pytest.approx((0.0, -1.0), abs=1e-12)


def test_nearest_points_disk_radial(disk256):
    # a vertex direction has two symmetric nearest edge points
    pts = nearest_points(disk256, (0.5, 0.0))
    assert len(pts) == 2
    # an edge-midpoint direction has exactly one
    a = math.pi / 256
    pts = nearest_points(disk256, (0.5 * math.cos(a), 0.5 * math.sin(a)))
    assert len(pts) == 1
    c = math.cos(math.pi / 256)
    assert pts[0] == pytest.approx((c * math.cos(a), c * math.sin(a)), abs=1e-12)


def test_nearest_points_on_boundary(disk256):
    y = 0.5 * (disk256.markers[3] + disk256.markers[4])
    pts = nearest_points(disk256, y)
    assert len(pts) == 1
    assert pts[0] == pytest.approx(tuple(y), abs=1e-15)


@given(st.floats(-2.5, 2.5), st.floats(-2.5, 2.5))
def test_nearest_point_distance_consistency(x, y):
    f = shapes.rounded_square(2.0, 0.3, n_edge=8, n_arc=6)
    rep = nearest_points(f, (x, y))[0]
    assert math.dist(rep, (x, y)) == pytest.approx(abs(signed_distance(f, (x, y))), abs=f.tol_geom)


# ---------------------------------------------------------------- curvature


@pytest.mark.parametrize("radius", [0.5, 1.0, 3.0])
def test_curvature_regular_polygon(radius):
    f = shapes.disk(radius, 64)
    k = curvatures(f)
    # inscribed polygon: the circumcircle of any three markers is the circle itself
    assert np.allclose(k, 1.0 / radius, rtol=1e-12)
    assert curvature_at(f, 7) == pytest.approx(1.0 / radius, rel=1e-12)


def test_curvature_scaling_halves():
    f = shapes.ellipse(1.0, 0.5, 64)
    g = ConvexFront(2.0 * f.markers)
    assert np.allclose(curvatures(g), 0.5 * curvatures(f), rtol=1e-12)


def test_curvature_collinear_is_zero():
    sq = shapes.square(2.0, 8)
    assert curvature_at(sq, 3) == 0.0


def test_curvature_index_out_of_range(disk256):
    with pytest.raises(InvalidParameterError):
        curvature_at(disk256, 256)


# ---------------------------------------------------------------- rays


@pytest.mark.parametrize("i", [0, 17, 100])
def test_gamma_disk_radius(i):
    f = shapes.disk(2.0, 256)
    y = f.markers[i]
    # radial direction at a marker is the bisector normal
    assert ray_length_gamma(f, y, -y / np.linalg.norm(y)) == pytest.approx(2.0, abs=1e-8)


@pytest.mark.parametrize("u", [0.1, 0.35, 0.8, 1.0])
def test_gamma_square_meets_diagonal(u):
    sq = shapes.square(2.0, 8)  # L = 1
    y = np.array([-1.0 + u, -1.0])
    n = np.array([0.0, 1.0])
    g = ray_length_gamma(sq, y, n)
    assert g == pytest.approx(u, abs=2 * sq.tol_gamma)
    # brute-force oracle: largest s on a fine grid with d(y + s n) = s
    s = np.linspace(0.0, 2.0, 20001)
    d = signed_distances(sq, y + s[:, None] * n)
    brute = s[np.flatnonzero(np.abs(d - s) <= 1e-12)[-1]]
    assert g == pytest.approx(brute, abs=1e-4)


def test_gamma_tangent_direction_is_invalid():
    sq = shapes.square(2.0, 8)
    with pytest.raises(InvalidRayError):
        ray_length_gamma(sq, (0.3, -1.0), (1.0, 0.0))


def test_gamma_outward_direction_is_invalid():
    sq = shapes.square(2.0, 8)
    with pytest.raises(InvalidRayError):
        ray_length_gamma(sq, (0.3, -1.0), (0.0, -1.0))


def test_gamma_foot_off_front():
    sq = shapes.square(2.0, 8)
    with pytest.raises(InvalidParameterError):
        ray_length_gamma(sq, (0.0, 0.0), (0.0, 1.0))


def test_sample_rays_disk(disk256):
    arr = ray_arrays(sample_rays(disk256))
    assert np.all((arr["gamma"] >= 1 - 1e-3) & (arr["gamma"] <= 1.0))
    assert np.all(np.abs(arr["kappa"] - 1.0) <= 1e-2)
    assert np.allclose(np.hypot(*arr["normal"].T), 1.0, atol=1e-12)
    assert np.all(arr["velocity"] != arr["velocity"])  # unset (nan)


def test_sample_rays_rounded_square_edges():
    f = shapes.rounded_square(2.0, 0.01, n_edge=40, n_arc=8)
    arr = ray_arrays(sample_rays(f))
    feet = arr["foot"]
    bottom = (np.abs(feet[:, 1] + 1.0) < 1e-12) & (np.abs(feet[:, 0]) < 0.9)
    assert bottom.sum() > 20
    assert np.all(np.abs(arr["kappa"][bottom]) < 1e-9)
    # distance to the diagonal medial axis, shifted slightly by the fillets
    expected = np.minimum(1.0 + feet[bottom, 0], 1.0 - feet[bottom, 0])
    assert np.allclose(arr["gamma"][bottom], expected, atol=0.01)


def test_sample_rays_triangle_like_positive():
    tri = np.array([[0.0, 0.0], [3.0, 0.0], [0.5, 1.0]])
    pts = []
    for i in range(3):
        a, b = tri[i], tri[(i + 1) % 3]
        pts.extend(a + (b - a) * k / 10 for k in range(10))
    f = ConvexFront(np.array(pts))
    arr = ray_arrays(sample_rays(f))
    assert np.all(arr["gamma"] > 0.0)


def test_ray_property_linear_distance():
    f = shapes.ellipse(1.2, 0.7, 256)
    arr = ray_arrays(sample_rays(f))
    slopes = np.cos(0.5 * f.turning_angles)
    for i in range(0, 256, 16):
        s = np.linspace(0.0, arr["gamma"][i], 50)
        d = signed_distances(f, arr["foot"][i] + s[:, None] * arr["normal"][i])
        # along a vertex ray the polygon's distance grows with the slope cos(turn/2)
        assert np.all(np.abs(d - slopes[i] * s) <= f.tol_geom + f.tol_gamma)


def test_ray_property_edge_interior_slope_one(rsquare):
    mid = 0.5 * (rsquare.markers + np.roll(rsquare.markers, -1, axis=0))
    nu = rsquare.outward_edge_normals
    g = ray_lengths(rsquare, mid, -nu)
    for i in range(0, rsquare.n, 9):
        s = np.linspace(0.0, g[i], 50)
        d = signed_distances(rsquare, mid[i] - s[:, None] * nu[i])
        assert np.all(np.abs(d - s) <= rsquare.tol_geom + rsquare.tol_gamma)


@given(st.integers(0, 2**32 - 1))
def test_kappa_gamma_admissible_on_random_convex(seed):
    f = random_convex(np.random.default_rng(seed))
    arr = ray_arrays(sample_rays(f))
    assert np.all(arr["kappa"] * arr["gamma"] <= 1.0 + TOL_KG)
    assert np.all(arr["gamma"] > 0.0)


# ---------------------------------------------------------------- dilation


def test_dilate_disk_is_disk():
    f = shapes.disk(1.0, 256)
    d = dilate(f, 0.5).front
    r = np.hypot(*d.markers.T)
    # markers sit within the polygonization error of the circle of radius 1.5
    assert np.all(np.abs(r - 1.5) <= 1.5 * (1 - math.cos(math.pi / 256)) + 1e-12)
    assert hausdorff(d, shapes.disk(1.5, 512)) < 1e-3


def test_dilate_square_steiner_area():
    sq = shapes.square(2.0, 8)
    d = dilate(sq, 0.5, max_sagitta=1e-12)
    steiner = 4.0 + 8.0 * 0.5 + math.pi * 0.25
    assert d.front.area == pytest.approx(steiner, rel=1e-9)
    # offset markers at exact distance r from the base polyline
    assert np.allclose(-signed_distances(sq, d.offset_markers), 0.5, atol=sq.tol_geom)


def test_dilate_default_arc_step_bounded_by_base_resolution():
    sq = shapes.square(2.0, 8)
    d = dilate(sq, 0.5)
    step = 2 * math.pi / sq.n
    v = d.offset_markers
    # arc chords around the corner (-1,-1) subtend at most the base angular step
    corner = v[np.abs(np.hypot(*(v - [-1.0, -1.0]).T) - 0.5) < 1e-12]
    ang = np.sort(np.arctan2(*(corner - [-1.0, -1.0]).T[::-1]))
    ang = ang[(ang > -math.pi + 1e-9) & (ang < -math.pi / 2 - 1e-9)] if len(ang) > 2 else ang
    ang = np.concatenate(([-math.pi], ang, [-math.pi / 2]))
    assert np.max(np.diff(ang)) <= step + 1e-12


def test_dilate_rejects_nonpositive_radius(disk256):
    with pytest.raises(InvalidParameterError):
        dilate(disk256, 0.0)


@pytest.mark.parametrize("r", [0.1, 0.5, 2.0])
def test_dilation_distance_shift(r):
    rng = np.random.default_rng(11)
    for base in (shapes.disk(1.0, 512), shapes.ellipse(1.0, 0.6, 256), shapes.rounded_square_uniform(2.0, 0.2, 256)):
        dil = dilate(base, r, max_sagitta=1e-9 * base.diam).front
        lo, hi = base.markers.min(0), base.markers.max(0)
        x = rng.uniform(lo, hi, size=(400, 2))
        x = x[signed_distances(base, x) > 0.0][:100]
        assert len(x) == 100
        shift = signed_distances(dil, x) - signed_distances(base, x)
        assert np.max(np.abs(shift - r)) <= 1e-6 * (1 + r)


@pytest.mark.parametrize("r", [0.1, 0.5, 1.0])
def test_dilation_gamma_shift(r):
    for base in (shapes.disk(1.0, 512), shapes.ellipse(1.0, 0.6, 512), shapes.rounded_square_uniform(2.0, 0.2, 512)):
        dil = dilate(base, r).front
        mid = 0.5 * (base.markers + np.roll(base.markers, -1, axis=0))
        nu = base.outward_edge_normals
        idx = np.arange(0, base.n, 11)
        g0 = ray_lengths(base, mid[idx], -nu[idx])
        # same absolute predicate tolerance on both bodies
        g1 = ray_lengths(dil, mid[idx] + r * nu[idx], -nu[idx], tol=base.tol_geom, tol_gamma=base.tol_gamma)
        assert np.max(np.abs(g1 - g0 - r)) <= 2 * base.tol_gamma


@pytest.mark.parametrize("radius", [0.5, 1.0, 2.0])
@pytest.mark.parametrize("r", [0.01, 0.1, 1.0])
def test_curvature_transfer(radius, r):
    base = shapes.disk(radius, 512)
    dil = dilate(base, r).front
    k = curvatures(base)[0]
    assert np.allclose(curvatures(dil), k / (1 + k * r), rtol=5e-3)


# ---------------------------------------------------------------- intersection


def test_intersect_disjoint():
    a, b = shapes.two_disks(1.0, 1.0, 3.0, 128)
    assert intersect(a, b) is None


def test_intersect_identical(rsquare):
    c = intersect(rsquare, rsquare)
    assert c.area == pytest.approx(rsquare.area, rel=1e-9)


def test_intersect_lens_area():
    a, b = shapes.two_disks(1.0, 1.0, 1.0, 512)
    lens = intersect(a, b)
    exact = lens_area(1.0, 1.0)
    assert exact == pytest.approx(2 * math.acos(0.5) - 0.5 * math.sqrt(3.0), rel=1e-15)
    assert lens.area == pytest.approx(exact, rel=1e-4)
    est, err = monte_carlo_integral(lens, lambda p: np.ones(len(p)), 400_000, np.random.default_rng(2))
    assert abs(est - exact) <= 3 * err + 1e-4


def test_intersect_is_convex_and_inside_both():
    a, b = shapes.two_disks(1.0, 0.8, 1.2, 256)
    c = intersect(a, b)
    assert c.convex_checked
    assert np.all(signed_distances(a, c.markers) >= -a.tol_geom)
    assert np.all(signed_distances(b, c.markers) >= -b.tol_geom)


# ---------------------------------------------------------------- Condition 1


@pytest.mark.parametrize("r", [0.01, 0.1, 1.0, 10.0])
def test_condition_1_holds_for_convex(r, rsquare):
    for f in (shapes.disk(1.0, 128), shapes.ellipse(1.0, 0.4, 128), rsquare):
        ok, report = check_condition_1(f, r, resolution=80)
        assert ok, report


def test_condition_1_disk_radius_equal():
    ok, _ = check_condition_1(shapes.disk(1.0, 128), 1.0)
    assert ok


def test_condition_1_fails_for_l_shape():
    lsh = shapes.l_shape(fillet=0.05)
    ok, report = check_condition_1(lsh, 0.2)
    assert not ok
    assert report["n_fail"] > 0
    # direct exterior-ball search at the reported point: no disk of radius 2r touches there
    x = np.array(report["first_failure"])
    feet, dist, _ = nearest_feet(lsh, x[None])
    u = (x - feet[0]) / dist[0]
    center = feet[0] + 0.4 * u
    assert signed_distance(lsh, center) > -0.4


def test_remesh_preserves_marker_zero_and_spacing(rsquare):
    m = remesh_equal_arclength(rsquare.markers, 100)
    assert np.array_equal(m[0], rsquare.markers[0])
    # equal spacing in arclength of the old polyline: chords on straight parts agree exactly
    seg = np.hypot(*np.diff(np.vstack((m, m[:1])), axis=0).T)
    assert np.median(seg) == pytest.approx(rsquare.perimeter / 100, rel=1e-9)
    assert seg.min() >= 0.95 * np.median(seg)
