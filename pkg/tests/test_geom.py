import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from risplace import geom
from risplace.errors import EmptyGrid
from risplace.geom import Cell, Circle, Point2, Wall

finite = st.floats(min_value=-50, max_value=50, allow_nan=False)


def pts_close(a: Point2, b: Point2, tol=1e-12) -> bool:
    return abs(a.x - b.x) <= tol and abs(a.y - b.y) <= tol


class TestWallEndpoints:
    def test_axis_aligned(self):
        p, q = geom.wall_endpoints(Wall(Point2(0, 0), 2.0, 0.0))
        assert pts_close(p, Point2(-1, 0)) and pts_close(q, Point2(1, 0))

    def test_vertical(self):
        p, q = geom.wall_endpoints(Wall(Point2(0, 0), 2.0, math.pi / 2))
        assert pts_close(p, Point2(0, -1)) and pts_close(q, Point2(0, 1))

    def test_diagonal(self):
        p, q = geom.wall_endpoints(Wall(Point2(1, 1), 2 * math.sqrt(2), math.pi / 4))
        assert pts_close(p, Point2(0, 0)) and pts_close(q, Point2(2, 2))

    def test_orientation_normalized_to_half_turn(self):
        w = Wall(Point2(0, 0), 2.0, math.pi + 0.25)
        assert 0 <= w.orientation < math.pi
        assert w.orientation == pytest.approx(0.25)


class TestSegmentBlocked:
    def test_no_obstacles(self):
        assert not geom.segment_blocked(Point2(0, 0), Point2(10, 0), [])

    def test_circle_through_center(self):
        assert geom.segment_blocked(
            Point2(0, 0), Point2(10, 0), [Circle(Point2(5, 0), 1.0)]
        )

    def test_wall_near_miss(self):
        # wall spans (5, 0.5)-(5, 2.5): does not reach the segment on y=0
        wall = Wall(Point2(5, 1.5), 2.0, math.pi / 2)
        assert not geom.segment_blocked(Point2(0, 0), Point2(10, 0), [wall])

    def test_wall_crossing(self):
        wall = Wall(Point2(5, 0), 2.0, math.pi / 2)
        assert geom.segment_blocked(Point2(0, 0), Point2(10, 0), [wall])

    def test_tangent_circle_counts_as_blocked(self):
        assert geom.segment_blocked(
            Point2(0, 0), Point2(10, 0), [Circle(Point2(5, 1), 1.0)]
        )

    def test_collinear_overlap_blocks(self):
        wall = Wall(Point2(5, 0), 2.0, 0.0)
        assert geom.segment_blocked(Point2(0, 0), Point2(10, 0), [wall])

    @given(
        ax=finite, ay=finite, bx=finite, by=finite,
        cx=finite, cy=finite, r=st.floats(min_value=0.01, max_value=10),
        wx=finite, wy=finite, wl=st.floats(min_value=0.01, max_value=20),
        wo=st.floats(min_value=0, max_value=3.14),
    )
    @settings(max_examples=300, deadline=None)
    def test_symmetry(self, ax, ay, bx, by, cx, cy, r, wx, wy, wl, wo):
        a, b = Point2(ax, ay), Point2(bx, by)
        if a.distance_to(b) == 0:
            return
        obs = [Circle(Point2(cx, cy), r), Wall(Point2(wx, wy), wl, wo)]
        assert geom.segment_blocked(a, b, obs) == geom.segment_blocked(b, a, obs)

    @given(
        ax=finite, ay=finite, bx=finite, by=finite,
        cx=finite, cy=finite, r=st.floats(min_value=0.01, max_value=10),
        wx=finite, wy=finite, wl=st.floats(min_value=0.01, max_value=20),
        wo=st.floats(min_value=0, max_value=3.14),
    )
    @settings(max_examples=300, deadline=None)
    def test_more_obstacles_never_unblock(self, ax, ay, bx, by, cx, cy, r, wx, wy, wl, wo):
        a, b = Point2(ax, ay), Point2(bx, by)
        if a.distance_to(b) == 0:
            return
        first = [Circle(Point2(cx, cy), r)]
        both = first + [Wall(Point2(wx, wy), wl, wo)]
        if geom.segment_blocked(a, b, first):
            assert geom.segment_blocked(a, b, both)


class TestPointInObstacle:
    def test_circle_center(self):
        assert geom.point_in_obstacle(Point2(5, 0), [Circle(Point2(5, 0), 1.0)])

    def test_empty(self):
        assert not geom.point_in_obstacle(Point2(0, 0), [])

    def test_on_wall_endpoint(self):
        wall = Wall(Point2(5, 1.5), 2.0, math.pi / 2)  # endpoints (5,0.5)-(5,2.5)
        assert geom.point_in_obstacle(Point2(5, 0.5), [wall])

    def test_near_wall_within_tolerance(self):
        wall = Wall(Point2(5, 1.5), 2.0, math.pi / 2)
        assert geom.point_in_obstacle(Point2(5 + 0.5 * geom.WALL_TOL, 1.5), [wall])
        assert not geom.point_in_obstacle(Point2(5.01, 1.5), [wall])


class TestFraunhofer:
    def test_single_antenna(self):
        assert geom.fraunhofer_distance(1, 0.125, 0.0625) == 0.0

    def test_sixteen_antennas(self):
        assert geom.fraunhofer_distance(16, 0.125, 0.0625) == pytest.approx(14.0625)

    def test_two_antennas(self):
        assert geom.fraunhofer_distance(2, 1.0, 0.5) == pytest.approx(0.5)

    def test_monotone_in_antennas_and_spacing(self):
        vals = [geom.fraunhofer_distance(m, 0.125, 0.0625) for m in range(1, 20)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))
        vals = [geom.fraunhofer_distance(8, 0.125, s) for s in np.linspace(0.01, 0.2, 10)]
        assert all(b >= a for a, b in zip(vals, vals[1:]))


def _sampling_oracle(a: Point2, b: Point2, obstacles, step=1e-3) -> bool:
    """Dense point sampling of the segment against point_in_obstacle."""
    length = a.distance_to(b)
    n = max(2, int(length / step))
    ts = np.linspace(0.0, 1.0, n + 1)
    return any(
        geom.point_in_obstacle(Point2(a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)), obstacles)
        for t in ts
    )


def _shapely_oracle(a: Point2, b: Point2, obstacles) -> bool:
    from shapely.geometry import LineString, Point as ShPoint

    seg = LineString([(a.x, a.y), (b.x, b.y)])
    for obs in obstacles:
        if isinstance(obs, Circle):
            if seg.distance(ShPoint(obs.center.x, obs.center.y)) <= obs.radius:
                return True
        else:
            e0, e1 = geom.wall_endpoints(obs)
            if seg.intersects(LineString([(e0.x, e0.y), (e1.x, e1.y)])):
                return True
    return False


def test_blocked_agrees_with_circle_sampling_oracle():
    rng = np.random.default_rng(42)
    mismatches = 0
    for _ in range(500):
        a = Point2(*rng.uniform(-5, 5, 2))
        b = Point2(*rng.uniform(-5, 5, 2))
        if a.distance_to(b) < 1e-6:
            continue
        obstacles = [
            Circle(Point2(*rng.uniform(-5, 5, 2)), rng.uniform(0.2, 2.0))
            for _ in range(rng.integers(1, 4))
        ]
        # skip scenes in the tangency band where sampling cannot resolve contact
        d = min(
            abs(geom._seg_point_distance(a.x, a.y, b.x, b.y, o.center.x, o.center.y) - o.radius)
            for o in obstacles
        )
        if d < 1e-3:
            continue
        if geom.segment_blocked(a, b, obstacles) != _sampling_oracle(a, b, obstacles):
            mismatches += 1
    assert mismatches == 0


def test_blocked_agrees_with_independent_geometry_library():
    rng = np.random.default_rng(7)
    for _ in range(400):
        a = Point2(*rng.uniform(-5, 5, 2))
        b = Point2(*rng.uniform(-5, 5, 2))
        if a.distance_to(b) < 1e-6:
            continue
        obstacles = [
            Circle(Point2(*rng.uniform(-5, 5, 2)), rng.uniform(0.2, 2.0)),
            Wall(Point2(*rng.uniform(-5, 5, 2)), rng.uniform(0.5, 6.0), rng.uniform(0, math.pi)),
        ]
        assert geom.segment_blocked(a, b, obstacles) == _shapely_oracle(a, b, obstacles)


def test_bulk_blockage_matches_scalar_path():
    rng = np.random.default_rng(3)
    origin = Point2(-4.0, 1.0)
    obstacles = [
        Circle(Point2(1, 0.5), 1.2),
        Wall(Point2(3, -1), 4.0, 0.7),
        Wall(Point2(0, 3), 2.5, math.pi / 2),
    ]
    pts = rng.uniform(-6, 6, size=(400, 2))
    scene = geom._SceneArrays(obstacles)
    bulk = scene.segments_blocked(origin.as_array(), pts)
    scalar = np.array(
        [geom.segment_blocked(origin, Point2(x, y), obstacles) for x, y in pts]
    )
    assert (bulk == scalar).all()


def test_bulk_point_in_obstacle_matches_scalar_path():
    rng = np.random.default_rng(4)
    obstacles = [Circle(Point2(1, 0.5), 1.2), Wall(Point2(3, -1), 4.0, 0.7)]
    pts = rng.uniform(-6, 6, size=(400, 2))
    scene = geom._SceneArrays(obstacles)
    bulk = scene.points_in_obstacle(pts)
    scalar = np.array([geom.point_in_obstacle(Point2(x, y), obstacles) for x, y in pts])
    assert (bulk == scalar).all()


class TestCoverage:
    def test_full_without_obstacles(self):
        cov = geom.coverage(Cell(Point2(0, 0), 5.0), Point2(0, 0), [], None, 0.5)
        assert cov.fraction == 1.0

    def test_zero_when_walled_off(self):
        cell = Cell(Point2(10, 0), 3.0)
        wall = Wall(Point2(5, 0), 40.0, math.pi / 2)
        cov = geom.coverage(cell, Point2(0, 0), [wall], None, 0.5)
        assert cov.fraction == 0.0

    def test_empty_grid_error(self):
        with pytest.raises(EmptyGrid):
            geom.coverage(Cell(Point2(0, 0), 1.0), Point2(0, 0), [], None, 3.0)

    def test_ris_never_reduces_coverage(self):
        cell = Cell(Point2(10, 0), 5.0)
        obstacles = [Circle(Point2(7, 0), 1.0)]
        plain = geom.coverage(cell, Point2(0, 0), obstacles, None, 0.25)
        helped = geom.coverage(cell, Point2(0, 0), obstacles, Point2(10, 4), 0.25)
        assert helped.fraction >= plain.fraction

    def test_ris_outside_cell_rejected(self):
        with pytest.raises(ValueError):
            geom.coverage(Cell(Point2(0, 0), 5.0), Point2(0, 0), [], Point2(9, 9), 0.5)

    def test_grid_count_matches_disk_lattice(self):
        cell = Cell(Point2(100, 30), 20.0)
        pts = geom.grid_points(cell, 0.1)
        # independent count of lattice points in a disk of radius 200 steps
        n = 0
        for kx in range(-200, 201):
            n += 2 * int(math.floor(math.sqrt(200**2 - kx**2))) + 1
        assert len(pts) == n

    def test_obstacle_points_excluded(self):
        cell = Cell(Point2(0, 0), 5.0)
        cov = geom.coverage(cell, Point2(-4, 0), [Circle(Point2(0, 0), 1.0)], None, 0.5)
        assert not any(
            p.distance_to(Point2(0, 0)) <= 1.0 for p, _ in cov.points
        )
