"""2D geometric kernel: obstacles, line-of-sight tests, coverage grids.

All obstacles live in the plane; walls are zero-thickness segments given by
center, length and orientation, circles by center and radius.  Blockage is
total: a link is either clear or blocked.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import EmptyGrid

# Tolerances (see tests for the contracts they pin down).
WALL_TOL = 1e-6  # a point within this distance of a wall counts as "on" it
SIGN_EPS = 1e-12  # relative tolerance of the orientation sign test


@dataclass(frozen=True)
class Point2:
    """A point in the plane, in meters."""

    x: float
    y: float

    def as_array(self) -> np.ndarray:
        return np.array([self.x, self.y], dtype=float)

    def distance_to(self, other: "Point2") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


@dataclass(frozen=True)
class Circle:
    """Circular obstacle (pillar footprint)."""

    center: Point2
    radius: float


@dataclass(frozen=True)
class Wall:
    """Zero-thickness wall segment given by center, length and orientation.

    Orientation is the angle of the wall axis in radians, normalized to [0, pi).
    """

    center: Point2
    length: float
    orientation: float

    def __post_init__(self):
        theta = self.orientation % math.pi
        object.__setattr__(self, "orientation", theta)


Obstacle = Union[Circle, Wall]


@dataclass(frozen=True)
class Cell:
    """Circular cell region."""

    center: Point2
    radius: float

    def contains(self, p: Point2) -> bool:
        return p.distance_to(self.center) <= self.radius


@dataclass(frozen=True)
class CoverageMap:
    """Grid coverage result: per-point covered flags and the covered fraction."""

    resolution: float
    xy: np.ndarray  # (n, 2) grid point coordinates
    covered: np.ndarray  # (n,) bool
    fraction: float

    @property
    def points(self) -> tuple:
        """The grid as a sequence of (Point2, covered) pairs."""
        return tuple(
            (Point2(float(x), float(y)), bool(c))
            for (x, y), c in zip(self.xy, self.covered)
        )


def wall_endpoints(w: Wall) -> tuple[Point2, Point2]:
    """Endpoints of a wall segment: center +/- (length/2) along its axis."""
    dx = 0.5 * w.length * math.cos(w.orientation)
    dy = 0.5 * w.length * math.sin(w.orientation)
    return (
        Point2(w.center.x - dx, w.center.y - dy),
        Point2(w.center.x + dx, w.center.y + dy),
    )


def _seg_point_distance(ax, ay, bx, by, px, py) -> float:
    """Distance from point (px,py) to segment (a,b), parameter clamped to [0,1]."""
    dx, dy = bx - ax, by - ay
    dd = dx * dx + dy * dy
    if dd == 0.0:
        return math.hypot(px - ax, py - ay)
    t = ((px - ax) * dx + (py - ay) * dy) / dd
    t = min(1.0, max(0.0, t))
    return math.hypot(px - (ax + t * dx), py - (ay + t * dy))


def _orient(ax, ay, bx, by, cx, cy) -> int:
    """Sign of the cross product (b-a) x (c-a), with a relative zero band."""
    v1x, v1y = bx - ax, by - ay
    v2x, v2y = cx - ax, cy - ay
    cross = v1x * v2y - v1y * v2x
    scale = abs(v1x * v2y) + abs(v1y * v2x)
    if abs(cross) <= SIGN_EPS * scale:
        return 0
    return 1 if cross > 0.0 else -1


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    """Whether collinear point p falls within the bounding box of segment (a,b)."""
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def _segments_intersect(ax, ay, bx, by, cx, cy, dx, dy) -> bool:
    """Segment (a,b) vs segment (c,d); collinear overlap counts as intersection."""
    o1 = _orient(ax, ay, bx, by, cx, cy)
    o2 = _orient(ax, ay, bx, by, dx, dy)
    o3 = _orient(cx, cy, dx, dy, ax, ay)
    o4 = _orient(cx, cy, dx, dy, bx, by)
    if o1 != o2 and o3 != o4 and o1 != 0 and o2 != 0 and o3 != 0 and o4 != 0:
        return True
    if o1 == 0 and _on_segment(ax, ay, bx, by, cx, cy):
        return True
    if o2 == 0 and _on_segment(ax, ay, bx, by, dx, dy):
        return True
    if o3 == 0 and _on_segment(cx, cy, dx, dy, ax, ay):
        return True
    if o4 == 0 and _on_segment(cx, cy, dx, dy, bx, by):
        return True
    return False


def segment_blocked(a: Point2, b: Point2, obstacles: Iterable[Obstacle]) -> bool:
    """Whether the link from a to b hits any obstacle.

    Circles block when the closest-point distance from the segment to the
    center is <= radius (tangency counts as blocked).  Walls block when the
    two segments intersect, collinear overlap included.
    """
    for obs in obstacles:
        if isinstance(obs, Circle):
            d = _seg_point_distance(a.x, a.y, b.x, b.y, obs.center.x, obs.center.y)
            if d <= obs.radius:
                return True
        else:
            p, q = wall_endpoints(obs)
            if _segments_intersect(a.x, a.y, b.x, b.y, p.x, p.y, q.x, q.y):
                return True
    return False


def point_in_obstacle(p: Point2, obstacles: Iterable[Obstacle]) -> bool:
    """Whether p lies inside/on a circle or within WALL_TOL of a wall."""
    for obs in obstacles:
        if isinstance(obs, Circle):
            if p.distance_to(obs.center) <= obs.radius:
                return True
        else:
            e0, e1 = wall_endpoints(obs)
            if _seg_point_distance(e0.x, e0.y, e1.x, e1.y, p.x, p.y) <= WALL_TOL:
                return True
    return False


def fraunhofer_distance(m_antennas: int, wavelength: float, spacing: float) -> float:
    """Far-field boundary 2*D^2/wavelength of a uniform linear array.

    D is the aperture (m_antennas - 1) * spacing, with spacing in meters.
    A single antenna has zero aperture, hence distance 0.
    """
    aperture = (m_antennas - 1) * spacing
    return 2.0 * aperture * aperture / wavelength


class _SceneArrays:
    """Obstacle geometry flattened to arrays for vectorized queries."""

    def __init__(self, obstacles: Sequence[Obstacle]):
        ccenters, cradii, wstarts, wends = [], [], [], []
        for obs in obstacles:
            if isinstance(obs, Circle):
                ccenters.append([obs.center.x, obs.center.y])
                cradii.append(obs.radius)
            else:
                e0, e1 = wall_endpoints(obs)
                wstarts.append([e0.x, e0.y])
                wends.append([e1.x, e1.y])
        self.circle_centers = np.array(ccenters, dtype=float).reshape(-1, 2)
        self.circle_radii = np.array(cradii, dtype=float)
        self.wall_starts = np.array(wstarts, dtype=float).reshape(-1, 2)
        self.wall_ends = np.array(wends, dtype=float).reshape(-1, 2)

    def points_in_obstacle(self, pts: np.ndarray) -> np.ndarray:
        """Boolean mask over pts (n,2): inside a circle or on a wall."""
        inside = np.zeros(len(pts), dtype=bool)
        if len(self.circle_radii):
            d2 = ((pts[:, None, :] - self.circle_centers[None, :, :]) ** 2).sum(-1)
            inside |= (d2 <= self.circle_radii[None, :] ** 2).any(axis=1)
        if len(self.wall_starts):
            seg = self.wall_ends - self.wall_starts  # (w,2)
            rel = pts[:, None, :] - self.wall_starts[None, :, :]  # (n,w,2)
            dd = (seg**2).sum(-1)
            t = np.einsum("nwc,wc->nw", rel, seg) / np.where(dd > 0, dd, 1.0)
            t = np.clip(t, 0.0, 1.0)
            closest = self.wall_starts[None, :, :] + t[..., None] * seg[None, :, :]
            dist2 = ((pts[:, None, :] - closest) ** 2).sum(-1)
            inside |= (dist2 <= WALL_TOL**2).any(axis=1)
        return inside

    def segments_blocked(self, origin: np.ndarray, pts: np.ndarray) -> np.ndarray:
        """Boolean mask: segment from origin (2,) to each point in pts (n,2) blocked."""
        blocked = np.zeros(len(pts), dtype=bool)
        if len(self.circle_radii):
            seg = pts - origin[None, :]  # (n,2)
            rel = self.circle_centers[None, :, :] - origin[None, None, :]  # (1,w,2)
            dd = (seg**2).sum(-1)  # (n,)
            t = np.einsum("nc,nwc->nw", seg, rel) / np.where(dd > 0, dd, 1.0)[:, None]
            t = np.clip(t, 0.0, 1.0)
            closest = origin[None, None, :] + t[..., None] * seg[:, None, :]
            dist2 = ((closest - self.circle_centers[None, :, :]) ** 2).sum(-1)
            blocked |= (dist2 <= self.circle_radii[None, :] ** 2).any(axis=1)
        if len(self.wall_starts):
            blocked |= self._wall_hits(origin, pts)
        return blocked

    def _wall_hits(self, origin: np.ndarray, pts: np.ndarray) -> np.ndarray:
        def orient(ax, ay, bx, by, cx, cy):
            v1x, v1y = bx - ax, by - ay
            v2x, v2y = cx - ax, cy - ay
            cross = v1x * v2y - v1y * v2x
            scale = np.abs(v1x * v2y) + np.abs(v1y * v2x)
            out = np.sign(cross)
            out[np.abs(cross) <= SIGN_EPS * scale] = 0
            return out

        n = len(pts)
        hits = np.zeros(n, dtype=bool)
        ox, oy = origin
        px, py = pts[:, 0], pts[:, 1]
        for (wx0, wy0), (wx1, wy1) in zip(self.wall_starts, self.wall_ends):
            o1 = orient(
                np.full(n, ox), np.full(n, oy), px, py, np.full(n, wx0), np.full(n, wy0)
            )
            o2 = orient(
                np.full(n, ox), np.full(n, oy), px, py, np.full(n, wx1), np.full(n, wy1)
            )
            o3 = orient(
                np.full(n, wx0), np.full(n, wy0), np.full(n, wx1), np.full(n, wy1),
                np.full(n, ox), np.full(n, oy),
            )
            o4 = orient(
                np.full(n, wx0), np.full(n, wy0), np.full(n, wx1), np.full(n, wy1),
                px, py,
            )
            general = (o1 != o2) & (o3 != o4) & (o1 != 0) & (o2 != 0) & (o3 != 0) & (o4 != 0)
            col1 = (o1 == 0) & _box_mask(ox, oy, px, py, wx0, wy0)
            col2 = (o2 == 0) & _box_mask(ox, oy, px, py, wx1, wy1)
            col3 = (o3 == 0) & _box_mask_scalar(wx0, wy0, wx1, wy1, ox, oy, n)
            col4 = (o4 == 0) & _box_mask_pts(wx0, wy0, wx1, wy1, px, py)
            hits |= general | col1 | col2 | col3 | col4
        return hits


def _box_mask(ax, ay, bx, by, cx, cy):
    return (
        (np.minimum(ax, bx) <= cx)
        & (cx <= np.maximum(ax, bx))
        & (np.minimum(ay, by) <= cy)
        & (cy <= np.maximum(ay, by))
    )


def _box_mask_scalar(ax, ay, bx, by, cx, cy, n):
    ok = min(ax, bx) <= cx <= max(ax, bx) and min(ay, by) <= cy <= max(ay, by)
    return np.full(n, ok)


def _box_mask_pts(ax, ay, bx, by, px, py):
    return (
        (min(ax, bx) <= px)
        & (px <= max(ax, bx))
        & (min(ay, by) <= py)
        & (py <= max(ay, by))
    )


def grid_points(cell: Cell, resolution: float) -> np.ndarray:
    """Axis-aligned lattice inside the cell, the cell center on a lattice point."""
    if resolution <= 0:
        raise ValueError("resolution must be positive")
    if resolution > 2.0 * cell.radius:
        raise EmptyGrid(f"resolution {resolution} exceeds cell diameter {2 * cell.radius}")
    n = int(math.floor(cell.radius / resolution))
    offsets = np.arange(-n, n + 1) * resolution
    xx, yy = np.meshgrid(offsets, offsets, indexing="ij")
    pts = np.column_stack([xx.ravel() + cell.center.x, yy.ravel() + cell.center.y])
    keep = (pts[:, 0] - cell.center.x) ** 2 + (pts[:, 1] - cell.center.y) ** 2
    return pts[keep <= cell.radius**2 + 1e-12]


def coverage(
    cell: Cell,
    bs: Point2,
    obstacles: Sequence[Obstacle],
    ris: Point2 | None = None,
    resolution: float = 0.1,
) -> CoverageMap:
    """Fraction of the cell grid with line of sight to the BS, directly or via the RIS.

    Grid points inside obstacles are excluded.  A point is covered when its
    direct BS link is clear, or when a RIS is given, the BS-RIS link is clear
    and the RIS-point link is clear.
    """
    if ris is not None and not cell.contains(ris):
        raise ValueError("ris position must lie inside the cell")
    pts = grid_points(cell, resolution)
    scene = _SceneArrays(obstacles)
    pts = pts[~scene.points_in_obstacle(pts)]
    if len(pts) == 0:
        raise EmptyGrid("no grid points remain outside the obstacles")
    covered = ~scene.segments_blocked(bs.as_array(), pts)
    if ris is not None and not segment_blocked(bs, ris, obstacles):
        covered |= ~scene.segments_blocked(ris.as_array(), pts)
    fraction = float(covered.sum()) / float(len(pts))
    return CoverageMap(resolution=resolution, xy=pts, covered=covered, fraction=fraction)
