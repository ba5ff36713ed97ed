"""Convex marker fronts and the distance geometry built on them.

A front is a closed counterclockwise polyline.  Interior distance, nearest
points, ray lengths (the ridge function) and the vertex curvature are all
computed directly from the markers; nothing is rasterised.
"""

from __future__ import annotations

import logging
import math
from dataclasses import InitVar, dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .errors import DegenerateFrontError, InvalidParameterError, InvalidRayError

logger = logging.getLogger(__name__)

MIN_MARKERS = 8
TOL_GEOM_REL = 1e-9
TOL_GAMMA_REL = 1e-9
TOL_CONVEX_REL = 1e-12
TOL_KG = 1e-6

_CHUNK = 4096


def _diameter(pts: np.ndarray) -> float:
    """Largest pairwise distance, by rotating calipers on the convex hull."""
    try:
        hull = pts[ConvexHull(pts).vertices]  # counterclockwise in 2D
    except QhullError:
        hull = pts
    n = len(hull)
    if n < 4:
        return float(max(np.hypot(*(hull[i] - hull[j])) for i in range(n) for j in range(n)))

    def area2(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    best = 0.0
    j = 1
    for i in range(n):
        a, b = hull[i], hull[(i + 1) % n]
        while area2(a, b, hull[(j + 1) % n]) > area2(a, b, hull[j]):
            j = (j + 1) % n
        best = max(best, float(np.hypot(*(a - hull[j]))), float(np.hypot(*(b - hull[j]))))
    return best


class Point2(NamedTuple):
    x: float
    y: float


def _as_points(p) -> np.ndarray:
    arr = np.asarray(p, dtype=float)
    if arr.shape == (2,):
        arr = arr[None, :]
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise InvalidParameterError(f"expected points of shape (M, 2), got {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class ConvexFront:
    """Closed counterclockwise marker polyline.

    ``validate=False`` skips the convexity test (orientation and marker
    spacing are still checked); it exists for diagnostic inputs such as
    nonconvex shapes fed to :func:`check_condition_1`.
    """

    markers: np.ndarray
    validate: InitVar[bool] = True
    convex_checked: bool = field(init=False, default=False)

    def __post_init__(self, validate: bool) -> None:
        m = np.array(self.markers, dtype=float)
        if m.ndim != 2 or m.shape[1] != 2:
            raise DegenerateFrontError(f"markers must have shape (N, 2), got {m.shape}")
        if m.shape[0] < 3 or (validate and m.shape[0] < MIN_MARKERS):
            raise DegenerateFrontError(f"front needs at least {MIN_MARKERS} markers, got {m.shape[0]}")
        if not np.all(np.isfinite(m)):
            raise DegenerateFrontError("non-finite marker coordinates")
        m.setflags(write=False)
        object.__setattr__(self, "markers", m)
        if np.min(self.edge_lengths) <= 1e-14 * max(self.diam, 1e-300):
            raise DegenerateFrontError("coincident consecutive markers")
        if self.area <= 0.0:
            raise DegenerateFrontError("front must be counterclockwise with positive area")
        if validate:
            margin = self.convexity_margin
            if margin < -self.tol_convex:
                raise DegenerateFrontError(f"front is not convex (min cross product {margin:.3e})")
            turning = float(np.sum(self.turning_angles))
            if abs(turning - 2.0 * math.pi) > 1e-6:
                raise DegenerateFrontError(f"front is not simple (total turning {turning:.6f})")
            object.__setattr__(self, "convex_checked", True)

    def __len__(self) -> int:
        return self.markers.shape[0]

    @property
    def n(self) -> int:
        return self.markers.shape[0]

    @cached_property
    def edges(self) -> np.ndarray:
        return np.roll(self.markers, -1, axis=0) - self.markers

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        return np.hypot(self.edges[:, 0], self.edges[:, 1])

    @cached_property
    def arclength(self) -> np.ndarray:
        """Arclength position of each marker, starting at 0 for marker 0."""
        return np.concatenate(([0.0], np.cumsum(self.edge_lengths)[:-1]))

    @cached_property
    def perimeter(self) -> float:
        return float(np.sum(self.edge_lengths))

    @cached_property
    def area(self) -> float:
        x, y = self.markers[:, 0], self.markers[:, 1]
        return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))

    @cached_property
    def centroid(self) -> np.ndarray:
        x, y = self.markers[:, 0], self.markers[:, 1]
        xn, yn = np.roll(x, -1), np.roll(y, -1)
        c = x * yn - xn * y
        a6 = 6.0 * self.area
        return np.array([np.sum((x + xn) * c) / a6, np.sum((y + yn) * c) / a6])

    @cached_property
    def diam(self) -> float:
        return _diameter(self.markers)

    @cached_property
    def outward_edge_normals(self) -> np.ndarray:
        e = self.edges / self.edge_lengths[:, None]
        return np.column_stack((e[:, 1], -e[:, 0]))

    @cached_property
    def inner_vertex_normals(self) -> np.ndarray:
        """Inward unit normals at the markers: bisector of the adjacent edge normals."""
        nu = self.outward_edge_normals
        s = nu + np.roll(nu, 1, axis=0)
        norm = np.hypot(s[:, 0], s[:, 1])
        if np.any(norm < 1e-12):
            raise DegenerateFrontError("front folds back on itself (antiparallel edges)")
        return -s / norm[:, None]

    @cached_property
    def turning_angles(self) -> np.ndarray:
        """Exterior angle at each marker, in (-pi, pi)."""
        e_in = np.roll(self.edges, 1, axis=0)
        e_out = self.edges
        cross = e_in[:, 0] * e_out[:, 1] - e_in[:, 1] * e_out[:, 0]
        dot = np.sum(e_in * e_out, axis=1)
        return np.arctan2(cross, dot)

    @cached_property
    def convexity_margin(self) -> float:
        e_in = np.roll(self.edges, 1, axis=0)
        cross = e_in[:, 0] * self.edges[:, 1] - e_in[:, 1] * self.edges[:, 0]
        return float(cross.min())

    @property
    def tol_geom(self) -> float:
        return TOL_GEOM_REL * self.diam

    @property
    def tol_gamma(self) -> float:
        return TOL_GAMMA_REL * self.diam

    @property
    def tol_convex(self) -> float:
        return TOL_CONVEX_REL * self.diam ** 2

    @property
    def min_spacing(self) -> float:
        return float(self.edge_lengths.min())

    def translated(self, offset) -> "ConvexFront":
        return ConvexFront(self.markers + np.asarray(offset, dtype=float))


@dataclass(frozen=True)
class RaySample:
    foot: Point2
    inner_normal: tuple[float, float]
    kappa: float
    gamma: float
    arclength: float
    delta: float | None = None
    velocity: float | None = None


@dataclass(frozen=True, eq=False)
class DilatedFront:
    base: ConvexFront
    radius: float
    offset_markers: np.ndarray

    @cached_property
    def front(self) -> ConvexFront:
        return ConvexFront(self.offset_markers)


# ---------------------------------------------------------------------------
# distance primitives


def _closest_on_segments(front: ConvexFront, pts: np.ndarray):
    """Squared distance and segment parameter from every point to every edge."""
    a = front.markers
    d = front.edges
    len2 = front.edge_lengths ** 2
    rx = pts[:, 0:1] - a[None, :, 0]
    ry = pts[:, 1:2] - a[None, :, 1]
    t = np.clip((rx * d[:, 0] + ry * d[:, 1]) / len2, 0.0, 1.0)
    ex = rx - t * d[:, 0]
    ey = ry - t * d[:, 1]
    return ex * ex + ey * ey, t


def _inside(front: ConvexFront, pts: np.ndarray) -> np.ndarray:
    a = front.markers
    b = np.roll(a, -1, axis=0)
    px, py = pts[:, 0:1], pts[:, 1:2]
    ay, by = a[None, :, 1], b[None, :, 1]
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xcross = a[None, :, 0] + (py - ay) * (b[None, :, 0] - a[None, :, 0]) / (by - ay)
    hits = straddle & (px < xcross)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


def _segment_signed(front: ConvexFront, pts: np.ndarray) -> np.ndarray:
    d2, _ = _closest_on_segments(front, pts)
    dist = np.sqrt(d2.min(axis=1))
    return np.where(_inside(front, pts), dist, -dist)


@dataclass(frozen=True)
class _Lines:
    normals: np.ndarray
    offsets: np.ndarray


def _support_lines(front: ConvexFront) -> _Lines:
    nu = front.outward_edge_normals
    return _Lines(nu, np.einsum("nk,nk->n", nu, front.markers))


def signed_distances(front: ConvexFront, pts) -> np.ndarray:
    """Vectorised signed distance: positive inside, negative outside."""
    pts = _as_points(pts)
    out = np.empty(len(pts))
    step = max(1, _CHUNK * 64 // max(front.n, 1))
    lines = _support_lines(front) if front.convex_checked else None
    for start in range(0, len(pts), step):
        block = pts[start:start + step]
        if lines is None:
            out[start:start + step] = _segment_signed(front, block)
            continue
        # inside a convex polygon the distance is the smallest edge-line distance
        line_d = (lines.offsets[None, :] - block @ lines.normals.T).min(axis=1)
        res = line_d.copy()
        outside = line_d <= 0.0
        if np.any(outside):
            d2, _ = _closest_on_segments(front, block[outside])
            res[outside] = -np.sqrt(d2.min(axis=1))
        out[start:start + step] = res
    return out


def signed_distance(front: ConvexFront, p) -> float:
    return float(signed_distances(front, p)[0])


def nearest_feet(front: ConvexFront, pts) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Representative nearest boundary point of each query point.

    Returns (feet, distances, arclength position of the feet).  Ties are
    broken towards the smallest arclength because ``argmin`` picks the first
    edge.
    """
    pts = _as_points(pts)
    feet = np.empty_like(pts)
    dist = np.empty(len(pts))
    arc = np.empty(len(pts))
    step = max(1, _CHUNK * 64 // max(front.n, 1))
    for start in range(0, len(pts), step):
        block = pts[start:start + step]
        d2, t = _closest_on_segments(front, block)
        j = np.argmin(d2, axis=1)
        tj = t[np.arange(len(block)), j]
        feet[start:start + step] = front.markers[j] + tj[:, None] * front.edges[j]
        dist[start:start + step] = np.sqrt(d2[np.arange(len(block)), j])
        arc[start:start + step] = front.arclength[j] + tj * front.edge_lengths[j]
    return feet, dist, arc


def nearest_points(front: ConvexFront, p, tol: float | None = None) -> list[Point2]:
    """All boundary points whose distance to ``p`` is within ``tol`` of the minimum.

    The first element is the representative: the one with smallest arclength.
    """
    if tol is None:
        tol = front.tol_geom
    q = _as_points(p)
    d2, t = _closest_on_segments(front, q)
    dist = np.sqrt(d2[0])
    cand = np.flatnonzero(dist <= dist.min() + tol)
    pts = front.markers[cand] + t[0, cand, None] * front.edges[cand]
    arcs = front.arclength[cand] + t[0, cand] * front.edge_lengths[cand]
    arcs = np.where(arcs >= front.perimeter - tol, arcs - front.perimeter, arcs)
    order = np.argsort(arcs, kind="stable")
    out: list[np.ndarray] = []
    for k in order:
        if all(np.hypot(*(pts[k] - o)) > tol for o in out):
            out.append(pts[k])
    return [Point2(float(x), float(y)) for x, y in out]


# ---------------------------------------------------------------------------
# curvature and rays


def curvatures(front: ConvexFront) -> np.ndarray:
    """Circumcircle curvature at every marker (positive for convex turns)."""
    p0 = np.roll(front.markers, 1, axis=0)
    p1 = front.markers
    p2 = np.roll(front.markers, -1, axis=0)
    a = np.hypot(*(p1 - p0).T)
    b = np.hypot(*(p2 - p1).T)
    c = np.hypot(*(p2 - p0).T)
    cross = (p1 - p0)[:, 0] * (p2 - p1)[:, 1] - (p1 - p0)[:, 1] * (p2 - p1)[:, 0]
    if np.any(a * b * c == 0.0):
        raise DegenerateFrontError("coincident markers in curvature stencil")
    return 2.0 * cross / (a * b * c)


def curvature_at(front: ConvexFront, i: int) -> float:
    n = front.n
    if not 0 <= i < n:
        raise InvalidParameterError(f"marker index {i} outside 0..{n - 1}")
    p0, p1, p2 = front.markers[(i - 1) % n], front.markers[i % n], front.markers[(i + 1) % n]
    a = math.dist(p0, p1)
    b = math.dist(p1, p2)
    c = math.dist(p0, p2)
    if a == 0.0 or b == 0.0 or c == 0.0:
        raise DegenerateFrontError(f"coincident markers around index {i}")
    cross = (p1[0] - p0[0]) * (p2[1] - p1[1]) - (p1[1] - p0[1]) * (p2[0] - p1[0])
    return 2.0 * cross / (a * b * c)


def ray_slopes(front: ConvexFront, feet: np.ndarray, normals: np.ndarray) -> np.ndarray:
    """Initial growth rate of the distance function along each ray.

    For a foot on the interior of an edge with the edge normal this is 1;
    at a marker with the bisector normal it is cos(turning / 2).
    """
    d2, _ = _closest_on_segments(front, feet)
    incident = d2 <= front.tol_geom ** 2
    inner = -front.outward_edge_normals
    dots = normals @ inner.T
    return np.where(incident, dots, np.inf).min(axis=1)


def ray_lengths(front: ConvexFront, feet, normals, slopes=None, tol: float | None = None,
                tol_gamma: float | None = None) -> np.ndarray:
    """Ridge-function values for many rays at once (lock-step bisection).

    gamma = sup{ s : d(y + s n) >= c s - tol }, where c is the initial slope
    of d along the ray.  The predicate is monotone for convex fronts.  Past a
    ridge branch where d falls away slowly (nearly parallel edges, angle phi
    between their normals) the predicate keeps holding for about
    tol / (1 - cos phi); comparing gamma between bodies therefore needs the
    same absolute ``tol`` for both.  Defaults are the front's tolerances.
    """
    feet = _as_points(feet)
    normals = _as_points(normals)
    if slopes is None:
        slopes = ray_slopes(front, feet, normals)
    slopes = np.asarray(slopes, dtype=float)
    if np.any(~(slopes > 1e-12)):
        bad = int(np.argmax(~(slopes > 1e-12)))
        raise InvalidRayError(
            f"ray {bad} does not enter the body (initial slope {slopes[bad]:.3e})"
        )
    tol = front.tol_geom if tol is None else float(tol)
    lo = np.zeros(len(feet))
    hi = np.full(len(feet), front.diam)
    top_ok = signed_distances(front, feet + hi[:, None] * normals) >= slopes * hi - tol
    lo[top_ok] = hi[top_ok]
    active = ~top_ok
    tol_gamma = front.tol_gamma if tol_gamma is None else float(tol_gamma)
    while np.any(active & (hi - lo > tol_gamma)):
        idx = np.flatnonzero(active & (hi - lo > tol_gamma))
        mid = 0.5 * (lo[idx] + hi[idx])
        ok = signed_distances(front, feet[idx] + mid[:, None] * normals[idx]) >= slopes[idx] * mid - tol
        lo[idx] = np.where(ok, mid, lo[idx])
        hi[idx] = np.where(ok, hi[idx], mid)
    return lo


def ray_length_gamma(front: ConvexFront, y, n) -> float:
    y = _as_points(y)
    n = _as_points(n)
    norm = float(np.hypot(*n[0]))
    if not norm > 0.0:
        raise InvalidRayError("zero ray direction")
    n = n / norm
    if abs(signed_distance(front, y)) > 10.0 * front.tol_geom:
        raise InvalidParameterError("ray foot is not on the front")
    return float(ray_lengths(front, y, n)[0])


def sample_rays(front: ConvexFront) -> list[RaySample]:
    """One ray per marker, with curvature and ridge length.

    gamma is capped at the osculating radius 1/kappa: a touching interior
    ball can never be larger than the circle of curvature, and the marker
    polyline resolves that bound only approximately.
    """
    kappa = curvatures(front)
    normals = front.inner_vertex_normals
    slopes = np.cos(0.5 * front.turning_angles)
    gamma = ray_lengths(front, front.markers, normals, slopes)
    with np.errstate(divide="ignore"):
        cap = np.where(kappa > 0.0, 1.0 / kappa, np.inf)
    capped = gamma > cap
    if np.any(capped):
        logger.debug("capped gamma at 1/kappa on %d of %d rays", int(capped.sum()), front.n)
    gamma = np.minimum(gamma, cap)
    arc = front.arclength
    return [
        RaySample(
            foot=Point2(float(front.markers[i, 0]), float(front.markers[i, 1])),
            inner_normal=(float(normals[i, 0]), float(normals[i, 1])),
            kappa=float(kappa[i]),
            gamma=float(gamma[i]),
            arclength=float(arc[i]),
        )
        for i in range(front.n)
    ]


def ray_arrays(rays: Sequence[RaySample]) -> dict[str, np.ndarray]:
    """Stack a ray list into arrays keyed by field name."""
    out = {
        "foot": np.array([r.foot for r in rays], dtype=float),
        "normal": np.array([r.inner_normal for r in rays], dtype=float),
        "kappa": np.array([r.kappa for r in rays]),
        "gamma": np.array([r.gamma for r in rays]),
        "arclength": np.array([r.arclength for r in rays]),
        "delta": np.array([0.0 if r.delta is None else r.delta for r in rays]),
    }
    out["velocity"] = np.array([np.nan if r.velocity is None else r.velocity for r in rays])
    return out


# ---------------------------------------------------------------------------
# dilation, intersection, Condition 1


def dilate(front: ConvexFront, r: float, max_sagitta: float | None = None) -> DilatedFront:
    """Minkowski sum with a disk of radius ``r``.

    Vertex arcs are sampled at the mean angular step of the base front, so a
    smooth base gives an evenly spaced offset curve whose discrete curvature
    is comparable with the base.  ``max_sagitta`` refines the arcs until no
    chord is farther than that from the true arc, for distance-level checks.
    """
    if not r > 0.0:
        raise InvalidParameterError(f"dilation radius must be positive, got {r}")
    nu = front.outward_edge_normals
    phi_out = np.arctan2(nu[:, 1], nu[:, 0])
    phi_in = np.roll(phi_out, 1)
    turn = front.turning_angles
    step = 2.0 * math.pi / front.n
    if max_sagitta is not None:
        if not max_sagitta > 0.0:
            raise InvalidParameterError("max_sagitta must be positive")
        step = min(step, 2.0 * math.acos(max(1.0 - max_sagitta / r, -1.0)))
    pts = []
    for i in range(front.n):
        v = front.markers[i]
        if turn[i] <= 1e-12:
            pts.append(v + r * nu[i])
            continue
        k = max(1, math.ceil(turn[i] / step - 1e-9))
        phis = phi_in[i] + turn[i] * np.arange(k + 1) / k
        pts.extend(v + r * np.column_stack((np.cos(phis), np.sin(phis))))
    return DilatedFront(base=front, radius=float(r), offset_markers=np.array(pts))


def _clip_halfplane(poly: np.ndarray, a: np.ndarray, b: np.ndarray, eps: float) -> np.ndarray:
    """Keep the part of ``poly`` on the left of the directed line a -> b."""
    e = b - a
    side = e[0] * (poly[:, 1] - a[1]) - e[1] * (poly[:, 0] - a[0])
    inside = side >= -eps
    if inside.all():
        return poly
    if not inside.any():
        return poly[:0]
    prev = np.roll(poly, 1, axis=0)
    side_prev = np.roll(side, 1)
    inside_prev = np.roll(inside, 1)
    crossing = inside != inside_prev
    with np.errstate(divide="ignore", invalid="ignore"):
        tt = side_prev / (side_prev - side)
    inter = prev + tt[:, None] * (poly - prev)
    out = []
    for i in range(len(poly)):
        if crossing[i]:
            out.append(inter[i])
        if inside[i]:
            out.append(poly[i])
    return np.array(out)


def intersect(a: ConvexFront, b: ConvexFront) -> ConvexFront | None:
    """Convex clip of ``a`` by ``b``; ``None`` when the interiors are disjoint."""
    tol = max(a.tol_geom, b.tol_geom)
    lo = np.maximum(a.markers.min(0), b.markers.min(0))
    hi = np.minimum(a.markers.max(0), b.markers.max(0))
    if np.any(hi - lo <= tol):
        return None
    poly = a.markers.copy()
    eps = 1e-12 * max(a.diam, b.diam) ** 2
    bm = b.markers
    for i in range(len(bm)):
        poly = _clip_halfplane(poly, bm[i], bm[(i + 1) % len(bm)], eps)
        if len(poly) < 3:
            return None
    keep = np.hypot(*(np.roll(poly, -1, axis=0) - poly).T) > tol
    poly = poly[keep]
    if len(poly) < 3:
        return None
    x, y = poly[:, 0], poly[:, 1]
    area = 0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)
    if area <= tol * max(a.diam, b.diam):
        return None
    while len(poly) < MIN_MARKERS:
        lens = np.hypot(*(np.roll(poly, -1, axis=0) - poly).T)
        j = int(np.argmax(lens))
        mid = 0.5 * (poly[j] + poly[(j + 1) % len(poly)])
        poly = np.insert(poly, j + 1, mid, axis=0)
    return ConvexFront(poly)


def check_condition_1(front: ConvexFront, r: float, resolution: int = 200) -> tuple[bool, dict]:
    """Probe the exterior-ball condition with radius 2r on a surrounding grid.

    Each exterior grid point is projected to its nearest boundary point y and
    the complement's distance is tested at y + 2r u, u the outward unit
    direction; the complement's ray from y must be at least 2r long.
    """
    if not r > 0.0:
        raise InvalidParameterError(f"radius must be positive, got {r}")
    diam = front.diam
    h = diam / resolution
    margin = 0.25 * diam
    lo = front.markers.min(0) - margin
    hi = front.markers.max(0) + margin
    xs = np.arange(lo[0], hi[0] + 0.5 * h, h)
    ys = np.arange(lo[1], hi[1] + 0.5 * h, h)
    grid = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
    sd = signed_distances(front, grid)
    tol = front.tol_geom
    ext = grid[sd < -tol]
    feet, dist, _ = nearest_feet(front, ext)
    u = (ext - feet) / dist[:, None]
    probe = feet + 2.0 * r * u
    reach = -signed_distances(front, probe)
    slack = reach - 2.0 * r
    fail = slack < -max(tol, 1e-9 * 2.0 * r)
    report = {
        "radius": float(r),
        "n_probes": int(len(ext)),
        "n_fail": int(fail.sum()),
        "worst_slack": float(slack.min()) if len(slack) else 0.0,
        "first_failure": ext[np.argmax(fail)].tolist() if fail.any() else None,
    }
    return (not bool(fail.any())), report


def hausdorff(a: ConvexFront, b: ConvexFront) -> float:
    """Hausdorff distance between two polylines (exact on the markers of each)."""
    _, da, _ = nearest_feet(b, a.markers)
    _, db, _ = nearest_feet(a, b.markers)
    return float(max(da.max(), db.max()))


def remesh_equal_arclength(markers: np.ndarray, n: int | None = None) -> np.ndarray:
    """Linear resampling of a closed polyline at equal arclength, marker 0 kept."""
    m = np.asarray(markers, dtype=float)
    if n is None:
        n = len(m)
    closed = np.vstack((m, m[:1]))
    seg = np.hypot(*np.diff(closed, axis=0).T)
    cum = np.concatenate(([0.0], np.cumsum(seg)))
    target = np.arange(n) * (cum[-1] / n)
    return np.column_stack((np.interp(target, cum, closed[:, 0]), np.interp(target, cum, closed[:, 1])))


def read_front_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data


def write_front_csv(path, markers) -> None:
    m = np.asarray(markers, dtype=float)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("x,y\n")
        for x, y in m:
            fh.write(f"{x:.17g},{y:.17g}\n")
