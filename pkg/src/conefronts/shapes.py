"""Initial shapes used by scenarios and tests."""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidParameterError
from .geometry import ConvexFront, remesh_equal_arclength


def disk(radius: float = 1.0, n: int = 256, center=(0.0, 0.0), phase: float = 0.0) -> ConvexFront:
    """Regular n-gon inscribed in the circle of the given radius."""
    if not radius > 0.0:
        raise InvalidParameterError("radius must be positive")
    th = phase + 2.0 * math.pi * np.arange(n) / n
    pts = np.column_stack((np.cos(th), np.sin(th))) * radius + np.asarray(center, dtype=float)
    return ConvexFront(pts)


def ellipse(a: float = 1.0, b: float = 0.6, n: int = 256, center=(0.0, 0.0)) -> ConvexFront:
    """Ellipse sampled at (nearly) equal arclength, markers on the exact curve."""
    if not (a > 0.0 and b > 0.0):
        raise InvalidParameterError("semi-axes must be positive")
    fine = 64 * n
    th = 2.0 * math.pi * np.arange(fine) / fine
    speed = np.hypot(a * np.sin(th), b * np.cos(th))
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (speed + np.roll(speed, -1)) * (2.0 * math.pi / fine))))
    th_full = np.concatenate((th, [2.0 * math.pi]))
    targets = np.arange(n) * cum[-1] / n
    t = np.interp(targets, cum, th_full)
    pts = np.column_stack((a * np.cos(t), b * np.sin(t))) + np.asarray(center, dtype=float)
    return ConvexFront(pts)


def rounded_square(side: float = 2.0, fillet: float = 0.1, n_edge: int = 32, n_arc: int = 16,
                   center=(0.0, 0.0)) -> ConvexFront:
    """Square with circular fillets; each fillet resolved by ``n_arc`` segments."""
    if not (0.0 < fillet < 0.5 * side):
        raise InvalidParameterError("fillet must lie in (0, side/2)")
    h = 0.5 * side
    flat = side - 2.0 * fillet
    pts = []
    # corners counterclockwise starting bottom-right
    corners = [(h - fillet, -h + fillet, -0.5 * math.pi), (h - fillet, h - fillet, 0.0),
               (-h + fillet, h - fillet, 0.5 * math.pi), (-h + fillet, -h + fillet, math.pi)]
    for cx, cy, phi0 in corners:
        phis = phi0 + 0.5 * math.pi * np.arange(n_arc) / n_arc
        pts.extend(zip(cx + fillet * np.cos(phis), cy + fillet * np.sin(phis)))
        # straight edge leaving the end of this arc
        end = phi0 + 0.5 * math.pi
        start = np.array([cx + fillet * math.cos(end), cy + fillet * math.sin(end)])
        direction = np.array([-math.sin(end), math.cos(end)])
        for k in range(n_edge):
            pts.append(tuple(start + direction * flat * k / n_edge))
    return ConvexFront(np.array(pts) + np.asarray(center, dtype=float))


def rounded_square_uniform(side: float = 2.0, fillet: float = 0.1, n: int = 256,
                           center=(0.0, 0.0)) -> ConvexFront:
    """Rounded square with ``n`` markers at equal arclength, markers on the exact curve.

    Fillet markers must lie on the circle: the fillet centre is a focal point
    where all arc rays end, and markers off the circle move the ray ends there.
    """
    if not (0.0 < fillet < 0.5 * side):
        raise InvalidParameterError("fillet must lie in (0, side/2)")
    h = 0.5 * side
    flat = side - 2.0 * fillet
    arc = 0.5 * math.pi * fillet
    period = flat + arc
    # arclength from the start of the bottom-right arc, one (arc, edge) block per corner
    s = np.arange(n) * (4.0 * period / n)
    k, r = np.divmod(s, period)
    k = k.astype(int) % 4
    corner_c = np.array([[h - fillet, -h + fillet], [h - fillet, h - fillet],
                         [-h + fillet, h - fillet], [-h + fillet, -h + fillet]])
    phi0 = -0.5 * math.pi + 0.5 * math.pi * k
    on_arc = r < arc
    phi = phi0 + np.where(on_arc, r, arc) / fillet
    pts = corner_c[k] + fillet * np.column_stack((np.cos(phi), np.sin(phi)))
    along = np.where(on_arc, 0.0, r - arc)
    pts += along[:, None] * np.column_stack((-np.sin(phi), np.cos(phi)))
    return ConvexFront(pts + np.asarray(center, dtype=float))


def square(side: float = 2.0, n_per_edge: int = 8, center=(0.0, 0.0)) -> ConvexFront:
    """Sharp-cornered square with collinear markers along each edge."""
    h = 0.5 * side
    corners = np.array([[-h, -h], [h, -h], [h, h], [-h, h]])
    pts = []
    for i in range(4):
        a, b = corners[i], corners[(i + 1) % 4]
        for k in range(n_per_edge):
            pts.append(a + (b - a) * k / n_per_edge)
    return ConvexFront(np.array(pts) + np.asarray(center, dtype=float))


def two_disks(r1: float = 1.0, r2: float = 1.0, separation: float = 1.6, n: int = 256):
    """Two disks centred at (-separation/2, 0) and (+separation/2, 0)."""
    return (disk(r1, n, center=(-0.5 * separation, 0.0)),
            disk(r2, n, center=(0.5 * separation, 0.0)))


def l_shape(size: float = 2.0, notch: float = 1.0, fillet: float = 0.05, n_arc: int = 8) -> ConvexFront:
    """Nonconvex L-shaped diagnostic polyline; the reentrant corner is filleted.

    Returned with convexity validation bypassed.
    """
    s, c = size, notch
    outline = [(0.0, 0.0), (s, 0.0), (s, s - c)]
    # reentrant corner at (s - c, s - c), rounded with a concave arc
    cx, cy = s - c + fillet, s - c + fillet
    phis = -0.5 * math.pi - 0.5 * math.pi * np.arange(n_arc + 1) / n_arc
    arc = [(cx + fillet * math.cos(p), cy + fillet * math.sin(p)) for p in phis]
    outline += arc + [(s - c, s), (0.0, s)]
    pts = []
    for i in range(len(outline)):
        a = np.array(outline[i])
        b = np.array(outline[(i + 1) % len(outline)])
        nseg = max(1, int(round(np.hypot(*(b - a)) / (0.05 * s))))
        for k in range(nseg):
            pts.append(a + (b - a) * k / nseg)
    return ConvexFront(np.array(pts), validate=False)
