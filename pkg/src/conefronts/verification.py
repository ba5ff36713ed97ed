"""Quadrature checks of the balance identities satisfied by the flows.

Every bulk integral is written in ray coordinates,

    int_Omega f dx = int_boundary int_0^gamma(y) f(y + s n(y)) (1 - kappa(y) s) ds dH^1(y),

with an arclength trapezoid rule over the feet and Gauss-Legendre along each
ray.  Along a ray the distance function grows with slope one, so Dw . Dphi is
just the ray derivative of phi.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Callable, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from .errors import InsufficientResolutionError, InvalidParameterError, RidgeProximityError
from .evolution import EvolutionState, Model, Trajectory
from .geometry import ConvexFront, RaySample, nearest_feet, ray_arrays, sample_rays, signed_distances

MIN_SPACETIME_STATES = 16


# ---------------------------------------------------------------------------
# test functions


@dataclass(frozen=True, eq=False)
class TestFunction:
    """Smooth (or 1-Lipschitz) scalar field with an analytic gradient.

    kind:
      polynomial  params["coeffs"][i][j] multiplies x**i y**j, i + j <= 3
      gaussian    params center, width, amplitude: A exp(-|x-c|^2 / (2 w^2))
      cone_max    params cones = [(a_i, p_i)]: max_i (a_i - |x - p_i|)
      distance    params front: signed distance to that front
    """

    __test__ = False  # not a pytest class

    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind == "polynomial":
            c = np.zeros((4, 4))
            rows = self.params.get("coeffs", [[0.0]])
            if len(rows) > 4 or any(len(np.atleast_1d(r)) > 4 for r in rows):
                raise InvalidParameterError("polynomial coefficients must be at most 4x4")
            for i, r in enumerate(rows):
                r = np.atleast_1d(np.asarray(r, dtype=float))
                c[i, : len(r)] = r
            i, j = np.indices(c.shape)
            if np.any(c[i + j > 3]):
                raise InvalidParameterError("polynomial degree must not exceed 3")
            object.__setattr__(self, "params", {"coeffs": c})
        elif self.kind == "gaussian":
            p = {"center": (0.0, 0.0), "width": 1.0, "amplitude": 1.0, **self.params}
            if not p["width"] > 0.0:
                raise InvalidParameterError("gaussian width must be positive")
            p["center"] = np.asarray(p["center"], dtype=float)
            object.__setattr__(self, "params", p)
        elif self.kind == "cone_max":
            cones = [(float(a), np.asarray(p, dtype=float)) for a, p in self.params.get("cones", [])]
            if not cones:
                raise InvalidParameterError("cone_max needs at least one cone")
            object.__setattr__(self, "params", {"cones": cones})
        elif self.kind == "distance":
            if not isinstance(self.params.get("front"), ConvexFront):
                raise InvalidParameterError("distance test function needs a front")
        else:
            raise InvalidParameterError(f"unknown test function kind {self.kind!r}")

    # constructors
    @classmethod
    def polynomial(cls, coeffs) -> "TestFunction":
        return cls("polynomial", {"coeffs": coeffs})

    @classmethod
    def gaussian(cls, center, width: float, amplitude: float = 1.0) -> "TestFunction":
        return cls("gaussian", {"center": center, "width": width, "amplitude": amplitude})

    @classmethod
    def cone_max(cls, cones) -> "TestFunction":
        return cls("cone_max", {"cones": cones})

    @classmethod
    def distance(cls, front: ConvexFront) -> "TestFunction":
        return cls("distance", {"front": front})

    @property
    def lipschitz_one(self) -> bool:
        return self.kind in ("cone_max", "distance")

    def value(self, pts) -> np.ndarray:
        p = np.asarray(pts, dtype=float)
        x, y = p[..., 0], p[..., 1]
        if self.kind == "polynomial":
            c = self.params["coeffs"]
            out = np.zeros_like(x)
            for i in range(4):
                for j in range(4 - i):
                    if c[i, j]:
                        out = out + c[i, j] * x ** i * y ** j
            return out
        if self.kind == "gaussian":
            d = p - self.params["center"]
            w = self.params["width"]
            return self.params["amplitude"] * np.exp(-np.sum(d * d, axis=-1) / (2.0 * w * w))
        if self.kind == "cone_max":
            vals = [a - np.hypot(*(p - c).T).T for a, c in self.params["cones"]]
            return np.max(np.stack(vals), axis=0)
        flat = p.reshape(-1, 2)
        return signed_distances(self.params["front"], flat).reshape(p.shape[:-1])

    def gradient(self, pts) -> np.ndarray:
        p = np.asarray(pts, dtype=float)
        x, y = p[..., 0], p[..., 1]
        if self.kind == "polynomial":
            c = self.params["coeffs"]
            gx = np.zeros_like(x)
            gy = np.zeros_like(x)
            for i in range(4):
                for j in range(4 - i):
                    if not c[i, j]:
                        continue
                    if i:
                        gx = gx + c[i, j] * i * x ** (i - 1) * y ** j
                    if j:
                        gy = gy + c[i, j] * j * x ** i * y ** (j - 1)
            return np.stack((gx, gy), axis=-1)
        if self.kind == "gaussian":
            d = p - self.params["center"]
            w = self.params["width"]
            return -(d / (w * w)) * self.value(p)[..., None]
        if self.kind == "cone_max":
            vals = np.stack([a - np.hypot(*(p - c).T).T for a, c in self.params["cones"]])
            k = np.argmax(vals, axis=0)
            centers = np.array([c for _, c in self.params["cones"]])
            d = p - centers[k]
            r = np.linalg.norm(d, axis=-1, keepdims=True)
            return -d / np.where(r > 0.0, r, 1.0)
        # distance: gradient from the nearest foot, pointing away from it inside
        flat = p.reshape(-1, 2)
        front = self.params["front"]
        feet, dist, _ = nearest_feet(front, flat)
        sd = signed_distances(front, flat)
        d = flat - feet
        g = np.sign(sd)[:, None] * d / np.where(dist > 0.0, dist, 1.0)[:, None]
        return g.reshape(p.shape)

    def kink_distance(self, pts) -> np.ndarray:
        """Gap between the two largest cones (inf for smooth kinds)."""
        p = np.asarray(pts, dtype=float)
        if self.kind != "cone_max":
            return np.full(p.shape[:-1], np.inf)
        vals = np.stack([a - np.hypot(*(p - c).T).T for a, c in self.params["cones"]])
        out = np.full(p.shape[:-1], np.inf)
        if len(vals) > 1:
            top = np.sort(vals, axis=0)
            out = top[-1] - top[-2]
        for _, c in self.params["cones"]:
            out = np.minimum(out, np.hypot(*(p - c).T).T)
        return out


def random_cone_max(rng: np.random.Generator, box, n_cones: int | None = None) -> TestFunction:
    """Random 1-Lipschitz max of cones with apexes in ``box`` = (xmin, ymin, xmax, ymax)."""
    lo = np.asarray(box[:2], dtype=float)
    hi = np.asarray(box[2:], dtype=float)
    k = int(rng.integers(1, 4)) if n_cones is None else n_cones
    size = float(np.max(hi - lo))
    cones = [(float(rng.uniform(-size, size)), rng.uniform(lo, hi)) for _ in range(k)]
    return TestFunction.cone_max(cones)


@dataclass(frozen=True, eq=False)
class SpaceTimeTestFunction:
    """phi(x, t) = psi(x) * bump(t), bump supported in (t0, t1)."""

    __test__ = False

    spatial: TestFunction
    t0: float
    t1: float

    def __post_init__(self):
        if not self.t1 > self.t0:
            raise InvalidParameterError("bump support must have t1 > t0")

    def _tau(self, t):
        return (2.0 * np.asarray(t, dtype=float) - self.t0 - self.t1) / (self.t1 - self.t0)

    def bump(self, t):
        tau = self._tau(t)
        inside = np.abs(tau) < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            val = np.exp(-1.0 / (1.0 - tau * tau))
        return np.where(inside, val, 0.0)

    def bump_dt(self, t):
        tau = self._tau(t)
        inside = np.abs(tau) < 1.0
        with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
            q = 1.0 - tau * tau
            val = np.exp(-1.0 / q) * (-2.0 * tau / (q * q)) * (2.0 / (self.t1 - self.t0))
        return np.where(inside, val, 0.0)

    def value(self, pts, t):
        return self.spatial.value(pts) * self.bump(t)

    def gradient(self, pts, t):
        return self.spatial.gradient(pts) * self.bump(t)

    def time_derivative(self, pts, t):
        return self.spatial.value(pts) * self.bump_dt(t)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class ResidualReport:
    identity: str
    t: float | None
    value: float
    scale: float
    tolerance: float
    passed: bool
    lhs: float = 0.0
    rhs: float = 0.0
    error_estimate: float = 0.0

    def to_dict(self) -> dict:
        return {
            "identity": self.identity,
            "t": self.t,
            "value": self.value,
            "scale": self.scale,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "error_estimate": self.error_estimate,
        }


def _report(identity, t, lhs, rhs, rel_tol, abs_tol=0.0, one_sided=False, error_estimate=0.0):
    value = float(lhs - rhs)
    scale = abs(lhs) + abs(rhs) + 1.0
    tol = max(abs_tol, rel_tol * scale)
    passed = value >= -tol if one_sided else abs(value) <= tol
    return ResidualReport(identity, None if t is None else float(t), value, float(scale), float(tol),
                          bool(passed), float(lhs), float(rhs), float(error_estimate))


# ---------------------------------------------------------------------------
# ray quadrature


@lru_cache(maxsize=None)
def _unit_gauss(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    return 0.5 * (x + 1.0), 0.5 * w


def foot_weights(front: ConvexFront) -> np.ndarray:
    """Arclength trapezoid weights (l_{i-1} + l_i)/2 at the markers."""
    ell = front.edge_lengths
    return 0.5 * (ell + np.roll(ell, 1))


@dataclass(frozen=True, eq=False)
class RayGrid:
    """Quadrature nodes on every ray of a front.

    ``weights`` already include the foot weight, the Gauss weight and the
    Jacobian 1 - kappa s, so sum(weights * f(points)) integrates f over the body.
    """

    points: np.ndarray  # (N, Q, 2)
    s: np.ndarray  # (N, Q)
    weights: np.ndarray  # (N, Q)
    normal: np.ndarray  # (N, 2)
    kappa: np.ndarray
    gamma: np.ndarray
    velocity: np.ndarray
    foot: np.ndarray
    foot_weight: np.ndarray

    @property
    def jacobian(self) -> np.ndarray:
        return 1.0 - self.kappa[:, None] * self.s


def ray_grid(front: ConvexFront, rays: Sequence[RaySample] | None = None, n_gauss: int = 16) -> RayGrid:
    if rays is None:
        rays = sample_rays(front)
    arr = ray_arrays(rays)
    x, w = _unit_gauss(n_gauss)
    gamma = arr["gamma"]
    s = gamma[:, None] * x[None, :]
    fw = foot_weights(front)
    jac = 1.0 - arr["kappa"][:, None] * s
    weights = fw[:, None] * gamma[:, None] * w[None, :] * jac
    pts = arr["foot"][:, None, :] + s[..., None] * arr["normal"][:, None, :]
    return RayGrid(pts, s, weights, arr["normal"], arr["kappa"], gamma, arr["velocity"], arr["foot"], fw)


def integrate_by_rays(front: ConvexFront, f: Callable, rays: Sequence[RaySample] | None = None,
                      n_gauss: int = 16) -> float:
    """Integral of ``f`` (vectorized over (..., 2) points) over the body."""
    g = ray_grid(front, rays, n_gauss)
    return float(np.sum(g.weights * f(g.points)))


def inside_convex(front: ConvexFront, pts) -> np.ndarray:
    """Point-in-convex-polygon by angular bisection around the centroid."""
    p = np.asarray(pts, dtype=float)
    c = front.centroid
    m = front.markers - c
    ang = np.arctan2(m[:, 1], m[:, 0])
    start = int(np.argmin(ang))
    order = np.roll(np.arange(front.n), -start)
    ang = ang[order]
    q = p - c
    qa = np.arctan2(q[:, 1], q[:, 0])
    j = np.searchsorted(ang, qa, side="right") - 1  # -1 wraps to the last wedge
    a = m[order[j % front.n]]
    b = m[order[(j + 1) % front.n]]
    cross = (b[:, 0] - a[:, 0]) * (q[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (q[:, 0] - a[:, 0])
    return cross > 0.0


def monte_carlo_integral(front: ConvexFront, f: Callable, n: int, rng: np.random.Generator,
                         batch: int = 200_000):
    """Plain Monte Carlo over the bounding box; returns (estimate, standard error).

    ``f`` may return shape (M,) or (M, k); the results then have shape (k,).
    """
    lo = front.markers.min(axis=0)
    hi = front.markers.max(axis=0)
    box = float(np.prod(hi - lo))
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n:
        m = min(batch, n - done)
        pts = rng.uniform(lo, hi, size=(m, 2))
        inside = inside_convex(front, pts)
        vals = np.asarray(f(pts[inside]), dtype=float)
        total = total + vals.sum(axis=0)
        total_sq = total_sq + (vals * vals).sum(axis=0)
        done += m
    mean = np.asarray(total) / n
    var = np.maximum(np.asarray(total_sq) / n - mean * mean, 0.0)
    est, err = box * mean, box * np.sqrt(var / n)
    if est.ndim == 0:
        return float(est), float(err)
    return est, err


# ---------------------------------------------------------------------------
# per-ray fluxes a (1 - kappa s)


def sandpile_flux(kappa, gamma, velocity, t, s):
    """a(s)(1 - kappa s) = (1/t) int_0^s (1 - kappa xi)(t V - xi) dxi."""
    k = np.asarray(kappa)[..., None]
    F = (np.asarray(velocity) * t)[..., None]
    return (F * s - 0.5 * (1.0 + k * F) * s * s + k * s ** 3 / 3.0) / t


def molding_flux(kappa, velocity, s):
    """a(s)(1 - kappa s) = V - s + kappa s^2 / 2."""
    k = np.asarray(kappa)[..., None]
    return np.asarray(velocity)[..., None] - s + 0.5 * k * s * s


def _check_state(state: EvolutionState, k: int):
    rays = state.rays[k]
    if any(r.velocity is None for r in rays):
        raise InvalidParameterError("state velocities must be filled")
    if any(r.delta for r in rays):
        raise InvalidParameterError("balance identities are checked for single bodies only")


def _mass_terms(state: EvolutionState, phi: TestFunction, k: int, n_gauss: int):
    g = ray_grid(state.fronts[k], state.rays[k], n_gauss)
    t = state.t
    flux = sandpile_flux(g.kappa, g.gamma, g.velocity, t, g.s)
    dphi = np.einsum("nqi,ni->nq", phi.gradient(g.points), g.normal)
    fw_gauss = g.weights / g.jacobian  # the flux already carries the Jacobian
    lhs = float(np.sum(fw_gauss * flux * dphi))
    rhs = float(np.sum(g.weights * (g.s / t - g.velocity[:, None]) * phi.value(g.points)))
    return lhs, rhs


def mass_balance_residual(state: EvolutionState, phi: TestFunction, k: int = 0, rel_tol: float = 1e-5,
                          n_gauss: int = 16) -> ResidualReport:
    """int a Dw.Dphi  -  int (w/t - w_t) phi over the body, w the distance to the boundary."""
    _check_state(state, k)
    if not state.t > 0.0:
        raise InvalidParameterError("sandpile states need t > 0")
    lhs, rhs = _mass_terms(state, phi, k, n_gauss)
    lo, ro = _mass_terms(state, phi, k, n_gauss // 2)
    return _report("mass_balance", state.t, lhs, rhs, rel_tol,
                   error_estimate=abs((lhs - rhs) - (lo - ro)))


def _gap_terms(g: RayGrid, t: float, vals: np.ndarray):
    src = g.weights * (g.s / t - g.velocity[:, None])
    return float(np.sum(src * g.s)), float(np.sum(src * vals))


def subdifferential_gap(state: EvolutionState, v: TestFunction | None, k: int = 0, rel_tol: float = 1e-8,
                        grid: RayGrid | None = None) -> ResidualReport:
    """int (w/t - w_t) w  -  int (w/t - w_t) v; nonnegative for 1-Lipschitz v.

    ``v=None`` takes v = w itself, i.e. the ray coordinate s at every node.
    """
    _check_state(state, k)
    if v is not None and not v.lipschitz_one:
        raise InvalidParameterError("v must be 1-Lipschitz (cone_max or distance)")
    g = ray_grid(state.fronts[k], state.rays[k]) if grid is None else grid
    lhs, rhs = _gap_terms(g, state.t, g.s if v is None else v.value(g.points))
    return _report("subdifferential_gap", state.t, lhs, rhs, rel_tol, one_sided=True)


def _molding_terms(front, rays, phi_value, phi_grad, n_gauss):
    g = ray_grid(front, rays, n_gauss)
    bulk = float(np.sum(g.weights * phi_value(g.points)))
    boundary = float(np.sum(g.foot_weight * phi_value(g.foot) * g.velocity))
    flux = molding_flux(g.kappa, g.velocity, g.s)
    dphi = np.einsum("nqi,ni->nq", phi_grad(g.points), g.normal)
    transport = float(np.sum(g.weights / g.jacobian * flux * dphi))
    return bulk, boundary, transport


def molding_terms(state: EvolutionState, phi: TestFunction, k: int = 0, n_gauss: int = 16):
    """(int phi, boundary int phi V, int a Du.Dphi) at one time."""
    _check_state(state, k)
    return _molding_terms(state.fronts[k], state.rays[k], phi.value, phi.gradient, n_gauss)


def molding_balance_residual(state: EvolutionState, phi: TestFunction, k: int = 0, rel_tol: float = 1e-4,
                             n_gauss: int = 16) -> ResidualReport:
    """int phi  -  (boundary int phi V + int a Du.Dphi)."""
    b, s, tr = molding_terms(state, phi, k, n_gauss)
    b8, s8, tr8 = molding_terms(state, phi, k, n_gauss // 2)
    return _report("molding_balance", state.t, b, s + tr, rel_tol,
                   error_estimate=abs((b - s - tr) - (b8 - s8 - tr8)))


def spacetime_balance_residual(traj: Trajectory, phi: SpaceTimeTestFunction, rel_tol: float = 1e-4,
                               n_gauss: int = 16) -> tuple[ResidualReport, ResidualReport]:
    """Space-time mass balance and kinematic identities, trapezoid in time.

    mass balance:  int int chi (phi + phi_t) - a Du.Dphi = 0
    kinematic:     int int_boundary phi V dt = - int int chi phi_t
    """
    if Model(traj.model) is not Model.MOLDING:
        raise InvalidParameterError("space-time identities are for molding trajectories")
    if len(traj.states) < MIN_SPACETIME_STATES:
        raise InsufficientResolutionError(
            f"need at least {MIN_SPACETIME_STATES} stored states, got {len(traj.states)}")
    times = np.array(traj.times)
    rows = []
    for st in traj.states:
        _check_state(st, 0)
        t = st.t
        bulk, boundary, transport = _molding_terms(
            st.fronts[0], st.rays[0],
            lambda p, t=t: phi.value(p, t), lambda p, t=t: phi.gradient(p, t), n_gauss)
        g = ray_grid(st.fronts[0], st.rays[0], n_gauss)
        bulk_t = float(np.sum(g.weights * phi.time_derivative(g.points, t)))
        rows.append((bulk, bulk_t, transport, boundary))
    rows = np.array(rows)
    integ = [float(np.trapezoid(rows[:, j], times)) for j in range(4)]
    bulk, bulk_t, transport, boundary = integ
    t_end = float(times[-1])
    spacetime = _report("spacetime_balance", t_end, bulk + bulk_t, transport, rel_tol)
    kinematic = _report("kinematic", t_end, boundary, -bulk_t, rel_tol)
    return spacetime, kinematic


# ---------------------------------------------------------------------------
# local Lipschitz constant of the nearest-point projection


@dataclass(frozen=True)
class ProbeReport:
    ratio: float
    bound: float
    distance: float
    gamma: float

    @property
    def quotient(self) -> float:
        return self.ratio / self.bound


class SmoothBoundary:
    """Periodic cubic spline through the markers, parameterized by polyline arclength.

    The polygon's own nearest-point map is piecewise (locked at vertices,
    flat along edges), so its Lipschitz behaviour says nothing about the
    curved boundary the markers sample.  Projection uses Newton's method on
    the spline, started from the polygon foot.
    """

    def __init__(self, front: ConvexFront, rays: Sequence[RaySample] | None = None):
        self.front = front
        self._rays = rays
        closed = np.vstack((front.markers, front.markers[:1]))
        self.knots = np.concatenate((front.arclength, [front.perimeter]))
        self.spline = CubicSpline(self.knots, closed, bc_type="periodic")
        self.length = front.perimeter

    @cached_property
    def gamma(self) -> np.ndarray:
        rays = sample_rays(self.front) if self._rays is None else self._rays
        g = ray_arrays(rays)["gamma"]
        return np.concatenate((g, g[:1]))

    def gamma_at(self, u) -> np.ndarray:
        return np.interp(np.mod(u, self.length), self.knots, self.gamma)

    def project(self, pts, iters: int = 30) -> tuple[np.ndarray, np.ndarray]:
        """Nearest spline points and their parameters for (M, 2) points."""
        p = np.atleast_2d(np.asarray(pts, dtype=float))
        _, _, u = nearest_feet(self.front, p)
        u = u.astype(float)
        sp, d1, d2 = self.spline, self.spline.derivative(1), self.spline.derivative(2)
        for _ in range(iters):
            uu = np.mod(u, self.length)
            r = sp(uu) - p
            t1 = d1(uu)
            g = np.sum(r * t1, axis=1)
            dg = np.sum(t1 * t1, axis=1) + np.sum(r * d2(uu), axis=1)
            step = g / dg
            u = u - step
            if np.max(np.abs(step)) < 1e-15 * self.length:
                break
        u = np.mod(u, self.length)
        return sp(u), u


def projection_lipschitz_probe(front: ConvexFront, x, h: float, n_probes: int = 16,
                               boundary: SmoothBoundary | None = None) -> ProbeReport:
    """Ratio |y - y1| / |x - x1| over probes x1 on a circle of radius h around x.

    bound = 1 + |x - y| / |x - v| with v the upper end of the ray through x.
    """
    if not h > 0.0:
        raise InvalidParameterError("probe radius must be positive")
    bnd = SmoothBoundary(front) if boundary is None else boundary
    x = np.asarray(x, dtype=float)
    if signed_distances(front, x[None])[0] <= 0.0:
        raise InvalidParameterError("probe point must lie inside the body")
    foot, u = bnd.project(x[None])
    d = float(np.hypot(*(x - foot[0])))
    gamma = float(bnd.gamma_at(u)[0])
    if gamma - d <= 10.0 * h:
        raise RidgeProximityError(f"probe point within 10h of the ridge (gamma - d = {gamma - d:.3e})")
    th = 2.0 * math.pi * np.arange(n_probes) / n_probes
    probes = x + h * np.column_stack((np.cos(th), np.sin(th)))
    feet, _ = bnd.project(probes)
    ratio = float(np.max(np.hypot(*(feet - foot[0]).T)) / h)
    bound = 1.0 + d / (gamma - d)
    return ProbeReport(ratio=ratio, bound=bound, distance=d, gamma=gamma)
