"""Front tracking for the three flow laws.

Markers move along outward vertex normals with the normal velocity given by
the flow law, are remeshed to equal arclength after every step, and the
front is re-validated for convexity.
"""

from __future__ import annotations

import dataclasses
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import spsolve

from .errors import (
    ConeFrontsError,
    ConvexityLossError,
    DegenerateFrontError,
    ExpansionError,
    InadmissibleRayError,
    InvalidParameterError,
)
from .transport import f_twocone_many
from .geometry import (
    ConvexFront,
    RaySample,
    TOL_KG,
    intersect,
    ray_arrays,
    ray_lengths,
    remesh_equal_arclength,
    sample_rays,
    signed_distances,
)

logger = logging.getLogger(__name__)

EPS_V = 1e-12


class Model(str, Enum):
    SANDPILE_1 = "sandpile_1"
    SANDPILE_2 = "sandpile_2"
    MOLDING = "molding"

    @property
    def is_sandpile(self) -> bool:
        return self is not Model.MOLDING


@dataclass(frozen=True, eq=False)
class EvolutionState:
    t: float
    fronts: tuple[ConvexFront, ...]
    rays: tuple[tuple[RaySample, ...], ...]

    @classmethod
    def from_fronts(cls, t: float, fronts: Sequence[ConvexFront]) -> "EvolutionState":
        fronts = tuple(fronts)
        return cls(float(t), fronts, tuple(tuple(sample_rays(f)) for f in fronts))

    def velocities(self, k: int = 0) -> np.ndarray:
        return np.array([np.nan if r.velocity is None else r.velocity for r in self.rays[k]])


@dataclass
class Scenario:
    model: Model
    fronts: tuple[ConvexFront, ...]
    t_start: float
    t_end: float
    n_markers: int = 256
    cfl: float = 0.25
    output_stride: int = 1
    dt_max: float | None = None

    def __post_init__(self):
        self.model = Model(self.model)
        self.fronts = tuple(self.fronts)
        expected = 2 if self.model is Model.SANDPILE_2 else 1
        if len(self.fronts) != expected:
            raise InvalidParameterError(f"{self.model.value} needs {expected} front(s), got {len(self.fronts)}")
        if self.model.is_sandpile and not self.t_start > 0.0:
            raise InvalidParameterError("sandpile requires t_start > 0")
        if not self.t_end > self.t_start:
            raise InvalidParameterError("t_end must exceed t_start")
        if self.n_markers < 32:
            raise InvalidParameterError("n_markers must be at least 32")
        if not 0.0 < self.cfl < 1.0:
            raise InvalidParameterError("cfl must lie in (0, 1)")
        if self.output_stride < 1:
            raise InvalidParameterError("output_stride must be positive")


@dataclass
class Trajectory:
    states: list[EvolutionState]
    model: Model
    diagnostics: list[dict] = field(default_factory=list)
    error: dict | None = None

    @property
    def times(self) -> list[float]:
        return [s.t for s in self.states]


# ---------------------------------------------------------------------------


def _deltas(front: ConvexFront, rays: Sequence[RaySample], inter: ConvexFront | None,
            other: ConvexFront | None) -> np.ndarray:
    """Ray length inside the intersection for feet on its boundary, else 0."""
    arr = ray_arrays(rays)
    delta = np.zeros(len(rays))
    if inter is None or other is None:
        return delta
    on_shared = signed_distances(other, arr["foot"]) >= -other.tol_geom
    if not np.any(on_shared):
        return delta
    idx = np.flatnonzero(on_shared)
    feet = arr["foot"][idx]
    normals = arr["normal"][idx]
    try:
        d = ray_lengths(inter, feet, normals)
    except ConeFrontsError:
        # feet at the junction can be tangent to the clipped boundary
        d = np.array([_safe_single(inter, f, n) for f, n in zip(feet, normals)])
    delta[idx] = np.minimum(d, arr["gamma"][idx])
    return delta


def _safe_single(front, foot, normal) -> float:
    try:
        return float(ray_lengths(front, foot[None], normal[None])[0])
    except ConeFrontsError:
        return 0.0


def fill_velocities(state: EvolutionState, model) -> EvolutionState:
    """Set the normal velocity of every ray from the flow law of ``model``."""
    model = Model(model)
    if model.is_sandpile and not state.t > 0.0:
        raise InvalidParameterError("sandpile velocities need t > 0")
    inter = None
    if model is Model.SANDPILE_2:
        if len(state.fronts) != 2:
            raise InvalidParameterError("sandpile_2 needs two fronts")
        inter = intersect(state.fronts[0], state.fronts[1])
    new_rays = []
    for k, (front, rays) in enumerate(zip(state.fronts, state.rays)):
        arr = ray_arrays(rays)
        kappa = arr["kappa"]
        gamma = arr["gamma"]
        kg = np.max(kappa * gamma)
        if kg > 1.0 + TOL_KG:
            raise InadmissibleRayError(f"kappa*gamma = {kg:.9f} on front {k}")
        gamma = np.where(kappa * gamma > 1.0, 1.0 / np.where(kappa > 0, kappa, 1.0), gamma)
        if model is Model.MOLDING:
            v = gamma * (1.0 - 0.5 * kappa * gamma)
            deltas = [None] * len(rays)
        else:
            if model is Model.SANDPILE_2:
                other = state.fronts[1 - k]
                delta = _deltas(front, rays, inter, other)
            else:
                delta = np.zeros(len(rays))
            v = f_twocone_many(kappa, gamma, delta) / state.t
            deltas = list(delta) if model is Model.SANDPILE_2 else [None] * len(rays)
        new_rays.append(tuple(
            dataclasses.replace(r, velocity=float(v[i]),
                                delta=None if deltas[i] is None else float(deltas[i]))
            for i, r in enumerate(rays)
        ))
    return EvolutionState(state.t, state.fronts, tuple(new_rays))


def cfl_dt(state: EvolutionState, cfl: float = 0.25) -> float:
    """Largest step allowed by the CFL restriction for the filled velocities."""
    limits = []
    for k, front in enumerate(state.fronts):
        v = np.abs(state.velocities(k))
        if np.any(np.isnan(v)):
            raise InvalidParameterError("velocities not filled")
        limits.append(cfl * front.min_spacing / max(float(v.max()), EPS_V))
    return min(limits)


def curvature_sensitivity(state: EvolutionState, k: int, model) -> np.ndarray:
    """|dV/dkappa| at every ray of front ``k`` (gamma and delta held fixed)."""
    model = Model(model)
    arr = ray_arrays(state.rays[k])
    kappa, gamma, delta = arr["kappa"], arr["gamma"], arr["delta"]
    if model is Model.MOLDING:
        return 0.5 * gamma ** 2
    m0 = (gamma - delta) - 0.5 * kappa * (gamma ** 2 - delta ** 2)
    m1 = 0.5 * (gamma ** 2 - delta ** 2) - kappa * (gamma ** 3 - delta ** 3) / 3.0
    dm0 = -0.5 * (gamma ** 2 - delta ** 2)
    dm1 = -(gamma ** 3 - delta ** 3) / 3.0
    with np.errstate(divide="ignore", invalid="ignore"):
        dF = (dm1 * m0 - m1 * dm0) / m0 ** 2
    return np.where(gamma > delta, np.abs(dF), 0.0) / state.t


def _implicit_operator(state: EvolutionState, k: int, dt: float, model) -> sparse.csc_matrix:
    """M = I + dt D L, with L the cyclic second difference on the marker spacing and D = |dV/dkappa|."""
    d = curvature_sensitivity(state, k, model)
    h = state.fronts[k].edge_lengths
    n = len(h)
    h_prev = np.roll(h, 1)
    hm = 0.5 * (h + h_prev)
    lower = -1.0 / (h_prev * hm)
    upper = -1.0 / (h * hm)
    diag = -(lower + upper)
    c = dt * d
    rows = np.arange(n)
    return sparse.csc_matrix(
        (np.concatenate((1.0 + c * diag, c * lower, c * upper)),
         (np.concatenate((rows, rows, rows)),
          np.concatenate((rows, (rows - 1) % n, (rows + 1) % n)))),
        shape=(n, n),
    )


def _normal_displacement(state: EvolutionState, k: int, dt: float, model) -> np.ndarray:
    """Normal displacement over ``dt`` with the curvature response taken implicitly.

    Solves M delta = dt V (backward Euler in the curvature).  Uniform
    expansion is in the null space of L, so a circle moves exactly as with
    the explicit update; grid-scale wiggles, whose curvature makes the
    explicit update unstable for dt >> h^2, are damped instead.  M has unit
    row sums and nonpositive off-diagonals, so delta is a convex combination
    of dt V.  The price is an O(dt^2 D V'') error per step, first order
    overall where V varies along the front.
    """
    return spsolve(_implicit_operator(state, k, dt, model), dt * state.velocities(k))


def _displace(state: EvolutionState, k: int, dt: float, model) -> np.ndarray:
    arr = ray_arrays(state.rays[k])
    delta = _normal_displacement(state, k, dt, model)
    return state.fronts[k].markers - delta[:, None] * arr["normal"]


def _make_front(markers: np.ndarray, t: float, remesh: bool) -> ConvexFront:
    if remesh:
        markers = remesh_equal_arclength(markers)
    try:
        return ConvexFront(markers)
    except DegenerateFrontError as exc:
        raise ConvexityLossError(f"front lost convexity at t={t:.6g}: {exc}") from exc


def step(state: EvolutionState, dt: float, model, scheme: str = "rk2", cfl: float = 0.25) -> EvolutionState:
    """Advance every front by ``dt``.

    ``scheme="rk2"`` is the midpoint rule: velocities are re-evaluated on the
    half-step front (rays, gamma and curvature recomputed there).
    """
    model = Model(model)
    if dt < 0.0:
        raise InvalidParameterError("dt must be nonnegative")
    if dt == 0.0:
        return state
    if any(r.velocity is None for rays in state.rays for r in rays):
        raise InvalidParameterError("velocities must be filled before stepping")
    limit = cfl_dt(state, cfl)
    if dt > limit * (1.0 + 1e-12):
        raise InvalidParameterError(f"dt={dt:.3e} violates CFL limit {limit:.3e}")
    if scheme == "euler":
        driver = state
    elif scheme == "rk2":
        half_t = state.t + 0.5 * dt
        half_fronts = [_make_front(_displace(state, k, 0.5 * dt, model), half_t, remesh=False)
                       for k in range(len(state.fronts))]
        driver = fill_velocities(EvolutionState.from_fronts(half_t, half_fronts), model)
    else:
        raise InvalidParameterError(f"unknown scheme {scheme!r}")
    new_t = state.t + dt
    new_fronts = []
    for k, front in enumerate(state.fronts):
        arr = ray_arrays(driver.rays[k])
        # the midpoint velocities act on the start-of-step markers
        lifted = EvolutionState(state.t, (front,), (driver.rays[k],))
        delta = _normal_displacement(lifted, 0, dt, model)
        moved = front.markers - delta[:, None] * arr["normal"]
        new_fronts.append(_make_front(moved, new_t, remesh=True))
    return fill_velocities(EvolutionState.from_fronts(new_t, new_fronts), model)


def _check_expansion(prev: EvolutionState, cur: EvolutionState) -> float:
    """Largest signed distance of a new marker inside the previous front."""
    worst = -math.inf
    for a, b in zip(prev.fronts, cur.fronts):
        sd = signed_distances(a, b.markers)
        worst = max(worst, float(sd.max()))
    return worst


def initial_state(scenario: Scenario) -> EvolutionState:
    fronts = []
    for f in scenario.fronts:
        if f.n != scenario.n_markers:
            f = ConvexFront(remesh_equal_arclength(f.markers, scenario.n_markers))
        fronts.append(f)
    return fill_velocities(EvolutionState.from_fronts(scenario.t_start, fronts), scenario.model)


def run(scenario: Scenario) -> Trajectory:
    """Integrate from t_start to t_end with RK2 and CFL-limited steps.

    Errors stop the run; the partial trajectory is returned with an error
    record instead of raising.
    """
    model = scenario.model
    state = initial_state(scenario)
    traj = Trajectory([state], model)
    last_stored = state
    n_step = 0
    while state.t < scenario.t_end:
        dt = cfl_dt(state, scenario.cfl)
        if scenario.dt_max is not None:
            dt = min(dt, scenario.dt_max)
        remaining = scenario.t_end - state.t
        if dt >= remaining * (1.0 - 1e-12):
            dt = remaining
        try:
            new = step(state, dt, model, cfl=scenario.cfl)
        except ConeFrontsError as exc:
            traj.error = {"type": type(exc).__name__, "message": str(exc), "t": state.t}
            logger.error("run aborted at t=%.6g: %s", state.t, exc)
            break
        n_step += 1
        diag = {
            "step": n_step,
            "t": new.t,
            "dt": dt,
            "max_v": max(float(np.max(np.abs(new.velocities(k)))) for k in range(len(new.fronts))),
            "min_spacing": min(f.min_spacing for f in new.fronts),
            "convexity_margin": min(f.convexity_margin for f in new.fronts),
        }
        traj.diagnostics.append(diag)
        state = new
        final = state.t >= scenario.t_end
        if n_step % scenario.output_stride == 0 or final:
            inward = _check_expansion(last_stored, state)
            tol = max(f.tol_geom for f in state.fronts)
            if inward > tol:
                traj.error = {
                    "type": ExpansionError.__name__,
                    "message": f"front moved inward by {inward:.3e} at t={state.t:.6g}",
                    "t": state.t,
                }
                break
            traj.states.append(state)
            last_stored = state
        if final:
            break
    return traj


def mean_radius(front: ConvexFront, center=None) -> float:
    c = front.centroid if center is None else np.asarray(center, dtype=float)
    return float(np.mean(np.hypot(*(front.markers - c).T)))
