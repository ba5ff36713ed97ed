"""Velocity laws and mass transport densities along distance rays.

Ray coordinate ``s`` is the distance from the foot on the boundary.  With
principal curvatures kappa_i the area element along a ray carries the weight
P(s) = prod_i (1 - kappa_i s), and the flux a(s) P(s) obeys

    (a P)' = P (V - s / t)        collapsing sandpile
    (a P)' = -P                   compression molding

which is the ray ODE  a' - a sum_i kappa_i / (1 - kappa_i s) + s/t - V = 0
(molding: ... + 1 = 0).  Closed forms are evaluated by Gauss-Legendre
quadrature of these polynomial integrands; :func:`density_ode_oracle`
integrates the ODE itself with adaptive RK4 and serves as the independent
check.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InadmissibleRayError, InvalidParameterError, OracleInconsistencyError
from .geometry import TOL_KG

logger = logging.getLogger(__name__)

SANDPILE = "sandpile"
MOLDING = "molding"


@dataclass(frozen=True)
class CurvatureVector:
    """Principal curvatures of the boundary at a foot point (length n - 1)."""

    kappas: tuple[float, ...]

    def __post_init__(self):
        ks = tuple(float(k) for k in np.atleast_1d(self.kappas))
        if not ks or not all(math.isfinite(k) for k in ks):
            raise InvalidParameterError(f"curvatures must be finite, got {self.kappas}")
        object.__setattr__(self, "kappas", ks)

    @property
    def dim(self) -> int:
        return len(self.kappas) + 1


def _kappas(kappa) -> np.ndarray:
    if isinstance(kappa, CurvatureVector):
        return np.array(kappa.kappas)
    return np.array(CurvatureVector(kappa).kappas)


@lru_cache(maxsize=None)
def _gauss(m: int):
    x, w = np.polynomial.legendre.leggauss(m)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def _weight(kappas: np.ndarray, s) -> np.ndarray:
    s = np.asarray(s, dtype=float)
    return np.prod(1.0 - np.multiply.outer(s, kappas), axis=-1)


def admissible_gamma(kappas, gamma: float) -> tuple[float, bool]:
    """Clamp gamma to 1/max(kappa) when kappa*gamma overshoots 1 by at most TOL_KG.

    Returns (gamma, clamped).  Larger violations raise InadmissibleRayError.
    """
    ks = _kappas(kappas)
    if gamma < 0.0:
        raise InvalidParameterError(f"gamma must be nonnegative, got {gamma}")
    kmax = float(ks.max())
    if kmax <= 0.0 or kmax * gamma <= 1.0:
        return float(gamma), False
    if kmax * gamma > 1.0 + TOL_KG:
        raise InadmissibleRayError(f"kappa*gamma = {kmax * gamma:.9f} exceeds 1 + {TOL_KG}")
    logger.warning("kappa*gamma = %.12f > 1, clamping gamma to 1/kappa", kmax * gamma)
    return 1.0 / kmax, True


def _moments(kappas: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    """Integrals of P(s) and s P(s) over [lo, hi]; exact for polynomial P."""
    x, w = _gauss(len(kappas) + 3)
    half = 0.5 * (hi - lo)
    s = lo + half * (x + 1.0)
    p = _weight(kappas, s)
    return float(half * np.dot(w, p)), float(half * np.dot(w, s * p))


def f_twocone(kappa, gamma: float, delta: float) -> float:
    """Mean of s over [delta, gamma] weighted by prod(1 - kappa_i s)."""
    ks = _kappas(kappa)
    if delta < 0.0 or delta > gamma:
        raise InvalidParameterError(f"need 0 <= delta <= gamma, got delta={delta}, gamma={gamma}")
    gamma, _ = admissible_gamma(ks, gamma)
    delta = min(delta, gamma)
    if gamma == delta:
        return float(gamma)
    if not ks.any():
        # flat boundary: plain midpoint, exact in floating point
        return 0.5 * (gamma + delta)
    m0, m1 = _moments(ks, delta, gamma)
    return m1 / m0


def f_sandpile(kappa, gamma: float) -> float:
    """Sandpile speed factor F(kappa, gamma); equals ``f_twocone`` with delta = 0."""
    if gamma < 0.0:
        raise InvalidParameterError(f"gamma must be nonnegative, got {gamma}")
    if gamma == 0.0:
        return 0.0
    return f_twocone(kappa, gamma, 0.0)


def f_twocone_many(kappa: np.ndarray, gamma: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Vectorised ``f_twocone`` for planar rays (one curvature per ray).

    Inputs are assumed admissible (delta <= gamma <= 1/kappa); rays with
    delta == gamma return gamma.  The arithmetic is identical to the scalar
    path so single- and two-cone runs agree bit for bit when delta = 0.
    """
    kappa = np.asarray(kappa, dtype=float)
    gamma = np.asarray(gamma, dtype=float)
    delta = np.asarray(delta, dtype=float)
    x, w = _gauss(4)
    half = 0.5 * (gamma - delta)
    s = delta[:, None] + half[:, None] * (x[None, :] + 1.0)
    p = 1.0 - s * kappa[:, None]
    m0 = half * (p @ w)
    m1 = half * ((s * p) @ w)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = m1 / m0
    out = np.where(kappa == 0.0, 0.5 * (gamma + delta), out)
    return np.where(gamma > delta, out, gamma)


def velocity_sandpile(kappa, gamma: float, t: float, delta: float | None = None) -> float:
    if not t > 0.0:
        raise InvalidParameterError(f"sandpile time must be positive, got {t}")
    if delta is None:
        return f_sandpile(kappa, gamma) / t
    return f_twocone(kappa, gamma, delta) / t


def _planar(kappa) -> float:
    ks = _kappas(kappa)
    if len(ks) != 1:
        raise InvalidParameterError("molding is planar (one curvature)")
    return float(ks[0])


def velocity_molding(kappa: float, gamma: float) -> float:
    """Compression molding law V = gamma (1 - kappa gamma / 2)."""
    kappa = _planar(kappa)
    gamma, _ = admissible_gamma(kappa, gamma)
    return gamma * (1.0 - 0.5 * kappa * gamma)


def density_sandpile(kappa, gamma: float, t: float, s):
    """Mass transport density on a sandpile ray, closed form by quadrature.

    a(s) = (1 / (t P(s))) int_0^s P(xi) (F - xi) dxi.  For s past the middle
    of the ray the equivalent tail integral -int_s^gamma is used, which stays
    accurate where P(s) -> 0.
    """
    if not t > 0.0:
        raise InvalidParameterError(f"sandpile time must be positive, got {t}")
    ks = _kappas(kappa)
    gamma, _ = admissible_gamma(ks, gamma)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0.0) or np.any(s_arr > gamma * (1.0 + 1e-14)):
        raise InvalidParameterError(f"s must lie in [0, {gamma}]")
    s_arr = np.minimum(s_arr, gamma)
    if gamma == 0.0:
        out = np.zeros_like(s_arr)
        return float(out[0]) if np.ndim(s) == 0 else out
    F = f_sandpile(ks, gamma)
    x, w = _gauss(len(ks) + 3)
    head = s_arr <= 0.5 * gamma
    lo = np.where(head, 0.0, s_arr)
    hi = np.where(head, s_arr, gamma)
    half = 0.5 * (hi - lo)
    nodes = lo[:, None] + half[:, None] * (x[None, :] + 1.0)
    integrand = _weight(ks, nodes) * (F - nodes)
    integral = half * (integrand @ w)
    integral = np.where(head, integral, -integral)
    p = _weight(ks, s_arr)
    with np.errstate(divide="ignore", invalid="ignore"):
        a = integral / (t * p)
    a = np.where(s_arr >= gamma, 0.0, a)
    return float(a[0]) if np.ndim(s) == 0 else a


def density_molding(kappa: float, gamma: float, s):
    """Molding density a(s) = ((gamma - s)/2) (1 + (1 - kappa gamma)/(1 - kappa s))."""
    kappa = _planar(kappa)
    gamma, _ = admissible_gamma(kappa, gamma)
    s_arr = np.atleast_1d(np.asarray(s, dtype=float))
    if np.any(s_arr < 0.0) or np.any(s_arr > gamma * (1.0 + 1e-14)):
        raise InvalidParameterError(f"s must lie in [0, {gamma}]")
    s_arr = np.minimum(s_arr, gamma)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = (1.0 - kappa * gamma) / (1.0 - kappa * s_arr)
    a = np.where(s_arr >= gamma, 0.0, 0.5 * (gamma - s_arr) * (1.0 + ratio))
    return float(a[0]) if np.ndim(s) == 0 else a


# ---------------------------------------------------------------------------
# sampled profiles and the ODE oracle


@dataclass(frozen=True, eq=False)
class DensityProfile:
    model: str
    gamma: float
    velocity: float
    samples: np.ndarray  # columns s, a
    t: float | None = None
    kappa: tuple[float, ...] = field(default=())
    terminal_residual: float | None = None

    def __post_init__(self):
        smp = np.asarray(self.samples, dtype=float)
        object.__setattr__(self, "samples", smp)
        if smp.ndim != 2 or smp.shape[1] != 2 or len(smp) < 2:
            raise InvalidParameterError("samples must be an (M >= 2, 2) array of (s, a)")
        if not self.gamma > 0.0:
            raise InvalidParameterError("profile gamma must be positive")
        if self.model == SANDPILE and not (self.t is not None and self.t > 0.0):
            raise InvalidParameterError("sandpile profile needs t > 0")

    @property
    def s(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def a(self) -> np.ndarray:
        return self.samples[:, 1]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write("s,a\n")
            for s, a in self.samples:
                fh.write(f"{s:.17g},{a:.17g}\n")


def sample_density(model: str, kappa, gamma: float, t: float | None = None, n: int = 101,
                   s=None) -> DensityProfile:
    """Closed-form density sampled on a uniform grid (or on the given ``s``)."""
    if s is None:
        s = np.linspace(0.0, gamma, n)
    s = np.asarray(s, dtype=float)
    if model == SANDPILE:
        a = density_sandpile(kappa, gamma, t, s)
        v = velocity_sandpile(kappa, gamma, t)
    elif model == MOLDING:
        a = density_molding(kappa, gamma, s)
        v = velocity_molding(kappa, gamma)
    else:
        raise InvalidParameterError(f"unknown model {model!r}")
    return DensityProfile(model, float(gamma), float(v), np.column_stack((s, a)), t,
                          tuple(_kappas(kappa)))


def _rk4_adaptive(f, s0: float, a0: float, s1: float, tol: float, h0: float):
    """Adaptive classical RK4 by step doubling; returns node arrays (s, a).

    Each accepted step is the Richardson-corrected two-half-step value.
    """
    direction = 1.0 if s1 >= s0 else -1.0
    span = abs(s1 - s0)
    s, a = s0, a0
    h = min(h0, span)
    xs, ys = [s], [a]
    hmin = 1e-15 * max(span, 1.0)

    def rk4(s, a, h):
        k1 = f(s, a)
        k2 = f(s + 0.5 * h, a + 0.5 * h * k1)
        k3 = f(s + 0.5 * h, a + 0.5 * h * k2)
        k4 = f(s + h, a + h * k3)
        return a + h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0

    while direction * (s1 - s) > 0.0:
        h = min(h, direction * (s1 - s))
        hs = direction * h
        full = rk4(s, a, hs)
        mid = rk4(s, a, 0.5 * hs)
        two = rk4(s + 0.5 * hs, mid, 0.5 * hs)
        err = abs(two - full) / 15.0
        if err <= tol or h <= hmin:
            s_new = s1 if h >= direction * (s1 - s) else s + hs
            a = two + (two - full) / 15.0
            s = s_new
            xs.append(s)
            ys.append(a)
            grow = 2.0 if err == 0.0 else min(2.0, 0.9 * (tol / err) ** 0.2)
            h *= max(grow, 0.2)
        else:
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
    return np.array(xs), np.array(ys)


def density_ode_oracle(model: str, kappa, gamma: float, t: float | None = None,
                       velocity: float | None = None, tol: float = 1e-10) -> DensityProfile:
    """Integrate the ray ODE numerically (independent of the closed forms).

    The ODE is singular at s = gamma when kappa*gamma = 1 and unstable
    forward near there, so the profile is shot from both ends: forward from
    a(0) (0 for the sandpile, V for molding) and backward from a(gamma) = 0,
    meeting at gamma/2.  Two solutions of the linear ODE differ by c / P(s),
    so the mismatch times P(gamma/2) is exactly the terminal flux (a P)(gamma)
    a forward-only shot would produce; it must vanish when V is right.
    """
    ks = _kappas(kappa)
    gamma, _ = admissible_gamma(ks, gamma)
    if not gamma > 0.0:
        raise InvalidParameterError("oracle needs gamma > 0")
    if model == SANDPILE:
        if t is None or not t > 0.0:
            raise InvalidParameterError("sandpile oracle needs t > 0")
        V = velocity_sandpile(ks, gamma, t) if velocity is None else float(velocity)
        tt = float(t)

        def source(s):
            return V - s / tt

        a0 = 0.0
        scale = gamma * gamma / tt
    elif model == MOLDING:
        if len(ks) != 1:
            raise InvalidParameterError("molding oracle is planar (one curvature)")
        V = velocity_molding(ks[0], gamma) if velocity is None else float(velocity)

        def source(s):
            return -1.0

        a0 = V
        scale = gamma
    else:
        raise InvalidParameterError(f"unknown model {model!r}")

    klist = [float(k) for k in ks]
    singular_at_end = sum(1 for k in klist if 1.0 - k * gamma <= 0.0)

    def rhs(s, a):
        if s >= gamma and a == 0.0 and singular_at_end:
            # limit of a / (1 - kappa s) with a ~ c (gamma - s)
            return source(s) / (1 + singular_at_end)
        acc = 0.0
        for k in klist:
            acc += k / (1.0 - k * s)
        return a * acc + source(s)

    abs_tol = tol * max(1.0, scale)
    mid = 0.5 * gamma
    h0 = gamma / 64.0
    s_f, a_f = _rk4_adaptive(rhs, 0.0, a0, mid, abs_tol, h0)
    s_b, a_b = _rk4_adaptive(rhs, gamma, 0.0, mid, abs_tol, h0 / 16.0)
    mismatch = a_f[-1] - a_b[-1]
    terminal = abs(mismatch) * float(_weight(ks, mid))
    if terminal > 1e-6 * max(1.0, scale):
        raise OracleInconsistencyError(
            f"ray ODE does not close: terminal flux residual {terminal:.3e} (velocity {V!r})"
        )
    s_all = np.concatenate((s_f, s_b[::-1][1:]))
    a_all = np.concatenate((a_f[:-1], [0.5 * (a_f[-1] + a_b[-1])], a_b[::-1][1:]))
    return DensityProfile(model, float(gamma), float(V), np.column_stack((s_all, a_all)),
                          float(t) if t is not None else None, tuple(klist), terminal)


@dataclass(frozen=True)
class BoundsReport:
    c_boundary: float     # sup a / min(s, gamma - s) (sandpile) or a / (gamma - s) (molding)
    c_slope: float        # sup |da/ds| over consecutive samples
    c_start: float | None  # molding: sup |a - V| / s
    nonnegative: bool
    boundary_ok: bool
    min_value: float

    @property
    def ok(self) -> bool:
        return self.nonnegative and self.boundary_ok


def density_bounds_check(profile: DensityProfile, tol: float = 1e-9) -> BoundsReport:
    """Fit the constants of the Lipschitz-type bounds and flag sign or boundary violations."""
    s, a = profile.s, profile.a
    g = profile.gamma
    interior = (s > 0.0) & (s < g)
    if profile.model == SANDPILE:
        denom = np.minimum(s, g - s)
        boundary_ok = abs(a[0]) <= tol and abs(a[-1]) <= tol
        c3 = None
    else:
        denom = g - s
        boundary_ok = abs(a[0] - profile.velocity) <= tol and abs(a[-1]) <= tol
        c3 = float(np.max(np.abs(a[interior] - profile.velocity) / s[interior])) if interior.any() else 0.0
    c1 = float(np.max(np.abs(a[interior]) / denom[interior])) if interior.any() else 0.0
    ds = np.diff(s)
    good = ds > 0.0
    c2 = float(np.max(np.abs(np.diff(a)[good] / ds[good]))) if good.any() else 0.0
    floor = -1e-12 * max(1.0, float(np.max(np.abs(a))))
    return BoundsReport(c1, c2, c3, bool(np.all(a >= floor)), bool(boundary_ok), float(a.min()))

