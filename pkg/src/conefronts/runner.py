"""Orchestration shared by the CLI and the experiment scripts."""

from __future__ import annotations

import json
import logging
from pathlib import Path

import numpy as np

from .config import Config, VerifyOptions
from .evolution import Model, Trajectory, run
from .export import write_trajectory
from .geometry import signed_distances
from .verification import (
    MIN_SPACETIME_STATES,
    ResidualReport,
    SpaceTimeTestFunction,
    TestFunction,
    mass_balance_residual,
    molding_balance_residual,
    random_cone_max,
    ray_grid,
    spacetime_balance_residual,
    subdifferential_gap,
)

logger = logging.getLogger(__name__)

REPORTS = "reports.json"


def run_config(cfg: Config, out_dir=None) -> Trajectory:
    traj = run(cfg.scenario())
    if out_dir is not None:
        write_trajectory(traj, out_dir, cfg.describe())
    return traj


def test_functions(n: int, rng: np.random.Generator, box) -> list[TestFunction]:
    """Deterministic mix: 1, x, |x|^2, then random cubics and gaussians."""
    lo = np.asarray(box[:2], dtype=float)
    hi = np.asarray(box[2:], dtype=float)
    size = float(np.max(hi - lo))
    out = [
        TestFunction.polynomial([[1.0]]),
        TestFunction.polynomial([[0.0], [1.0]]),
        TestFunction.polynomial([[0.0, 0.0, 1.0], [0.0], [1.0]]),
    ]
    k = 0
    while len(out) < n:
        if k % 2 == 0:
            c = rng.normal(size=(4, 4))
            i, j = np.indices(c.shape)
            c[i + j > 3] = 0.0
            out.append(TestFunction.polynomial(c.tolist()))
        else:
            out.append(TestFunction.gaussian(rng.uniform(lo, hi), rng.uniform(0.2, 0.6) * size))
        k += 1
    return out[:n]


test_functions.__test__ = False


def _box(traj: Trajectory):
    pts = np.vstack([f.markers for f in traj.states[-1].fronts])
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    pad = 0.5 * (hi - lo)
    return (*(lo - pad), *(hi + pad))


def _pick(n_states: int, n: int) -> list[int]:
    return sorted(set(np.linspace(0, n_states - 1, min(n, n_states)).round().astype(int).tolist()))


def expansion_reports(traj: Trajectory) -> list[ResidualReport]:
    out = []
    for prev, cur in zip(traj.states[:-1], traj.states[1:]):
        inward = max(float(signed_distances(a, b.markers).max()) for a, b in zip(prev.fronts, cur.fronts))
        tol = max(f.tol_geom for f in cur.fronts)
        out.append(ResidualReport("expansion", cur.t, inward, 1.0, tol, inward <= tol))
    return out


def verify_trajectory(traj: Trajectory, opts: VerifyOptions) -> list[ResidualReport]:
    model = Model(traj.model)
    ids = opts.resolved(model)
    rng = np.random.default_rng(opts.seed)
    box = _box(traj)
    phis = test_functions(opts.n_test_functions, rng, box)
    picked = [traj.states[i] for i in _pick(len(traj.states), opts.n_states)]
    reports: list[ResidualReport] = []
    if "mass_balance" in ids:
        for st in picked:
            reports.extend(mass_balance_residual(st, phi) for phi in phis)
    if "subdifferential_gap" in ids:
        for st in picked:
            grid = ray_grid(st.fronts[0], st.rays[0])
            reports.append(subdifferential_gap(st, None, grid=grid))
            for _ in range(opts.n_lipschitz):
                reports.append(subdifferential_gap(st, random_cone_max(rng, box), grid=grid))
    if "molding_balance" in ids:
        for st in picked:
            reports.extend(molding_balance_residual(st, phi) for phi in phis)
    if "spacetime" in ids:
        if len(traj.states) < MIN_SPACETIME_STATES and opts.identities == ("auto",):
            logger.warning("skipping space-time identities: only %d stored states", len(traj.states))
        else:
            t0, t1 = traj.times[0], traj.times[-1]
            for spatial in phis[:3:2] + phis[4:5]:
                phi = SpaceTimeTestFunction(spatial, t0, t1)
                reports.extend(spacetime_balance_residual(traj, phi))
    if "expansion" in ids:
        reports.extend(expansion_reports(traj))
    return reports


def write_reports(reports: list[ResidualReport], out_dir) -> Path:
    path = Path(out_dir) / REPORTS
    doc = {"all_pass": all(r.passed for r in reports), "count": len(reports),
           "reports": [r.to_dict() for r in reports]}
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    return path

