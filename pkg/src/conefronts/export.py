"""Trajectory files: one markers CSV per stored state plus ``summary.json``."""

from __future__ import annotations

import json
import math
from pathlib import Path

from .errors import InvalidParameterError
from .evolution import EvolutionState, Model, Trajectory, fill_velocities
from .geometry import ConvexFront, read_front_csv, write_front_csv

SUMMARY = "summary.json"


def _state_files(index: int, n_fronts: int) -> list[str]:
    if n_fronts == 1:
        return [f"state_{index:04d}.csv"]
    return [f"state_{index:04d}_front{k}.csv" for k in range(n_fronts)]


def _clean(obj):
    """JSON-safe copy: non-finite floats become None."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def write_trajectory(traj: Trajectory, out_dir, scenario: dict | None = None) -> Path:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for i, st in enumerate(traj.states):
        names = _state_files(i, len(st.fronts))
        for name, front in zip(names, st.fronts):
            write_front_csv(out / name, front.markers)
        files.append(names)
    summary = {
        "model": Model(traj.model).value,
        "times": traj.times,
        "files": files,
        "diagnostics": traj.diagnostics,
        "error": traj.error,
        "scenario": scenario,
    }
    path = out / SUMMARY
    path.write_text(json.dumps(_clean(summary), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def read_summary(traj_dir) -> dict:
    path = Path(traj_dir) / SUMMARY
    if not path.is_file():
        raise InvalidParameterError(f"no states found in {traj_dir}")
    summary = json.loads(path.read_text(encoding="utf-8"))
    if not summary.get("files"):
        raise InvalidParameterError(f"no states found in {traj_dir}")
    return summary


def load_trajectory(traj_dir) -> Trajectory:
    """Rebuild a trajectory from its files; rays and velocities are recomputed."""
    summary = read_summary(traj_dir)
    model = Model(summary["model"])
    states = []
    for t, names in zip(summary["times"], summary["files"]):
        fronts = [ConvexFront(read_front_csv(Path(traj_dir) / n)) for n in names]
        states.append(fill_velocities(EvolutionState.from_fronts(t, fronts), model))
    return Trajectory(states, model, summary.get("diagnostics") or [], summary.get("error"))
