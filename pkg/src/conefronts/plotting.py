"""SVG figures of a stored trajectory."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .evolution import Model, Trajectory, mean_radius  # noqa: E402
from .geometry import ray_arrays  # noqa: E402
from .transport import density_molding, density_sandpile  # noqa: E402

_SVG = {"svg.hashsalt": "conefronts", "svg.fonttype": "none"}


def _save(fig, path: Path) -> Path:
    with plt.rc_context(_SVG):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path


def plot_fronts(traj: Trajectory, path, frame_stride: int = 1, stroke_width: float = 1.0) -> Path:
    fig, ax = plt.subplots(figsize=(6, 6))
    cmap = plt.get_cmap("viridis")
    idx = list(range(0, len(traj.states), frame_stride))
    if idx[-1] != len(traj.states) - 1:
        idx.append(len(traj.states) - 1)
    t0, t1 = traj.times[0], traj.times[-1]
    for i in idx:
        st = traj.states[i]
        color = cmap((st.t - t0) / (t1 - t0) if t1 > t0 else 0.0)
        for f in st.fronts:
            m = np.vstack((f.markers, f.markers[:1]))
            ax.plot(m[:, 0], m[:, 1], color=color, lw=stroke_width)
    sm = plt.cm.ScalarMappable(cmap=cmap, norm=plt.Normalize(t0, t1))
    fig.colorbar(sm, ax=ax, label="t")
    ax.set_aspect("equal")
    ax.set_title(f"{Model(traj.model).value}: fronts")
    return _save(fig, Path(path))


def plot_densities(traj: Trajectory, path, n_rays: int = 6, stroke_width: float = 1.0) -> Path:
    """Transport density along a few rays of the last state."""
    st = traj.states[-1]
    arr = ray_arrays(st.rays[0])
    fig, ax = plt.subplots(figsize=(6, 4))
    picks = np.linspace(0, len(arr["gamma"]) - 1, n_rays).round().astype(int)
    model = Model(traj.model)
    for i in picks:
        k, g = arr["kappa"][i], arr["gamma"][i]
        if not g > 0.0 or arr["delta"][i] > 0.0:
            continue
        s = np.linspace(0.0, g, 101)
        a = density_molding(k, g, s) if model is Model.MOLDING else density_sandpile(k, g, st.t, s)
        ax.plot(s, a, lw=stroke_width, label=f"marker {i}")
    ax.set_xlabel("s")
    ax.set_ylabel("a(s)")
    ax.set_title(f"transport density at t={st.t:.4g}")
    ax.legend(fontsize="small")
    return _save(fig, Path(path))


def plot_radius(traj: Trajectory, path, analytic=None, stroke_width: float = 1.0) -> Path:
    """Mean radius against time; ``analytic`` is an optional callable R(t)."""
    t = np.array(traj.times)
    fig, ax = plt.subplots(figsize=(6, 4))
    for k in range(len(traj.states[0].fronts)):
        r = [mean_radius(st.fronts[k]) for st in traj.states]
        ax.plot(t, r, "o-", ms=2, lw=stroke_width, label=f"front {k}")
    if analytic is not None:
        tt = np.linspace(t[0], t[-1], 200)
        ax.plot(tt, analytic(tt), "k--", lw=stroke_width, label="analytic")
    ax.set_xlabel("t")
    ax.set_ylabel("mean radius")
    ax.legend(fontsize="small")
    return _save(fig, Path(path))
