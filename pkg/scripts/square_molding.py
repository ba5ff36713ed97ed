"""Rounded square under compression molding: area growth, edge vs corner speed, SVG of the fronts."""
import argparse
from pathlib import Path

import numpy as np

from conefronts import shapes
from conefronts.evolution import Scenario, run
from conefronts.geometry import ray_arrays
from conefronts.plotting import plot_fronts


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    ap.add_argument("--fillet", type=float, default=0.05)
    ap.add_argument("--t-end", type=float, default=0.5)
    ap.add_argument("--out", type=Path, default=Path("out/square_molding"))
    args = ap.parse_args()
    traj = run(Scenario("molding", (shapes.rounded_square_uniform(2.0, args.fillet, args.n),), 0.0, args.t_end,
                        n_markers=args.n))
    if traj.error:
        print("run stopped:", traj.error["message"])
    print("t,area,v_edge,v_corner")
    for st in traj.states[:: max(1, len(traj.states) // 10)]:
        arr = ray_arrays(st.rays[0])
        ext = np.abs(arr["foot"]).max()
        edge = np.argmin(np.hypot(*(arr["foot"] - [ext, 0.0]).T))
        corner = np.argmin(np.hypot(*(arr["foot"] - [ext, ext]).T))
        v = st.velocities()
        print(f"{st.t:.4f},{st.fronts[0].area:.6f},{v[edge]:.5f},{v[corner]:.5f}")
    args.out.mkdir(parents=True, exist_ok=True)
    print("wrote", plot_fronts(traj, args.out / "fronts.svg", frame_stride=max(1, len(traj.states) // 10)))


if __name__ == "__main__":
    main()
