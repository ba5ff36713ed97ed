"""Disk radius laws: sandpile R = t^(1/3) from t = 1, molding R = exp(t/2) from t = 0."""
import argparse
import math

from conefronts import shapes
from conefronts.evolution import Scenario, mean_radius, run


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=256)
    args = ap.parse_args()
    cases = [("sandpile_1", 1.0, 2.0, lambda t: t ** (1.0 / 3.0)),
             ("molding", 0.0, 1.0, lambda t: math.exp(0.5 * t))]
    print("model,t,radius,exact,rel_error")
    for model, t0, t1, law in cases:
        traj = run(Scenario(model, (shapes.disk(1.0, args.n),), t0, t1, n_markers=args.n))
        for st in traj.states[:: max(1, len(traj.states) // 8)] + traj.states[-1:]:
            r = mean_radius(st.fronts[0], (0.0, 0.0))
            print(f"{model},{st.t:.6f},{r:.10f},{law(st.t):.10f},{abs(r / law(st.t) - 1.0):.3e}")


if __name__ == "__main__":
    main()
