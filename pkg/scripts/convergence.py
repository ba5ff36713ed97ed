"""Final-radius error of the disk laws under marker refinement (the CFL step follows N)."""
import math

from conefronts import shapes
from conefronts.evolution import Scenario, mean_radius, run


def main():
    cases = [("sandpile_1", 1.0, 2.0, 2.0 ** (1.0 / 3.0)), ("molding", 0.0, 1.0, math.exp(0.5))]
    print("model,n,rel_error,ratio")
    for model, t0, t1, exact in cases:
        prev = None
        for n in (32, 64, 128, 256):
            traj = run(Scenario(model, (shapes.disk(1.0, n),), t0, t1, n_markers=n))
            err = abs(mean_radius(traj.states[-1].fronts[0], (0.0, 0.0)) / exact - 1.0)
            ratio = "" if prev is None else f"{prev / err:.2f}"
            print(f"{model},{n},{err:.3e},{ratio}")
            prev = err


if __name__ == "__main__":
    main()
