"""Run every config in configs/ and verify its identities; prints one summary line per config."""
import argparse
from pathlib import Path

from conefronts.config import load_config
from conefronts.runner import run_config, verify_trajectory, write_reports

ROOT = Path(__file__).resolve().parents[1]


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("configs", nargs="*", type=Path, default=sorted((ROOT / "configs").glob("*.ini")))
    ap.add_argument("--out", type=Path, default=ROOT / "out")
    args = ap.parse_args()
    for path in args.configs:
        cfg = load_config(path)
        out = args.out / path.stem
        traj = run_config(cfg, out)
        reports = verify_trajectory(traj, cfg.verify)
        write_reports(reports, out)
        failed = [r for r in reports if not r.passed]
        kinds = sorted({r.identity for r in reports})
        print(f"{path.name}: {len(reports)} reports ({', '.join(kinds)}), {len(failed)} failed"
              + (f", run error {traj.error['type']}" if traj.error else ""))
        for r in failed[:5]:
            print(f"  {r.identity} t={r.t:.4g} value={r.value:.3e} tolerance={r.tolerance:.3e}")


if __name__ == "__main__":
    main()
