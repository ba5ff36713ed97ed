"""Command line front end: ``conefronts run|verify|probe|plot``.

Exit codes: 0 ok, 1 usage or input error, 2 numerical failure, 3 convexity loss.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import transport
from .config import Config, VerifyOptions, help_text, load_config
from .errors import ConeFrontsError, ConfigError, ConvexityLossError, InvalidParameterError
from .evolution import Model
from .export import SUMMARY, load_trajectory, read_summary
from .runner import run_config, verify_trajectory, write_reports

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CONVEXITY = 0, 1, 2, 3

logger = logging.getLogger("conefronts")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _floats(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="conefronts", description=__doc__,
                formatter_class=argparse.RawDescriptionHelpFormatter,
                epilog="configuration keys and defaults:\n" + help_text())
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="evolve the configured scenario and write the trajectory")
    r.add_argument("--config", required=True, type=Path)
    r.add_argument("--out", type=Path, help="trajectory directory (default: [output] dir)")
    r.add_argument("--seed", type=int, help="accepted for symmetry; the evolution is deterministic")

    v = sub.add_parser("verify", help="check balance identities on a trajectory")
    v.add_argument("--config", type=Path, help="run this scenario first if --out holds no trajectory")
    v.add_argument("--out", type=Path, help="trajectory directory")
    v.add_argument("--seed", type=int, help="seed for random test functions (overrides config)")

    pr = sub.add_parser("probe", help="evaluate F, V and the transport density on one ray")
    pr.add_argument("--model", choices=("sandpile", "molding"), default="sandpile")
    pr.add_argument("--kappa", type=_floats, default=[0.0], help="principal curvatures, comma separated")
    pr.add_argument("--gamma", type=float, required=True)
    pr.add_argument("--delta", type=float, default=None, help="inner ray end (two-cone mode)")
    pr.add_argument("--t", type=float, default=None, help="time (sandpile)")
    pr.add_argument("--s", type=_floats, default=None, help="ray positions, comma separated")
    pr.add_argument("--n", type=int, default=11, help="grid size when --s is not given")
    pr.add_argument("--csv", type=Path, help="also write the profile as s,a CSV")

    pl = sub.add_parser("plot", help="write SVG figures for a trajectory")
    pl.add_argument("--out", type=Path, required=True, help="trajectory directory")
    pl.add_argument("--config", type=Path, help="plot options")
    pl.add_argument("--seed", type=int)
    return p


def _fmt(x: float) -> str:
    # 15 digits hide quadrature round-off in the headline numbers; CSV rows keep 17
    return f"{float(x):.15g}"


def cmd_run(args) -> int:
    cfg = load_config(args.config)
    out = args.out if args.out is not None else Path(cfg.out_dir)
    traj = run_config(cfg, out)
    print(f"wrote {len(traj.states)} states to {out}")
    if traj.error is not None:
        print(f"error: {traj.error['message']}", file=sys.stderr)
        return EXIT_CONVEXITY if traj.error["type"] == ConvexityLossError.__name__ else EXIT_NUMERIC
    return EXIT_OK


def _verify_options(args, summary: dict | None, cfg: Config | None) -> VerifyOptions:
    if cfg is not None:
        opts = cfg.verify
    elif summary and summary.get("scenario"):
        v = dict(summary["scenario"]["verify"])
        v["identities"] = tuple(v["identities"])
        opts = VerifyOptions(**v)
    else:
        opts = VerifyOptions()
    if args.seed is not None:
        opts.seed = args.seed
    return opts


def cmd_verify(args) -> int:
    cfg = load_config(args.config) if args.config is not None else None
    if args.out is None and cfg is None:
        raise InvalidParameterError("verify needs --out or --config")
    out = args.out if args.out is not None else Path(cfg.out_dir)
    if not (out / SUMMARY).is_file():
        if cfg is None:
            raise InvalidParameterError(f"no states found in {out}")
        traj = run_config(cfg, out)
        if traj.error is not None:
            print(f"error: {traj.error['message']}", file=sys.stderr)
            return EXIT_CONVEXITY if traj.error["type"] == ConvexityLossError.__name__ else EXIT_NUMERIC
    summary = read_summary(out)
    traj = load_trajectory(out)
    reports = verify_trajectory(traj, _verify_options(args, summary, cfg))
    path = write_reports(reports, out)
    n_fail = sum(not r.passed for r in reports)
    print(f"{len(reports)} reports, {n_fail} failed -> {path}")
    return EXIT_OK if n_fail == 0 else EXIT_NUMERIC


def cmd_probe(args) -> int:
    kappa = args.kappa
    lines = []
    if args.model == "sandpile":
        if args.t is None:
            raise InvalidParameterError("sandpile probe needs --t")
        if args.delta is not None:
            F = transport.f_twocone(kappa, args.gamma, args.delta)
        else:
            F = transport.f_sandpile(kappa, args.gamma)
        V = transport.velocity_sandpile(kappa, args.gamma, args.t, args.delta)
        lines += [f"F={_fmt(F)}", f"V={_fmt(V)}"]
    else:
        if len(kappa) != 1:
            raise InvalidParameterError("molding probe takes a single curvature")
        V = transport.velocity_molding(kappa[0], args.gamma)
        lines.append(f"V={_fmt(V)}")
    if args.delta is not None and args.delta > 0.0:
        print("\n".join(lines))
        return EXIT_OK
    s = np.asarray(args.s if args.s is not None else np.linspace(0.0, args.gamma, args.n), dtype=float)
    if args.model == "sandpile":
        a = np.atleast_1d(transport.density_sandpile(kappa, args.gamma, args.t, s))
    else:
        a = np.atleast_1d(transport.density_molding(kappa[0], args.gamma, s))
    if len(s) == 1:
        lines.append(f"a={_fmt(a[0])}")
    lines.append("s,a")
    lines += [f"{si:.17g},{ai:.17g}" for si, ai in zip(s, a)]
    print("\n".join(lines))
    if args.csv is not None:
        with open(args.csv, "w", encoding="utf-8") as fh:
            fh.write("s,a\n")
            fh.writelines(f"{si:.17g},{ai:.17g}\n" for si, ai in zip(s, a))
    return EXIT_OK


def _analytic_radius(scenario: dict | None, model: Model):
    if not scenario or scenario.get("shape") != "disk":
        return None
    r0 = scenario["shape_params"]["radius"]
    t0 = scenario["t_start"]
    if model is Model.SANDPILE_1:
        return lambda t: r0 * (np.asarray(t) / t0) ** (1.0 / 3.0)
    if model is Model.MOLDING:
        return lambda t: r0 * np.exp(0.5 * (np.asarray(t) - t0))
    return None


def cmd_plot(args) -> int:
    from .plotting import plot_densities, plot_fronts, plot_radius

    summary = read_summary(args.out)
    traj = load_trajectory(args.out)
    frame_stride, stroke = 1, 1.0
    if args.config is not None:
        cfg = load_config(args.config)
        frame_stride, stroke = cfg.plot.frame_stride, cfg.plot.stroke_width
    elif summary.get("scenario"):
        frame_stride = summary["scenario"]["plot"]["frame_stride"]
        stroke = summary["scenario"]["plot"]["stroke_width"]
    written = [
        plot_fronts(traj, args.out / "fronts.svg", frame_stride, stroke),
        plot_densities(traj, args.out / "density.svg", stroke_width=stroke),
        plot_radius(traj, args.out / "radius.svg", _analytic_radius(summary.get("scenario"), traj.model), stroke),
    ]
    for w in written:
        print(f"wrote {w}")
    return EXIT_OK


COMMANDS = {"run": cmd_run, "verify": cmd_verify, "probe": cmd_probe, "plot": cmd_plot}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (ConfigError, InvalidParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConvexityLossError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONVEXITY
    except ConeFrontsError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
