"""Command line interface: ``gadsim {run,validate,snapshot,oracle}``.

Exit codes: 0 success, 2 configuration error, 3 numerical error, 4 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np
from scipy import fft

from .actuator_disk import momentum_oracle
from .config import default_config_path, load_config, validate_config, ConfigError
from .flow_field import write_snapshot
from .simulation import NumericalError, load_checkpoint_field, run, snapshot_name

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _config_path(args):
    path = args.config or args.config_pos
    return Path(path) if path else default_config_path()


def _say(args, msg):
    if not args.quiet:
        print(msg)


def cmd_run(args):
    try:
        cfg = load_config(_config_path(args))
    except ConfigError as exc:
        for w in exc.warnings:
            print(f"warning: {w}", file=sys.stderr)
        for e in exc.errors:
            print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    for w in cfg.warnings:
        print(f"warning: {w}", file=sys.stderr)
    out = Path(args.output_dir) if args.output_dir else cfg.output_dir

    def progress(rec):
        _say(args, f"t={rec.t:7.1f} s  V_hub={rec.V_hub:6.3f} m/s  P_g={rec.P_g / 1e6:7.4f} MW  "
                   f"omega_g={rec.omega_g:8.3f} rad/s  x_T={rec.x_T:7.4f} m")

    try:
        with fft.set_workers(args.threads):
            result = run(cfg, out, progress=progress, restart=args.restart)
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        if exc.dump_path is not None:
            print(f"state dumped to {exc.dump_path}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    _say(args, f"wrote {result.time_series} ({len(result.records)} records), "
               f"{result.diagnostics}, {len(result.snapshots)} snapshots "
               f"in {result.wall_time:.1f} s")
    return EXIT_OK


def cmd_validate(args):
    cfg, errors, warnings = validate_config(_config_path(args))
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    for e in errors:
        print(f"error: {e}", file=sys.stderr)
    if errors:
        return EXIT_CONFIG
    _say(args, f"{_config_path(args)}: valid")
    return EXIT_OK


def cmd_snapshot(args):
    try:
        field, t = load_checkpoint_field(args.checkpoint)
    except (OSError, KeyError, ValueError) as exc:
        print(f"I/O error: cannot read checkpoint {args.checkpoint}: {exc}", file=sys.stderr)
        return EXIT_IO
    axis = "xyz".index(args.axis)
    index = args.index
    if index is None:
        index = field.dims[axis] // 2
    out = Path(args.output_dir or ".")
    try:
        out.mkdir(parents=True, exist_ok=True)
        path = write_snapshot(field, args.axis, index, args.component,
                              out / snapshot_name(args.component, args.axis, index, t))
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    _say(args, f"wrote {path}")
    return EXIT_OK


def cmd_oracle(args):
    if args.a is not None:
        values = args.a
    else:
        values = np.arange(args.a_min, args.a_max + 0.5 * args.a_step, args.a_step)
    q = 0.5 * args.rho * np.pi * args.radius ** 2 * args.v0 ** 2
    lines = ["a_n,v1 [m/s],v2 [m/s],thrust [N],power [W],CT [-],Cp [-]"]
    for a in values:
        try:
            o = momentum_oracle(args.v0, float(a), args.rho, args.radius)
        except ValueError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        lines.append(f"{float(a):.6g},{o.v1:.6g},{o.v2:.6g},{o.thrust:.6g},{o.power:.6g},"
                     f"{o.thrust / q:.6g},{o.power / (q * args.v0):.6g}")
    text = "\n".join(lines) + "\n"
    if args.output:
        try:
            Path(args.output).write_text(text, encoding="utf-8")
        except OSError as exc:
            print(f"I/O error: {exc}", file=sys.stderr)
            return EXIT_IO
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="scenario config file (default: shipped NREL 5-MW)")
    common.add_argument("--output-dir", help="directory for output files")
    common.add_argument("--threads", type=int, default=1, help="worker threads for FFTs")
    common.add_argument("--quiet", action="store_true", help="suppress progress output")

    parser = argparse.ArgumentParser(
        prog="gadsim", description="Actuator-disk wind turbine simulator with drive-train, "
                                   "tower and torque control coupling.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", parents=[common], help="run a scenario")
    p.add_argument("config_pos", nargs="?", metavar="CONFIG")
    p.add_argument("--restart", help="resume from a checkpoint file")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("validate", parents=[common], help="check a config and list every problem")
    p.add_argument("config_pos", nargs="?", metavar="CONFIG")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("snapshot", parents=[common], help="write a grid plane from a checkpoint")
    p.add_argument("checkpoint", help="checkpoint .npz written by 'run'")
    p.add_argument("--axis", choices=("x", "y", "z"), default="z")
    p.add_argument("--index", type=int, help="plane index (default: middle)")
    p.add_argument("--component", choices=("u", "v", "w", "speed"), default="speed")
    p.set_defaults(func=cmd_snapshot, config_pos=None)

    p = sub.add_parser("oracle", parents=[common], help="momentum-theory table over a_n")
    p.add_argument("--v0", type=float, default=8.0, help="free-stream speed (m/s)")
    p.add_argument("--rho", type=float, default=1.225, help="air density (kg/m^3)")
    p.add_argument("--radius", type=float, default=63.0, help="rotor radius (m)")
    p.add_argument("--a", type=float, nargs="+", help="explicit induction factors")
    p.add_argument("--a-min", type=float, default=0.0)
    p.add_argument("--a-max", type=float, default=0.45)
    p.add_argument("--a-step", type=float, default=0.05)
    p.add_argument("--output", help="write the table here instead of stdout")
    p.set_defaults(func=cmd_oracle, config_pos=None)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
