"""Command-line front end.

Subcommands::

    validate   check the linkage proportions of the configured finger
    traj       sweep the drive rod, write trajectory + straight-line error CSVs
    forces     tabulate pinch or scoop contact forces over an angle sweep
    descend    trace the passive pinch-to-scoop sequence against a surface
    dynamics   integrate free motion and report energy drift
    fk         forward kinematics of the phalanx chain at given joint angles
    jac        geometric Jacobian at given joint angles

Conventions: angles cross this boundary in degrees; CSV floats use repr-exact
'%.17g' formatting and '\\n' line endings so repeated runs are byte-identical.
Exit codes: 0 success, 1 domain failure (solver, geometry), 2 usage/config.
Output directory precedence: --out, then $SPARKFINGER_OUT, then the
[output] section, then the working directory.
"""
from __future__ import annotations

import argparse
import csv
import dataclasses
import math
import os
import sys

from . import kinematics, mechanism, modeswitch, statics
from .config import ConfigError, RunConfig, load_config
from .dynamics import DynamicsParams, simulate_free

__all__ = ["main", "build_parser"]

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_USAGE = 2

OUT_ENV_VAR = "SPARKFINGER_OUT"
DEFAULT_SAMPLES = 100


def _fmt(x: float) -> str:
    return format(float(x) + 0.0, ".17g")  # +0.0 folds -0.0 into 0


def _say(args, message: str):
    if not args.quiet:
        print(message)


def _resolve_outdir(args, cfg: RunConfig) -> str:
    outdir = args.out
    if outdir is None:
        outdir = os.environ.get(OUT_ENV_VAR)
    if outdir is None:
        outdir = cfg.output_dir
    if outdir is None:
        outdir = "."
    os.makedirs(outdir, exist_ok=True)
    return outdir


def _write_csv(path: str, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)


def _samples(args, cfg: RunConfig, default=DEFAULT_SAMPLES) -> int:
    if args.samples is not None:
        return args.samples
    if cfg.samples is not None:
        return cfg.samples
    return default


def _triple(text: str) -> tuple[float, float, float]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(
            f"expected three comma-separated numbers, got {text!r}")
    return tuple(float(p) for p in parts)


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_validate(args, cfg: RunConfig) -> int:
    report = mechanism.validate_kempe_constraints(cfg.finger)
    if report.ok:
        _say(args, "validate: ok")
        return EXIT_OK
    for violation in report.violations:
        print(f"violation: {violation}")
    return EXIT_DOMAIN


def cmd_traj(args, cfg: RunConfig) -> int:
    topology = mechanism.spark_preset(cfg.finger)
    trajectory = mechanism.fingertip_trajectory(topology,
                                                n_samples=_samples(args, cfg))
    max_dev, rms_dev = mechanism.straightness_metric(trajectory)

    outdir = _resolve_outdir(args, cfg)
    x0, y0 = trajectory[0].tip
    _write_csv(os.path.join(outdir, "trajectory.csv"),
               ["driver_mm", "tip_x_mm", "tip_y_mm", "orientation_rad"],
               [[_fmt(s.driver), _fmt(s.tip[0]), _fmt(s.tip[1]),
                 _fmt(s.orientation)] for s in trajectory])
    _write_csv(os.path.join(outdir, "displacement.csv"),
               ["driver_mm", "along_line_mm", "off_line_mm"],
               [[_fmt(s.driver), _fmt(s.tip[1] - y0), _fmt(s.tip[0] - x0)]
                for s in trajectory])
    _say(args, f"wrote {os.path.join(outdir, 'trajectory.csv')} and "
               f"{os.path.join(outdir, 'displacement.csv')} "
               f"max_dev_mm={_fmt(max_dev)} rms_dev_mm={_fmt(rms_dev)}")
    return EXIT_OK


def cmd_forces(args, cfg: RunConfig) -> int:
    st = cfg.statics
    act = statics.ActuationInput(T=st.T, k=st.k)
    n = _samples(args, cfg)
    if n < 2:
        print("error: need at least 2 sweep samples", file=sys.stderr)
        return EXIT_USAGE

    if args.mode == "pinch":
        sweep_var = "theta2"
        start = 0.0 if args.start is None else args.start
        stop = 90.0 if args.stop is None else args.stop
        geom = statics.ContactGeometry(d2=st.d2, d3=st.d3, theta2=0.0,
                                       theta3=0.0)
    else:
        sweep_var = "theta3"
        start = 0.0 if args.start is None else args.start
        stop = cfg.finger.dtheta_c1 if args.stop is None else args.stop
        geom = statics.ContactGeometry(d2=st.d2, d3=st.d3,
                                       theta2=math.radians(st.theta2_deg),
                                       theta3=0.0)

    step = (stop - start) / (n - 1)
    degrees = [start + i * step for i in range(n - 1)] + [stop]
    rows = statics.force_sweep(args.mode, act, geom, cfg.finger.L2,
                               sweep_var, [math.radians(d) for d in degrees])

    outdir = _resolve_outdir(args, cfg)
    path = os.path.join(outdir, f"forces_{args.mode}.csv")
    _write_csv(path,
               ["sweep_var", "value", "F2_N", "F3_N", "status"],
               [[f"{row.sweep_var}_deg", _fmt(deg),
                 "" if row.F2 is None else _fmt(row.F2),
                 "" if row.F3 is None else _fmt(row.F3),
                 row.status]
                for deg, row in zip(degrees, rows)])
    failed = sum(1 for row in rows if row.status != "ok")
    _say(args, f"wrote {path} ({len(rows)} rows, {failed} failed)")
    return EXIT_OK


def _moment_cells(params, state):
    m1, m2 = modeswitch.spring_moments(params, state)
    return [str(state.mode), _fmt(state.distal_rotation), _fmt(m1), _fmt(m2)]


def cmd_descend(args, cfg: RunConfig) -> int:
    ms = cfg.modeswitch
    tilt_deg = ms.tilt_deg if args.tilt is None else args.tilt
    max_depth = ms.max_depth if args.max_depth is None else args.max_depth
    scenario = modeswitch.SurfaceScenario(surface_height=ms.surface_height,
                                          tilt=math.radians(tilt_deg),
                                          symmetric=(tilt_deg == 0.0))
    trace = modeswitch.mode_trace(cfg.finger, scenario, max_depth,
                                  _samples(args, cfg))

    outdir = _resolve_outdir(args, cfg)
    path = os.path.join(outdir, "descend.csv")
    if scenario.tilt == 0.0:
        _write_csv(path,
                   ["depth_mm", "mode", "distal_rotation_deg",
                    "k1_moment_Nmm", "k2_moment_Nmm"],
                   [[_fmt(s.depth)] + _moment_cells(cfg.finger, s)
                    for s in trace])
        final = trace[-1].mode
    else:
        _write_csv(path,
                   ["depth_mm",
                    "mode_leading", "rotation_leading_deg",
                    "k1_leading_Nmm", "k2_leading_Nmm",
                    "mode_trailing", "rotation_trailing_deg",
                    "k1_trailing_Nmm", "k2_trailing_Nmm"],
                   [[_fmt(p.depth)]
                    + _moment_cells(cfg.finger, p.leading)
                    + _moment_cells(cfg.finger, p.trailing)
                    for p in trace])
        final = trace[-1].leading.mode
    _say(args, f"wrote {path} final_mode={final}")
    return EXIT_OK


def cmd_dynamics(args, cfg: RunConfig) -> int:
    duration = cfg.dynamics.duration if args.duration is None else args.duration
    dt = cfg.dynamics.dt if args.dt is None else args.dt
    gravity = cfg.dynamics.gravity if args.gravity is None else args.gravity

    params = DynamicsParams.from_finger(cfg.finger)
    if not gravity:
        params = dataclasses.replace(params, g=0.0)

    if args.q0 is None:
        q0 = kinematics.reference_angles(cfg.finger).as_array()
    else:
        q0 = [math.radians(v) for v in args.q0]
    qdot0 = ([0.0, 0.0, 0.0] if args.qdot0 is None
             else [math.radians(v) for v in args.qdot0])

    trace = simulate_free(params, q0, qdot0, duration, dt)

    outdir = _resolve_outdir(args, cfg)
    path = os.path.join(outdir, "dynamics.csv")
    _write_csv(path,
               ["t_s", "theta1_rad", "theta2_rad", "theta3_rad",
                "dtheta1_rads", "dtheta2_rads", "dtheta3_rads",
                "K", "P", "E_total"],
               [[_fmt(trace.t[i]),
                 _fmt(trace.q[i, 0]), _fmt(trace.q[i, 1]), _fmt(trace.q[i, 2]),
                 _fmt(trace.qdot[i, 0]), _fmt(trace.qdot[i, 1]),
                 _fmt(trace.qdot[i, 2]),
                 _fmt(trace.kinetic[i]), _fmt(trace.potential[i]),
                 _fmt(trace.energy[i])]
                for i in range(len(trace.t))])
    _say(args, f"wrote {path} "
               f"max_rel_energy_drift={_fmt(trace.max_relative_energy_drift())}")
    return EXIT_OK


def cmd_fk(args, cfg: RunConfig) -> int:
    chain = kinematics.spark_chain(cfg.finger)
    q = [math.radians(v) for v in (args.theta1, args.theta2, args.theta3)]
    fk = kinematics.forward_kinematics(chain, q)
    print(f"tip_x_mm={_fmt(fk.tip_position[0])}")
    print(f"tip_y_mm={_fmt(fk.tip_position[1])}")
    print(f"orientation_rad={_fmt(fk.tip_orientation)}")
    print(f"orientation_deg={_fmt(math.degrees(fk.tip_orientation))}")
    return EXIT_OK


def cmd_jac(args, cfg: RunConfig) -> int:
    chain = kinematics.spark_chain(cfg.finger)
    q = [math.radians(v) for v in (args.theta1, args.theta2, args.theta3)]
    J = kinematics.jacobian(chain, q)
    labels = ["vx_mm_s", "vy_mm_s", "vz_mm_s",
              "wx_rad_s", "wy_rad_s", "wz_rad_s"]
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["component", "per_dtheta1", "per_dtheta2", "per_dtheta3"])
    for label, row in zip(labels, J):
        writer.writerow([label] + [_fmt(v) for v in row])
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser / entry point
# ---------------------------------------------------------------------------

def _add_common_flags(parser: argparse.ArgumentParser, in_subparser: bool):
    # The same flags live on the root parser and on every subparser so they
    # are accepted on either side of the command word; the subparser copies
    # use SUPPRESS defaults so they never clobber a value parsed by the root.
    absent = argparse.SUPPRESS if in_subparser else None
    parser.add_argument("--config", metavar="FILE", default=absent,
                        help="INI run configuration (defaults used if absent)")
    parser.add_argument("--out", metavar="DIR", default=absent,
                        help=f"output directory (else ${OUT_ENV_VAR}, "
                             "else config, else '.')")
    parser.add_argument("--samples", type=int, metavar="N", default=absent,
                        help="sample count for sweeps and traces "
                             f"(default {DEFAULT_SAMPLES})")
    parser.add_argument("--quiet", action="store_true",
                        default=argparse.SUPPRESS if in_subparser else False,
                        help="suppress informational output")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sparkfinger",
        description="Simulation tools for a passively mode-switching "
                    "straight-line robotic finger.")
    _add_common_flags(parser, in_subparser=False)
    common = argparse.ArgumentParser(add_help=False)
    _add_common_flags(common, in_subparser=True)

    sub = parser.add_subparsers(dest="command", required=True,
                                metavar="COMMAND")

    p = sub.add_parser("validate", parents=[common],
                       help="check linkage proportions")
    p.set_defaults(handler=cmd_validate)

    p = sub.add_parser("traj", parents=[common],
                       help="drive-rod sweep of the fingertip path")
    p.set_defaults(handler=cmd_traj)

    p = sub.add_parser("forces", parents=[common], help="contact-force sweep")
    p.add_argument("mode", choices=("pinch", "scoop"))
    p.add_argument("--start", type=float, metavar="DEG",
                   help="sweep start angle (default 0)")
    p.add_argument("--stop", type=float, metavar="DEG",
                   help="sweep stop angle (default: 90 pinch, "
                        "full distal travel scoop)")
    p.set_defaults(handler=cmd_forces)

    p = sub.add_parser("descend", parents=[common],
                       help="passive mode-switch trace")
    p.add_argument("--max-depth", type=float, metavar="MM",
                   help="deepest descent to sample")
    p.add_argument("--tilt", type=float, metavar="DEG",
                   help="surface tilt (two-finger columns when nonzero)")
    p.set_defaults(handler=cmd_descend)

    p = sub.add_parser("dynamics", parents=[common],
                       help="free-motion integration")
    p.add_argument("--duration", type=float, metavar="S")
    p.add_argument("--dt", type=float, metavar="S")
    p.add_argument("--gravity", action=argparse.BooleanOptionalAction,
                   default=None, help="include gravity (default: config)")
    p.add_argument("--q0", type=_triple, metavar="D1,D2,D3",
                   help="initial joint angles in degrees "
                        "(default: straight-line reference pose)")
    p.add_argument("--qdot0", type=_triple, metavar="D1,D2,D3",
                   help="initial joint rates in deg/s (default 0,0,0)")
    p.set_defaults(handler=cmd_dynamics)

    for name, handler in (("fk", cmd_fk), ("jac", cmd_jac)):
        p = sub.add_parser(name, parents=[common],
                           help=f"{name} at given joint angles")
        p.add_argument("theta1", type=float, help="degrees")
        p.add_argument("theta2", type=float, help="degrees")
        p.add_argument("theta3", type=float, help="degrees")
        p.set_defaults(handler=handler)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.samples is not None and args.samples < 2:
        print("error: --samples must be >= 2", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.handler(args, cfg)
    except (ValueError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":
    sys.exit(main())
