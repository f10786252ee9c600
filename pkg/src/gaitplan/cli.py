"""Command-line harness.

Subcommands:

    run <schedule>   execute a schedule file
    exp1, exp2       built-in walking experiments
    fig10..fig13     built-in single-channel planner scenarios
    verify           run the oracle cross-checks

Gait and planner runs write CSV to --out (or stdout) and print a run
report; the exit code is 0 only if every check in the report passes.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .kinematics import RobotGeometry, UnreachableTargetError
from .schedule import ScheduleError, parse_schedule
from .simulate import (
    BUILTIN_SCHEDULES,
    PLANNER_SCENARIOS,
    RunConfig,
    run,
    run_planner,
    write_gait_csv,
    write_planner_csv,
)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--dt", type=float, default=1e-3, help="control period in seconds")
    p.add_argument("--lt", type=float, default=0.4, help="thigh length in meters")
    p.add_argument("--ls", type=float, default=0.4, help="shin length in meters")
    p.add_argument("--out", type=str, default=None, help="CSV output path (default: stdout)")
    p.add_argument(
        "--degrees", action="store_true", help="emit joint angles in degrees instead of radians"
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gaitplan",
        description="Minimum-jerk gait planner simulations",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a schedule file")
    p_run.add_argument("schedule", type=str)
    _add_common(p_run)

    for name in BUILTIN_SCHEDULES:
        p = sub.add_parser(name, help=f"built-in walking experiment {name}")
        _add_common(p)

    for name in PLANNER_SCENARIOS:
        p = sub.add_parser(name, help=f"built-in planner scenario {name}")
        p.add_argument("--dt", type=float, default=1e-3)
        p.add_argument("--out", type=str, default=None)

    sub.add_parser("verify", help="run oracle cross-checks")
    return parser


def _emit(write_fn, out_path: str | None) -> None:
    """Write CSV to the path or stdout; reports go to the other stream."""
    if out_path:
        with open(out_path, "w") as fp:
            write_fn(fp)
    else:
        write_fn(sys.stdout)


def _gait_command(args, schedule_text: str | None = None, schedule_path: str | None = None) -> int:
    geom = RobotGeometry(l_thigh=args.lt, l_shin=args.ls)
    try:
        if schedule_path is not None:
            with open(schedule_path) as fp:
                schedule_text = fp.read()
        schedule = parse_schedule(schedule_text, geom)
    except (OSError, ScheduleError) as exc:
        print(f"schedule error: {exc}", file=sys.stderr)
        return 2
    config = RunConfig(geom=geom, dt=args.dt)
    try:
        result = run(schedule, config)
    except UnreachableTargetError as exc:
        print(f"run aborted: infeasible parameter combination ({exc})", file=sys.stderr)
        return 3
    _emit(lambda fp: write_gait_csv(result, fp, degrees=args.degrees), args.out)
    report_stream = sys.stdout if args.out else sys.stderr
    report_stream.write(result.report.to_text())
    return 0 if result.report.passed else 1


def _planner_command(name: str, args) -> int:
    result = run_planner(name, dt=args.dt)
    _emit(lambda fp: write_planner_csv(result, fp), args.out)
    report_stream = sys.stdout if args.out else sys.stderr
    report_stream.write(result.to_text())
    return 0 if result.passed else 1


def _verify_command() -> int:
    """Cross-check the planners against the independent oracles."""
    from . import oracles as orc
    from .trajectory import State3, XBoundary, YBoundary, kstar, run_channel_x, run_channel_y

    failures = 0

    def check(name: str, ok: bool, detail: str) -> None:
        nonlocal failures
        print(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")
        failures += 0 if ok else 1

    # closed loop vs open-loop polynomial on the fixed-boundary x scenario
    x0 = State3(0.0, 0.0, 0.0)
    bc = XBoundary(tf=5.0, xf=2.0, vxf=1.0, axf=1.0)
    t, pos, _, _, _ = run_channel_x(x0, bc, 0.0, 5.0, 1e-3)
    ref = orc.integrate_thrice(orc.vx_open_loop(x0, State3(2.0, 1.0, 1.0), 0.0, 5.0), x0)(t)
    err = float(np.abs(pos - ref).max())
    check("closed loop vs analytic (x)", err <= 1e-4, f"max pointwise error {err:.2e}")

    # peak shaping and gain bisection on the fixed-boundary y scenario
    k = kstar(0.0, 5.0, 0.0, 2.0, 1.0)
    bcy = YBoundary(0.0, 5.0, 0.0, 2.0, 1.0, k)
    _, posy, vely, accy, _ = run_channel_y(State3(0.0, 0.0, 0.0), bcy, 0.0, 5.0, 1e-3)
    peak = float(posy.max())
    term = max(abs(posy[-1] - 1.0), abs(vely[-1]), abs(accy[-1]))
    kb = orc.bisect_k_for_peak(0.0, 5.0, 0.0, 2.0, 1.0)
    check(
        "peak shaping (y)",
        1.9 <= peak <= 2.1 and term <= 1e-3 and abs(kb - k) <= 0.1 * abs(k),
        f"peak {peak:.4f}, terminal error {term:.1e}, bisected gain {kb:.4f} vs formula {k:.4f}",
    )

    # integral identity over fuzzed boundaries
    rng = np.random.default_rng(1)
    worst = 0.0
    for _ in range(20):
        T = rng.uniform(0.5, 10.0)
        y0v = rng.uniform(-2.0, 2.0)
        yfv = rng.uniform(-2.0, 2.0)
        yp = max(y0v, yfv) + rng.uniform(0.05, 2.0)
        kk = kstar(0.0, T, y0v, yp, yfv)
        m, p = orc.integral_identity_gap(YBoundary(0.0, T, y0v, yp, yfv, kk), T / 10000.0)
        worst = max(worst, abs(m - p) / abs(p))
    check("integral identity", worst <= 1e-6, f"worst relative gap {worst:.2e} over 20 sets")

    # QP pincer on fuzzed boundary sets
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(5):
        T = rng.uniform(1.0, 8.0)
        xf = State3(rng.uniform(-2, 2), rng.uniform(-1, 1), rng.uniform(-1, 1))
        qp = orc.qp_minjerk(orc.DiscreteOCP(200, 0.0, T, x0, xf, 0.0))
        cf = orc.closed_form_cost_x(x0, xf, 0.0, T)
        worst = max(worst, abs(qp.cost - cf) / max(abs(cf), abs(qp.cost), 1e-12))
    check("optimality pincer (x)", worst <= 0.01, f"worst relative cost gap {worst:.2e}")

    # kinematics roundtrip
    from .kinematics import forward, inverse

    geom = RobotGeometry()
    worst = 0.0
    for xx in np.linspace(-0.55, 0.55, 25):
        for yy in np.linspace(-0.79, -0.12, 25):
            r = np.hypot(xx, yy)
            if not 1e-6 < r < geom.leg_length - 1e-6:
                continue
            ang = inverse((xx, yy, xx, yy), geom)
            fx, fy, _, _ = forward(ang, geom)
            worst = max(worst, abs(fx - xx), abs(fy - yy))
    check("kinematics roundtrip", worst <= 1e-9, f"worst position error {worst:.2e}")

    print("verify:", "PASS" if failures == 0 else f"FAIL ({failures} checks)")
    return 0 if failures == 0 else 1


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    cmd = args.command
    if cmd == "run":
        return _gait_command(args, schedule_path=args.schedule)
    if cmd in BUILTIN_SCHEDULES:
        return _gait_command(args, schedule_text=BUILTIN_SCHEDULES[cmd])
    if cmd in PLANNER_SCENARIOS:
        return _planner_command(cmd, args)
    if cmd == "verify":
        return _verify_command()
    raise AssertionError(f"unhandled command {cmd}")


if __name__ == "__main__":
    sys.exit(main())
