"""Scripted simulation runs, CSV output and run reports.

Two kinds of runs:

- gait runs: a `Schedule` drives the `GaitEngine` at a fixed control rate;
  the CSV carries the six channel positions, their first and second
  derivatives, and the four joint angles, one row per control step.
- planner scenarios (`fig10`..`fig13`): a single trajectory channel with
  scripted boundary changes, exercising the planners in isolation.

Runs are deterministic: a given schedule, geometry and control period
produce byte-identical CSV output.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .gait import CHANNEL_NAMES, ConstraintReport, GaitEngine, WalkParams, check_constraints
from .kinematics import RobotGeometry
from .schedule import Schedule, parse_schedule
from .trajectory import (
    DT_DEFAULT,
    PlannerChannel,
    State3,
    XBoundary,
    YBoundary,
    kstar,
    plan_step_x,
    plan_step_y,
    retarget_x,
    retarget_y,
)

GAIT_COLUMNS = (
    "t",
    "Xh", "Yh", "XRa", "YRa", "XLa", "YLa",
    "dXh", "dYh", "dXRa", "dYRa", "dXLa", "dYLa",
    "ddXh", "ddYh", "ddXRa", "ddYRa", "ddXLa", "ddYLa",
    "thRh", "thRk", "thLh", "thLk",
)

#: CSV acceleration column -> engine channel name
ACC_COLUMNS = {
    "ddXh": "x_h", "ddYh": "y_h",
    "ddXRa": "x_ra", "ddYRa": "y_ra",
    "ddXLa": "x_la", "ddYLa": "y_la",
}

PLANNER_COLUMNS = ("t", "x", "dx", "ddx", "u")


class MalformedCSVError(ValueError):
    """CSV input missing the expected header or numeric fields."""


@dataclass
class RunConfig:
    geom: RobotGeometry = field(default_factory=RobotGeometry)
    dt: float = DT_DEFAULT
    start_x: float = 0.0
    first_swing: str = "right"


@dataclass
class ContinuityResult:
    """Per-channel max inter-sample acceleration jump vs. its budget."""

    max_jump: dict[str, float]
    tolerance: dict[str, float]
    worst_row: dict[str, int]

    @property
    def passed(self) -> bool:
        return all(self.max_jump[c] <= self.tolerance[c] for c in self.max_jump)

    def failures(self) -> list[str]:
        return [
            f"column {c}: jump {self.max_jump[c]:.3e} at row {self.worst_row[c]} "
            f"exceeds {self.tolerance[c]:.3e}"
            for c in self.max_jump
            if self.max_jump[c] > self.tolerance[c]
        ]


@dataclass
class RunReport:
    continuity: ContinuityResult
    constraints: ConstraintReport
    events: list[str]
    rows: int

    @property
    def passed(self) -> bool:
        return self.continuity.passed and self.constraints.passed

    def to_text(self) -> str:
        out = io.StringIO()
        out.write(f"rows: {self.rows}\n")
        out.write(f"continuity: {'pass' if self.continuity.passed else 'FAIL'}\n")
        for c in self.continuity.max_jump:
            out.write(
                f"  {c}: max acc jump {self.continuity.max_jump[c]:.3e}"
                f" (budget {self.continuity.tolerance[c]:.3e})\n"
            )
        out.write(f"constraints: {'pass' if self.constraints.passed else 'FAIL'}\n")
        for row in self.constraints.strides:
            out.write(
                f"  stride [{row.t0:g}, {row.t_end:g}] swing={row.swing_leg}:"
                f" hip peak {row.hip_peak:.4f}/{row.hip_target:.4f},"
                f" clearance {row.clearance_peak:.4f}/{row.clearance_target:.4f},"
                f" |knee@end| {max(abs(row.knee_end[0]), abs(row.knee_end[1])):.2e}\n"
            )
        for v in self.constraints.violations:
            out.write(f"  violation: {v}\n")
        for e in self.events:
            out.write(f"event: {e}\n")
        out.write(f"result: {'PASS' if self.passed else 'FAIL'}\n")
        return out.getvalue()


@dataclass
class GaitRunResult:
    t: np.ndarray          # (n+1,) sample times including t=0
    pos: np.ndarray        # (n+1, 6) channel positions, CHANNEL_NAMES order
    vel: np.ndarray
    acc: np.ndarray
    angles: np.ndarray     # (n+1, 4): hip_r, knee_r, hip_l, knee_l
    report: RunReport
    records: list
    config: RunConfig


def run(schedule: Schedule, config: RunConfig | None = None) -> GaitRunResult:
    """Execute a gait schedule; returns the sampled run and its report.

    Events are applied at their timestamps before the control step that
    starts there (changes landing in a stride's final snap window are
    deferred to the next stride by the engine).
    """
    config = config or RunConfig()
    dt = config.dt
    schedule.initial.validate_geometry(config.geom)
    eng = GaitEngine(
        schedule.initial,
        config.geom,
        dt=dt,
        start_x=config.start_x,
        first_swing=config.first_swing,
    )
    n = int(round(schedule.duration / dt))

    t_arr = np.empty(n + 1)
    pos = np.empty((n + 1, 6))
    vel = np.empty((n + 1, 6))
    acc = np.empty((n + 1, 6))
    ang = np.empty((n + 1, 4))

    s = eng.sample(0.0)
    t_arr[0] = 0.0
    pos[0] = s.pos
    vel[0] = s.vel
    acc[0] = s.acc
    ang[0] = s.angles.as_tuple()

    pending = list(schedule.events)
    for i in range(n):
        t = i * dt
        while pending and pending[0].time <= t + 1e-9:
            ev = pending.pop(0)
            base = eng.effective_params
            values = {
                "step_length": base.step_length,
                "clearance": base.clearance,
                "stride_time": base.stride_time,
            }
            values.update(ev.fields)
            eng.update_params(t, WalkParams(**values))
        s = eng.tick(t, dt)
        t_arr[i + 1] = s.t
        pos[i + 1] = s.pos
        vel[i + 1] = s.vel
        acc[i + 1] = s.acc
        ang[i + 1] = s.angles.as_tuple()
    if n > 0:
        eng.finish(n * dt)

    constraints = check_constraints(
        t_arr, pos, acc, ang, eng.stride_records, config.geom, eng.max_jerk, dt
    )
    continuity = ContinuityResult(max_jump={}, tolerance={}, worst_row={})
    for j, name in enumerate(CHANNEL_NAMES):
        col = [c for c, ch in ACC_COLUMNS.items() if ch == name][0]
        jumps = np.abs(np.diff(acc[:, j])) if n > 0 else np.zeros(0)
        continuity.max_jump[col] = float(jumps.max()) if len(jumps) else 0.0
        continuity.worst_row[col] = int(jumps.argmax()) + 1 if len(jumps) else 0
        continuity.tolerance[col] = eng.max_jerk[name] * dt * 1.01 + 1e-15

    report = RunReport(
        continuity=continuity,
        constraints=constraints,
        events=list(eng.events),
        rows=n,
    )
    return GaitRunResult(
        t=t_arr, pos=pos, vel=vel, acc=acc, angles=ang,
        report=report, records=eng.stride_records, config=config,
    )


def write_gait_csv(result: GaitRunResult, fp, degrees: bool = False) -> None:
    """One row per control step (the t=0 state is not emitted)."""
    fp.write(",".join(GAIT_COLUMNS) + "\n")
    ang = result.angles
    if degrees:
        ang = np.degrees(ang)
    for i in range(1, len(result.t)):
        row = (
            [result.t[i]]
            + list(result.pos[i])
            + list(result.vel[i])
            + list(result.acc[i])
            + list(ang[i])
        )
        fp.write(",".join(repr(float(v)) for v in row) + "\n")


def parse_csv(text: str) -> tuple[list[str], np.ndarray]:
    """Parse CSV produced by this module; raises MalformedCSVError."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MalformedCSVError("empty CSV")
    names = lines[0].split(",")
    rows = []
    for idx, ln in enumerate(lines[1:], start=2):
        parts = ln.split(",")
        if len(parts) != len(names):
            raise MalformedCSVError(f"row {idx}: expected {len(names)} fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise MalformedCSVError(f"row {idx}: {exc}") from None
    return names, np.array(rows).reshape(len(rows), len(names))


def continuity_report(
    names: list[str], data: np.ndarray, tolerance: dict[str, float]
) -> ContinuityResult:
    """Max inter-sample acceleration jump per `dd*` column of a parsed CSV.

    `tolerance` maps column names to jump budgets (max held |jerk| * dt *
    1.01 for runs produced here).  Columns without an entry get budget 0.
    """
    acc_cols = [c for c in names if c.startswith("dd")]
    if not acc_cols:
        raise MalformedCSVError("no acceleration (dd*) columns present")
    res = ContinuityResult(max_jump={}, tolerance={}, worst_row={})
    for c in acc_cols:
        col = data[:, names.index(c)]
        jumps = np.abs(np.diff(col))
        res.max_jump[c] = float(jumps.max()) if len(jumps) else 0.0
        res.worst_row[c] = int(jumps.argmax()) + 1 if len(jumps) else 0
        res.tolerance[c] = tolerance.get(c, 0.0)
    return res


# ---------------------------------------------------------------------------
# Built-in experiments
# ---------------------------------------------------------------------------

#: Straight 12 s walk: half-step, two full strides, closing half-step.
EXP1_SCHEDULE = """\
# four strides: right half-step, two full strides, closing left half-step
init Ls 0.6 Hs 0.1 ts 2
duration 12
at 2 set ts 4
at 10 set ts 2
at 10 set Ls 0
"""

#: Parameter-change walk: clearance up mid-swing, slower strides, longer
#: steps, then a closing step that puts the left foot 0.2 m ahead.
EXP2_SCHEDULE = """\
init Ls 0.4 Hs 0.06 ts 1.5
duration 13.2
at 1.8 set Hs 0.12
at 4.5 set ts 3
at 6 set Ls 0.6
at 12 set Ls 0.4
at 12 set ts 2.7
"""

BUILTIN_SCHEDULES = {"exp1": EXP1_SCHEDULE, "exp2": EXP2_SCHEDULE}


def run_builtin(name: str, config: RunConfig | None = None) -> GaitRunResult:
    config = config or RunConfig()
    return run(parse_schedule(BUILTIN_SCHEDULES[name], config.geom), config)


# ---------------------------------------------------------------------------
# Planner scenarios (single-channel runs with scripted boundary changes)
# ---------------------------------------------------------------------------

@dataclass
class PlannerRunResult:
    name: str
    t: np.ndarray
    pos: np.ndarray
    vel: np.ndarray
    acc: np.ndarray
    u: np.ndarray          # jerk held over each interval, aligned with t[1:]
    target: tuple[float, float, float]
    terminal_error: float
    max_jump: float
    jump_tolerance: float

    @property
    def passed(self) -> bool:
        return self.terminal_error <= 1e-3 and self.max_jump <= self.jump_tolerance

    def to_text(self) -> str:
        return (
            f"{self.name}: terminal error {self.terminal_error:.2e} (tol 1e-03), "
            f"max acc jump {self.max_jump:.3e} (budget {self.jump_tolerance:.3e}) "
            f"-> {'PASS' if self.passed else 'FAIL'}\n"
        )


def _planner_scenario(name: str):
    """(kind, duration, initial boundary, [(time, change), ...]) per scenario."""
    if name == "fig10":
        return "x", 5.0, XBoundary(tf=5.0, xf=2.0, vxf=1.0, axf=1.0), []
    if name == "fig11":
        return (
            "x", 5.0, XBoundary(tf=5.0, xf=2.0, vxf=1.0, axf=1.0),
            [
                (2.0, XBoundary(tf=5.0, xf=1.0, vxf=-0.5, axf=-1.0)),
                (3.0, XBoundary(tf=4.0, xf=1.0, vxf=-0.5, axf=-1.0)),
            ],
        )
    if name == "fig12":
        bc = YBoundary(t0=0.0, tf=5.0, y0=0.0, yp=2.0, yf=1.0, k=kstar(0.0, 5.0, 0.0, 2.0, 1.0))
        return "y", 5.0, bc, []
    if name == "fig13":
        bc = YBoundary(t0=0.0, tf=5.0, y0=0.0, yp=2.0, yf=1.0, k=kstar(0.0, 5.0, 0.0, 2.0, 1.0))
        return (
            "y", 6.0, bc,
            [
                (1.0, {"tf": 5.0, "yp": 1.5, "yf": 0.5}),
                (2.0, {"tf": 5.0, "yp": 2.5, "yf": 1.0}),
                (3.0, {"tf": 6.0, "yp": 2.0, "yf": 0.0}),
            ],
        )
    raise ValueError(f"unknown planner scenario {name!r}")


PLANNER_SCENARIOS = ("fig10", "fig11", "fig12", "fig13")


def run_planner(name: str, dt: float = DT_DEFAULT) -> PlannerRunResult:
    """Run one built-in planner scenario at the given control period."""
    kind, duration, bc, changes = _planner_scenario(name)
    ch = PlannerChannel(state=State3(0.0, 0.0, 0.0), boundary=bc)
    n = int(round(duration / dt))
    t = dt * np.arange(n + 1)
    pos = np.empty(n + 1)
    vel = np.empty(n + 1)
    acc = np.empty(n + 1)
    u = np.empty(n)
    pos[0] = vel[0] = acc[0] = 0.0
    pending = list(changes)
    for i in range(n):
        ti = i * dt
        while pending and pending[0][0] <= ti + 1e-9:
            _, change = pending.pop(0)
            if kind == "x":
                retarget_x(ch, change, ti, eps_snap=dt)
            else:
                retarget_y(ch, ti, eps_snap=dt, **change)
        if kind == "x":
            s = plan_step_x(ch, ti, dt)
        else:
            s = plan_step_y(ch, ti, dt)
        pos[i + 1] = s.pos
        vel[i + 1] = s.vel
        acc[i + 1] = s.acc
        u[i] = ch.last_jerk

    if kind == "x":
        target = (ch.boundary.xf, ch.boundary.vxf, ch.boundary.axf)
    else:
        target = (ch.boundary.yf, 0.0, 0.0)
    terminal_error = max(
        abs(pos[-1] - target[0]), abs(vel[-1] - target[1]), abs(acc[-1] - target[2])
    )
    jumps = np.abs(np.diff(acc))
    return PlannerRunResult(
        name=name,
        t=t, pos=pos, vel=vel, acc=acc, u=u,
        target=target,
        terminal_error=float(terminal_error),
        max_jump=float(jumps.max()),
        jump_tolerance=float(np.abs(u).max() * dt * 1.01 + 1e-15),
    )


def write_planner_csv(result: PlannerRunResult, fp) -> None:
    fp.write(",".join(PLANNER_COLUMNS) + "\n")
    for i in range(1, len(result.t)):
        row = [result.t[i], result.pos[i], result.vel[i], result.acc[i], result.u[i - 1]]
        fp.write(",".join(repr(float(v)) for v in row) + "\n")
