"""Line-oriented walking schedules.

Format (one directive per line, '#' starts a comment):

    init Ls <m> Hs <m> ts <s>     initial walking parameters (required)
    duration <s>                  total simulated time (required)
    at <time_s> set <Ls|Hs|ts> <value>   parameter change during the run

Event times must be non-decreasing; several changes at the same time are
applied together as one atomic parameter update.  Closing half-steps are
ordinary events (e.g. `at 10 set Ls 0` ends a walk with the feet
together).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .gait import WalkParams
from .kinematics import RobotGeometry

FIELDS = {"Ls": "step_length", "Hs": "clearance", "ts": "stride_time"}


class ScheduleError(ValueError):
    """Schedule text rejected; message carries the line number."""


@dataclass
class ScheduleEvent:
    time: float
    fields: dict[str, float] = field(default_factory=dict)  # WalkParams field -> value


@dataclass
class Schedule:
    initial: WalkParams
    duration: float
    events: list[ScheduleEvent] = field(default_factory=list)


def _err(lineno: int, msg: str) -> ScheduleError:
    return ScheduleError(f"line {lineno}: {msg}")


def _parse_float(token: str, lineno: int, what: str) -> float:
    try:
        return float(token)
    except ValueError:
        raise _err(lineno, f"{what} is not a number: {token!r}") from None


def parse_schedule(text: str, geom: RobotGeometry | None = None) -> Schedule:
    """Parse and validate a schedule; raises ScheduleError with line numbers.

    Every state the schedule can put the walk in (initial parameters and
    each event applied in order) is validated against the WalkParams
    invariants, including geometric feasibility when a geometry is given.
    """
    initial: WalkParams | None = None
    duration: float | None = None
    raw_events: list[tuple[float, str, float, int]] = []

    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        tokens = stripped.split()
        head = tokens[0]
        if head == "init":
            if initial is not None:
                raise _err(lineno, "duplicate init line")
            if len(tokens) != 7 or tokens[1] != "Ls" or tokens[3] != "Hs" or tokens[5] != "ts":
                raise _err(lineno, "expected: init Ls <v> Hs <v> ts <v>")
            ls = _parse_float(tokens[2], lineno, "Ls")
            hs = _parse_float(tokens[4], lineno, "Hs")
            ts = _parse_float(tokens[6], lineno, "ts")
            try:
                initial = WalkParams(step_length=ls, clearance=hs, stride_time=ts)
            except ValueError as exc:
                raise _err(lineno, str(exc)) from None
        elif head == "duration":
            if duration is not None:
                raise _err(lineno, "duplicate duration line")
            if len(tokens) != 2:
                raise _err(lineno, "expected: duration <seconds>")
            duration = _parse_float(tokens[1], lineno, "duration")
            if duration < 0.0:
                raise _err(lineno, f"duration must be non-negative, got {duration}")
        elif head == "at":
            if len(tokens) != 5 or tokens[2] != "set":
                raise _err(lineno, "expected: at <time_s> set <Ls|Hs|ts> <value>")
            t = _parse_float(tokens[1], lineno, "event time")
            if t < 0.0:
                raise _err(lineno, f"event time must be non-negative, got {t}")
            if tokens[3] not in FIELDS:
                raise _err(lineno, f"unknown field {tokens[3]!r} (use Ls, Hs or ts)")
            v = _parse_float(tokens[4], lineno, "event value")
            raw_events.append((t, FIELDS[tokens[3]], v, lineno))
        else:
            raise _err(lineno, f"unknown directive {head!r}")

    if initial is None:
        raise ScheduleError("missing init line")
    if duration is None:
        raise ScheduleError("missing duration line")

    events: list[ScheduleEvent] = []
    for t, fname, v, lineno in raw_events:
        if events and t < events[-1].time:
            raise _err(lineno, f"event time {t} before previous event {events[-1].time}")
        if events and t == events[-1].time:
            events[-1].fields[fname] = v
        else:
            events.append(ScheduleEvent(time=t, fields={fname: v}))

    # replay the timeline so infeasible parameter states fail at parse time
    current = initial
    if geom is not None:
        current.validate_geometry(geom)
    for ev in events:
        values = {
            "step_length": current.step_length,
            "clearance": current.clearance,
            "stride_time": current.stride_time,
        }
        values.update(ev.fields)
        try:
            current = WalkParams(**values)
            if geom is not None:
                current.validate_geometry(geom)
        except ValueError as exc:
            raise ScheduleError(f"event at t={ev.time:g}: {exc}") from None

    return Schedule(initial=initial, duration=duration, events=events)
