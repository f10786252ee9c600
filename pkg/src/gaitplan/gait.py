"""Stride-level walking pattern generator.

A stride is one step cycle: one leg swings while the other stances, over a
time window [t0, t0 + t_s].  Walking parameters (step length L_s, maximum
foot clearance H_s, stride time t_s) translate into endpoint boundary
conditions for six trajectory channels (hip x/y, right ankle x/y, left
ankle x/y); every channel ends each stride at rest, which is what makes
stride hand-offs and mid-stride parameter changes free of acceleration
jumps.

Per stride (swing leg S, stance leg T, stance anchor X_T0):

    x targets:  hip -> X_T0 + L_s/4,  swing ankle -> X_T0 + L_s/2,
                stance ankle -> X_T0 (all with zero final vel/acc)
    y channels: swing ankle arcs 0 -> H_s -> 0; stance ankle stays 0;
                the hip dips from/to the straight-leg height with a peak
                at full leg extension.

The vertical channels' peak-shaping gains are seeded with the closed-form
`kstar` estimate and then calibrated so the realized maxima match the
commanded peaks (the estimate alone overshoots symmetric peaks by 35/32,
which both misses the clearance spec and pushes the hip out of the
reachable workspace).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kinematics import RobotGeometry, JointAngles, SagittalPose, hip_relative, inverse
from .trajectory import (
    DT_DEFAULT,
    PlannerChannel,
    State3,
    XBoundary,
    YBoundary,
    calibrate_peak_gain,
    kstar,
    plan_step_x,
    plan_step_y,
)

RIGHT = "right"
LEFT = "left"

#: Channel order used everywhere (matches the CSV column order).
CHANNEL_NAMES = ("x_h", "y_h", "x_ra", "y_ra", "x_la", "y_la")


class InfeasibleGeometryError(ValueError):
    """Walking parameters geometrically impossible for the given legs."""


@dataclass(frozen=True)
class WalkParams:
    """Step length, maximum foot clearance, stride time (SI units).

    step_length == 0 encodes a closing half-step (the swing foot lands
    next to the stance foot).
    """

    step_length: float
    clearance: float
    stride_time: float

    def __post_init__(self):
        if self.stride_time <= 0.0:
            raise ValueError(f"stride_time must be positive, got {self.stride_time}")
        if self.clearance < 0.0:
            raise ValueError(f"clearance must be non-negative, got {self.clearance}")
        if self.step_length < 0.0:
            raise ValueError(f"step_length must be non-negative, got {self.step_length}")

    def validate_geometry(self, geom: RobotGeometry) -> None:
        l = geom.leg_length
        if self.step_length / 4.0 >= l:
            raise InfeasibleGeometryError(
                f"step_length {self.step_length} infeasible for leg length {l}"
            )
        if self.clearance >= l:
            raise InfeasibleGeometryError(
                f"clearance {self.clearance} infeasible for leg length {l}"
            )


@dataclass
class StrideState:
    """Bookkeeping of the active stride."""

    swing_leg: str
    t0: float
    anchor_swing0: float
    anchor_stance0: float


@dataclass
class ChannelSet:
    """The six planner channels of one walking pattern.

    x-channels carry XBoundary targets, y-channels YBoundary targets;
    `validate` asserts that pairing.
    """

    x_h: PlannerChannel
    y_h: PlannerChannel
    x_ra: PlannerChannel
    y_ra: PlannerChannel
    x_la: PlannerChannel
    y_la: PlannerChannel

    def __getitem__(self, name: str) -> PlannerChannel:
        return getattr(self, name)

    def items(self):
        return ((name, getattr(self, name)) for name in CHANNEL_NAMES)

    def validate(self) -> None:
        for name, ch in self.items():
            want = XBoundary if name.startswith("x") else YBoundary
            if not isinstance(ch.boundary, want):
                raise TypeError(f"channel {name} carries {type(ch.boundary).__name__}")


def hip_drops(step_length: float, anchor_gap: float, l: float) -> tuple[float, float]:
    """Hip-height drops below full extension at stride start and end.

    anchor_gap is the horizontal distance between the feet at stride
    start; the returned (drop_start, drop_end) come from the straight-leg
    geometry of feet separated by anchor_gap and step_length/2.
    """
    half_gap = abs(anchor_gap) / 2.0
    quarter_step = step_length / 4.0
    if half_gap >= l or quarter_step >= l:
        raise InfeasibleGeometryError(
            f"feet separation infeasible (gap {anchor_gap}, step {step_length}, leg {l})"
        )
    drop_start = l - math.sqrt(l * l - half_gap * half_gap)
    drop_end = l - math.sqrt(l * l - quarter_step * quarter_step)
    return drop_start, drop_end


def stride_boundaries(
    params: WalkParams, stride: StrideState, geom: RobotGeometry
) -> dict[str, XBoundary | YBoundary]:
    """Per-channel boundary conditions for one stride.

    Keys follow CHANNEL_NAMES.  The vertical boundaries carry the plain
    `kstar` gain; GaitEngine replaces it with the calibrated one.
    """
    l = geom.leg_length
    ls = params.step_length
    t0 = stride.t0
    tf = t0 + params.stride_time
    anchor = stride.anchor_stance0
    gap = stride.anchor_swing0 - stride.anchor_stance0
    drop_start, drop_end = hip_drops(ls, gap, l)

    x_hip = XBoundary(tf=tf, xf=anchor + 0.25 * ls)
    x_swing = XBoundary(tf=tf, xf=anchor + 0.5 * ls)
    x_stance = XBoundary(tf=tf, xf=anchor)

    y_hip = YBoundary(
        t0=t0, tf=tf, y0=l - drop_start, yp=l, yf=l - drop_end,
        k=kstar(t0, tf, l - drop_start, l, l - drop_end),
    )
    y_swing = YBoundary(
        t0=t0, tf=tf, y0=0.0, yp=params.clearance, yf=0.0,
        k=kstar(t0, tf, 0.0, params.clearance, 0.0),
    )
    y_stance = YBoundary(t0=t0, tf=tf, y0=0.0, yp=0.0, yf=0.0, k=0.0)

    if stride.swing_leg == RIGHT:
        return {
            "x_h": x_hip, "y_h": y_hip,
            "x_ra": x_swing, "y_ra": y_swing,
            "x_la": x_stance, "y_la": y_stance,
        }
    return {
        "x_h": x_hip, "y_h": y_hip,
        "x_ra": x_stance, "y_ra": y_stance,
        "x_la": x_swing, "y_la": y_swing,
    }


@dataclass
class TickSample:
    """State snapshot produced by one engine tick (values at time t)."""

    t: float
    pose: SagittalPose
    angles: JointAngles
    pos: tuple[float, ...]   # six channel positions, CHANNEL_NAMES order
    vel: tuple[float, ...]
    acc: tuple[float, ...]
    jerk: tuple[float, ...]  # jerk held over the step that produced this sample


@dataclass
class UpdateResult:
    status: str  # "applied" | "deferred" | "rejected" | "noop"
    reason: str = ""


@dataclass
class StrideRecord:
    """Completed-stride summary used by the constraint checker."""

    t0: float
    t_end: float
    swing_leg: str
    params: WalkParams
    swing_start_x: float
    swing_end_x: float
    stance_x: float
    hip_end_x: float


class GaitEngine:
    """Drives the six planner channels through consecutive strides.

    The engine is a deterministic state machine: `tick(t, dt)` advances
    every channel one control period (returning the sample at t + dt) and
    handles stride hand-offs; `update_params` changes the walking
    parameters mid-stride, re-deriving boundary conditions while the
    channel states stay untouched (so position, velocity and acceleration
    remain continuous).
    """

    def __init__(
        self,
        params: WalkParams,
        geom: RobotGeometry | None = None,
        dt: float = DT_DEFAULT,
        start_x: float = 0.0,
        first_swing: str = RIGHT,
        t_start: float = 0.0,
    ):
        self.geom = geom or RobotGeometry()
        params.validate_geometry(self.geom)
        self.params = params
        self.dt = dt
        self.eps_snap = dt
        l = self.geom.leg_length

        standing = {
            "x_h": start_x, "y_h": l,
            "x_ra": start_x, "y_ra": 0.0,
            "x_la": start_x, "y_la": 0.0,
        }
        chans = {}
        for name in CHANNEL_NAMES:
            # placeholder boundaries, replaced by _begin_stride below
            bc: XBoundary | YBoundary
            if name.startswith("x"):
                bc = XBoundary(tf=t_start + params.stride_time, xf=standing[name])
            else:
                bc = YBoundary(
                    t0=t_start, tf=t_start + params.stride_time,
                    y0=standing[name], yp=standing[name], yf=standing[name], k=0.0,
                )
            chans[name] = PlannerChannel(state=State3(standing[name], 0.0, 0.0), boundary=bc)
        self.channels = ChannelSet(**chans)

        self.stride: StrideState | None = None
        self.stride_end = t_start
        self.stride_records: list[StrideRecord] = []
        self.events: list[str] = []
        self.max_jerk = {name: 0.0 for name in CHANNEL_NAMES}
        self._pending_params: WalkParams | None = None
        self._first_swing = first_swing
        self._begin_stride(t_start, first_swing)

    # -- stride management -------------------------------------------------

    def _begin_stride(self, t0: float, swing_leg: str) -> None:
        swing_x = self.channels["x_ra" if swing_leg == RIGHT else "x_la"].state.pos
        stance_x = self.channels["x_la" if swing_leg == RIGHT else "x_ra"].state.pos
        self.stride = StrideState(
            swing_leg=swing_leg, t0=t0,
            anchor_swing0=swing_x, anchor_stance0=stance_x,
        )
        self.stride_end = t0 + self.params.stride_time
        self._install_boundaries(stride_boundaries(self.params, self.stride, self.geom))

    def _install_boundaries(self, bcs: dict[str, XBoundary | YBoundary]) -> None:
        for name, bc in bcs.items():
            ch = self.channels[name]
            if isinstance(bc, YBoundary):
                bc.k = self._calibrated_gain(ch, bc)
            ch.boundary = bc

    def _calibrated_gain(self, ch: PlannerChannel, bc: YBoundary) -> float:
        s = ch.state
        yp = max(bc.yp, s.pos, bc.yf)
        if yp - max(s.pos, bc.yf) < 1e-12:
            return 0.0
        return calibrate_peak_gain(bc.tf - bc.t0, s.pos, s.vel, s.acc, yp, bc.yf)

    def _record_stride(self) -> None:
        st = self.stride
        # Strides end at rest on their targets; enforce exactly so anchors
        # and knee angles at hand-off carry no integration residue.
        for name in CHANNEL_NAMES:
            ch = self.channels[name]
            bc = ch.boundary
            if isinstance(bc, XBoundary):
                ch.state = State3(bc.xf, bc.vxf, bc.axf)
            else:
                ch.state = State3(bc.yf, 0.0, 0.0)
        swing_ch = "x_ra" if st.swing_leg == RIGHT else "x_la"
        stance_ch = "x_la" if st.swing_leg == RIGHT else "x_ra"
        self.stride_records.append(
            StrideRecord(
                t0=st.t0,
                t_end=self.stride_end,
                swing_leg=st.swing_leg,
                params=self.params,
                swing_start_x=st.anchor_swing0,
                swing_end_x=self.channels[swing_ch].state.pos,
                stance_x=self.channels[stance_ch].state.pos,
                hip_end_x=self.channels["x_h"].state.pos,
            )
        )

    def _finalize_stride(self) -> None:
        self._record_stride()
        if self._pending_params is not None:
            self.params = self._pending_params
            self._pending_params = None
            self.events.append(f"deferred parameter change applied at t={self.stride_end:g}")
        next_swing = LEFT if self.stride.swing_leg == RIGHT else RIGHT
        self._begin_stride(self.stride_end, next_swing)

    def finish(self, t: float) -> None:
        """Close out a run ending at time t.

        If t lands on the active stride's end, the stride is recorded (and
        the channels snapped to their targets) without starting a new one;
        a run stopping mid-stride leaves the partial stride unrecorded.
        """
        if t >= self.stride_end - 1e-9:
            self._record_stride()
            self.stride = None

    # -- public API ----------------------------------------------------------

    @property
    def effective_params(self) -> WalkParams:
        """Parameters the next stride will use (pending deferred change wins)."""
        return self._pending_params if self._pending_params is not None else self.params

    def tick(self, t: float, dt: float | None = None) -> TickSample:
        """Advance all channels from t to t + dt; returns the new sample."""
        if self.stride is None:
            raise RuntimeError("engine already finished")
        if dt is None:
            dt = self.dt
        while t >= self.stride_end - 1e-9:
            self._finalize_stride()
        for name in CHANNEL_NAMES:
            ch = self.channels[name]
            if name.startswith("x"):
                plan_step_x(ch, t, dt, self.eps_snap)
            else:
                plan_step_y(ch, t, dt, self.eps_snap)
            aj = abs(ch.last_jerk)
            if aj > self.max_jerk[name]:
                self.max_jerk[name] = aj
        return self.sample(t + dt)

    def sample(self, t: float) -> TickSample:
        """Snapshot of the current channel states and derived joint angles."""
        ch = self.channels
        pose = SagittalPose(
            hip=(ch["x_h"].state.pos, ch["y_h"].state.pos),
            ankle_r=(ch["x_ra"].state.pos, ch["y_ra"].state.pos),
            ankle_l=(ch["x_la"].state.pos, ch["y_la"].state.pos),
        )
        angles = inverse(hip_relative(pose), self.geom)
        states = [ch[name].state for name in CHANNEL_NAMES]
        return TickSample(
            t=t,
            pose=pose,
            angles=angles,
            pos=tuple(s.pos for s in states),
            vel=tuple(s.vel for s in states),
            acc=tuple(s.acc for s in states),
            jerk=tuple(ch[name].last_jerk for name in CHANNEL_NAMES),
        )

    def update_params(self, t: float, new_params: WalkParams) -> UpdateResult:
        """Change walking parameters at time t within the active stride.

        Boundary conditions of affected channels are recomputed from the
        original stride anchors; vertical channels re-anchor their gain at
        the current state.  Changes arriving inside the final snap window
        are deferred to the next stride; changes that would move the
        stride end into the past are rejected and the gait continues on
        the old parameters.
        """
        try:
            new_params.validate_geometry(self.geom)
        except InfeasibleGeometryError as exc:
            self.events.append(f"rejected parameter change at t={t:g}: {exc}")
            return UpdateResult("rejected", str(exc))

        if t >= self.stride_end - self.eps_snap - 1e-9:
            self._pending_params = new_params
            self.events.append(f"parameter change at t={t:g} deferred to next stride")
            return UpdateResult("deferred")

        if new_params == self.params:
            return UpdateResult("noop")

        st = self.stride
        new_end = st.t0 + new_params.stride_time
        if new_end <= t + self.eps_snap:
            msg = f"new stride end {new_end:g} not after t={t:g}"
            self.events.append(f"rejected parameter change at t={t:g}: {msg}")
            return UpdateResult("rejected", msg)

        try:
            bcs = stride_boundaries(new_params, st, self.geom)
        except InfeasibleGeometryError as exc:
            self.events.append(f"rejected parameter change at t={t:g}: {exc}")
            return UpdateResult("rejected", str(exc))

        for name, bc in bcs.items():
            ch = self.channels[name]
            cur = ch.boundary
            if isinstance(bc, XBoundary):
                if (cur.xf, cur.tf) != (bc.xf, bc.tf):
                    ch.boundary = bc
            else:
                if (cur.yp, cur.yf, cur.tf) != (bc.yp, bc.yf, bc.tf):
                    yp = bc.yp
                    if ch.state.pos > yp:
                        self.events.append(
                            f"peak clamp on {name} at t={t:g}: "
                            f"current {ch.state.pos:.6f} above commanded {yp:.6f}"
                        )
                        yp = ch.state.pos
                    nb = YBoundary(t0=t, tf=bc.tf, y0=ch.state.pos, yp=yp, yf=bc.yf, k=0.0)
                    nb.k = self._calibrated_gain(ch, nb)
                    ch.boundary = nb

        self.params = new_params
        self.stride_end = new_end
        return UpdateResult("applied")


# ---------------------------------------------------------------------------
# Constraint checking
# ---------------------------------------------------------------------------

@dataclass
class StrideConstraintRow:
    t0: float
    t_end: float
    swing_leg: str
    hip_peak: float
    hip_target: float
    clearance_peak: float
    clearance_target: float
    knee_start: tuple[float, float]
    knee_end: tuple[float, float]
    swing_foot_y_end: float
    violations: list[str] = field(default_factory=list)


@dataclass
class ConstraintReport:
    strides: list[StrideConstraintRow]
    acc_jump: dict[str, float]
    acc_jump_tol: dict[str, float]
    violations: list[str]

    @property
    def passed(self) -> bool:
        return not self.violations


def check_constraints(
    t,
    pos,
    acc,
    angles,
    records: list[StrideRecord],
    geom: RobotGeometry,
    max_jerk: dict[str, float],
    dt: float,
    hip_tol_rel: float = 0.02,
    clearance_tol: float = 0.005,
    knee_tol: float = 1e-3,
    foot_y_tol: float = 1e-3,
) -> ConstraintReport:
    """Verify a completed run against the walking constraints.

    Arrays: t (N,), pos/acc (N, 6) in CHANNEL_NAMES order, angles (N, 4)
    as (hip_r, knee_r, hip_l, knee_l).  Per stride it checks peak hip
    height against full leg extension, swing-foot clearance against the
    commanded value, knee angles at stride boundaries, and the swing foot
    returning to the ground; globally it checks per-channel acceleration
    jumps against the jerk budget max|u| * dt.
    """
    t = np.asarray(t)
    pos = np.asarray(pos)
    acc = np.asarray(acc)
    angles = np.asarray(angles)
    l = geom.leg_length
    violations: list[str] = []

    rows = []
    for rec in records:
        i0 = int(np.searchsorted(t, rec.t0 - 1e-9))
        i1 = int(np.searchsorted(t, rec.t_end - 1e-9))
        i1 = min(i1, len(t) - 1)
        swing_y = pos[i0 : i1 + 1, 3 if rec.swing_leg == RIGHT else 5]
        hip_y = pos[i0 : i1 + 1, 1]
        row = StrideConstraintRow(
            t0=rec.t0,
            t_end=rec.t_end,
            swing_leg=rec.swing_leg,
            hip_peak=float(hip_y.max()),
            hip_target=l,
            clearance_peak=float(swing_y.max()),
            clearance_target=rec.params.clearance,
            knee_start=(float(angles[i0, 1]), float(angles[i0, 3])),
            knee_end=(float(angles[i1, 1]), float(angles[i1, 3])),
            swing_foot_y_end=float(swing_y[-1]),
        )
        if abs(row.hip_peak - l) > hip_tol_rel * l:
            row.violations.append(
                f"hip peak {row.hip_peak:.4f} deviates from {l:.4f} by more than {hip_tol_rel:.0%}"
            )
        if abs(row.clearance_peak - row.clearance_target) > clearance_tol:
            row.violations.append(
                f"clearance peak {row.clearance_peak:.4f} off target {row.clearance_target:.4f}"
            )
        for label, pair in (("start", row.knee_start), ("end", row.knee_end)):
            if max(abs(pair[0]), abs(pair[1])) > knee_tol:
                row.violations.append(f"knee angle at stride {label} exceeds {knee_tol}")
        if abs(row.swing_foot_y_end) > foot_y_tol:
            row.violations.append(f"swing foot ends at y={row.swing_foot_y_end:.2e}")
        for v in row.violations:
            violations.append(f"stride [{rec.t0:g}, {rec.t_end:g}]: {v}")
        rows.append(row)

    acc_jump = {}
    acc_jump_tol = {}
    for j, name in enumerate(CHANNEL_NAMES):
        jump = float(np.abs(np.diff(acc[:, j])).max()) if len(t) > 1 else 0.0
        tol = max_jerk.get(name, 0.0) * dt * 1.01 + 1e-15
        acc_jump[name] = jump
        acc_jump_tol[name] = tol
        if jump > tol:
            violations.append(
                f"channel {name}: acceleration jump {jump:.3e} exceeds budget {tol:.3e}"
            )

    return ConstraintReport(
        strides=rows, acc_jump=acc_jump, acc_jump_tol=acc_jump_tol, violations=violations
    )
