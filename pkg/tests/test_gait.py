"""Gait engine tests: boundary tables, stride machinery, parameter updates."""

import math

import numpy as np
import pytest

from gaitplan.gait import (
    CHANNEL_NAMES,
    GaitEngine,
    InfeasibleGeometryError,
    StrideState,
    WalkParams,
    check_constraints,
    hip_drops,
    stride_boundaries,
)
from gaitplan.kinematics import RobotGeometry
from gaitplan.trajectory import XBoundary, YBoundary, kstar

GEOM = RobotGeometry(0.4, 0.4)


def run_engine(eng, duration, dt=1e-3, events=None):
    """Drive an engine for `duration`; returns stacked sample arrays."""
    events = sorted(events or [])
    n = int(round(duration / dt))
    t = np.empty(n + 1)
    pos = np.empty((n + 1, 6))
    vel = np.empty((n + 1, 6))
    acc = np.empty((n + 1, 6))
    ang = np.empty((n + 1, 4))
    s = eng.sample(0.0)
    t[0], pos[0], vel[0], acc[0], ang[0] = 0.0, s.pos, s.vel, s.acc, s.angles.as_tuple()
    pending = list(events)
    for i in range(n):
        ti = i * dt
        while pending and pending[0][0] <= ti + 1e-9:
            _, params = pending.pop(0)
            eng.update_params(ti, params)
        s = eng.tick(ti, dt)
        t[i + 1], pos[i + 1], vel[i + 1], acc[i + 1] = s.t, s.pos, s.vel, s.acc
        ang[i + 1] = s.angles.as_tuple()
    eng.finish(n * dt)
    return t, pos, vel, acc, ang


class TestHipDrops:
    def test_standing_start_zero(self):
        d0, _ = hip_drops(0.6, 0.0, 0.8)
        assert d0 == 0.0

    def test_step_drop_value(self):
        _, dh = hip_drops(0.6, 0.0, 0.8)
        assert dh == pytest.approx(0.8 - math.sqrt(0.64 - 0.15**2), abs=1e-15)
        assert dh == pytest.approx(0.0142, abs=5e-5)

    def test_zero_step_zero_drop(self):
        _, dh = hip_drops(0.0, 0.3, 0.8)
        assert dh == 0.0

    def test_infeasible(self):
        with pytest.raises(InfeasibleGeometryError):
            hip_drops(4.0, 0.0, 0.8)
        with pytest.raises(InfeasibleGeometryError):
            hip_drops(0.6, 1.7, 0.8)


class TestStrideBoundaries:
    def test_right_swing_targets(self):
        stride = StrideState(swing_leg="right", t0=0.0, anchor_swing0=0.0, anchor_stance0=0.3)
        params = WalkParams(step_length=0.6, clearance=0.1, stride_time=2.0)
        bcs = stride_boundaries(params, stride, GEOM)
        assert bcs["x_ra"].xf == pytest.approx(0.6)
        assert bcs["x_h"].xf == pytest.approx(0.45)
        assert bcs["x_la"].xf == pytest.approx(0.3)
        assert all(bcs[n].tf == 2.0 for n in CHANNEL_NAMES if n.startswith("x"))
        assert bcs["y_ra"].yp == 0.1
        assert bcs["y_la"].yp == 0.0
        assert bcs["y_ra"].k == pytest.approx(kstar(0.0, 2.0, 0.0, 0.1, 0.0))

    def test_left_swing_mirrors(self):
        stride = StrideState(swing_leg="left", t0=2.0, anchor_swing0=0.0, anchor_stance0=0.3)
        params = WalkParams(step_length=0.6, clearance=0.1, stride_time=4.0)
        bcs = stride_boundaries(params, stride, GEOM)
        assert bcs["x_la"].xf == pytest.approx(0.6)
        assert bcs["x_ra"].xf == pytest.approx(0.3)
        assert bcs["x_h"].xf == pytest.approx(0.45)
        assert bcs["y_la"].yp == 0.1
        assert bcs["y_ra"].yp == 0.0

    def test_standing_start_hip_profile(self):
        stride = StrideState(swing_leg="right", t0=0.0, anchor_swing0=0.0, anchor_stance0=0.0)
        params = WalkParams(step_length=0.6, clearance=0.1, stride_time=2.0)
        bcs = stride_boundaries(params, stride, GEOM)
        dh = 0.8 - math.sqrt(0.64 - 0.15**2)
        assert bcs["y_h"].y0 == pytest.approx(0.8)
        assert bcs["y_h"].yp == pytest.approx(0.8)
        assert bcs["y_h"].yf == pytest.approx(0.8 - dh)
        # descending profile degenerates to zero gain
        assert bcs["y_h"].k == 0.0

    def test_zero_clearance_flat_swing_channel(self):
        stride = StrideState(swing_leg="right", t0=0.0, anchor_swing0=0.0, anchor_stance0=0.0)
        params = WalkParams(step_length=0.4, clearance=0.0, stride_time=2.0)
        bcs = stride_boundaries(params, stride, GEOM)
        assert (bcs["y_ra"].y0, bcs["y_ra"].yp, bcs["y_ra"].yf) == (0.0, 0.0, 0.0)
        assert bcs["y_ra"].k == 0.0


class TestEngineWalk:
    def test_stationary_gait_constant_pose(self):
        eng = GaitEngine(WalkParams(0.0, 0.0, 1.0), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(eng, 3.0)
        assert np.all(pos == pos[0])
        assert np.all(vel == 0.0)
        assert np.all(acc == 0.0)

    def test_single_stride_from_standing(self):
        eng = GaitEngine(WalkParams(0.6, 0.1, 2.0), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(eng, 2.0)
        # half-step advance of the swing (right) foot, hip midway
        assert pos[-1, 2] == pytest.approx(0.3, abs=1e-9)
        assert pos[-1, 4] == pytest.approx(0.0, abs=1e-9)
        assert pos[-1, 0] == pytest.approx(0.15, abs=1e-9)
        # feet grounded at both ends, swing peaked at the clearance
        swing_y = pos[:, 3]
        assert abs(swing_y[0]) <= 1e-12 and abs(swing_y[-1]) <= 1e-9
        assert swing_y.max() == pytest.approx(0.1, abs=5e-4)
        # knees straight at both stride boundaries
        assert max(abs(ang[0, 1]), abs(ang[0, 3])) <= 1e-6
        assert max(abs(ang[-1, 1]), abs(ang[-1, 3])) <= 1e-6

    def test_stride_closure_and_alternation(self):
        eng = GaitEngine(WalkParams(0.4, 0.05, 1.5), GEOM, dt=1e-3)
        run_engine(eng, 6.0)
        legs = [r.swing_leg for r in eng.stride_records]
        assert legs == ["right", "left", "right", "left"]
        for r in eng.stride_records:
            # swing foot lands exactly on its table target
            assert r.swing_end_x == pytest.approx(r.stance_x + 0.2, abs=1e-3)
            # hip ends midway between the feet
            assert r.hip_end_x == pytest.approx(
                0.5 * (r.swing_end_x + r.stance_x), abs=1e-3
            )

    def test_progress_bookkeeping_symmetric(self):
        eng = GaitEngine(WalkParams(0.4, 0.05, 1.5), GEOM, dt=1e-3)
        run_engine(eng, 6.0)
        # after the standing half-step, every stride advances by 0.4
        for r in eng.stride_records[1:]:
            assert r.swing_end_x - r.swing_start_x == pytest.approx(0.4, abs=1e-3)

    @pytest.mark.parametrize("clearance", [0.05, 0.1, 0.2])
    @pytest.mark.parametrize("stride_time", [1.0, 2.5, 5.0])
    def test_clearance_accuracy_across_regime(self, clearance, stride_time):
        # realized swing-foot peak within 5% of the commanded clearance
        eng = GaitEngine(WalkParams(0.3, clearance, stride_time), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(eng, 2 * stride_time)
        for rec, col in zip(eng.stride_records, (3, 5)):
            i0 = int(np.searchsorted(t, rec.t0 - 1e-9))
            i1 = int(np.searchsorted(t, rec.t_end - 1e-9))
            peak = pos[i0 : i1 + 1, col].max()
            assert abs(peak - clearance) <= 0.05 * clearance

    def test_joint_space_consistency(self):
        from gaitplan.kinematics import JointAngles, forward

        eng = GaitEngine(WalkParams(0.5, 0.08, 2.0), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(eng, 4.0)
        l = GEOM.leg_length
        worst_in, worst_out = 0.0, 0.0
        for i in range(0, len(t), 37):
            fx = forward(JointAngles(*ang[i]), GEOM)
            rel = (
                pos[i, 2] - pos[i, 0], pos[i, 3] - pos[i, 1],
                pos[i, 4] - pos[i, 0], pos[i, 5] - pos[i, 1],
            )
            err = max(abs(a - b) for a, b in zip(fx, rel))
            r_r = math.hypot(rel[0], rel[1])
            r_l = math.hypot(rel[2], rel[3])
            excess = max(r_r - l, r_l - l)
            if excess <= 0.0:
                worst_in = max(worst_in, err)
            else:
                worst_out = max(worst_out, err)
        # exact where reachable; bounded by the reach excess where clamped
        assert worst_in <= 1e-9
        assert worst_out <= 2e-3


class TestUpdateParams:
    def test_identical_params_noop(self):
        params = WalkParams(0.5, 0.08, 2.0)
        eng_a = GaitEngine(params, GEOM, dt=1e-3)
        eng_b = GaitEngine(params, GEOM, dt=1e-3)
        _, pos_a, _, _, _ = run_engine(eng_a, 2.0)
        _, pos_b, _, _, _ = run_engine(
            eng_b, 2.0, events=[(0.7, WalkParams(0.5, 0.08, 2.0))]
        )
        assert np.array_equal(pos_a, pos_b)

    def test_shortened_stride_rejected_when_past(self):
        eng = GaitEngine(WalkParams(0.5, 0.08, 2.0), GEOM, dt=1e-3)
        for i in range(1500):
            eng.tick(i * 1e-3)
        res = eng.update_params(1.5, WalkParams(0.5, 0.08, 1.2))
        assert res.status == "rejected"
        assert eng.params.stride_time == 2.0
        assert eng.stride_end == 2.0

    def test_update_in_snap_window_deferred(self):
        eng = GaitEngine(WalkParams(0.5, 0.08, 2.0), GEOM, dt=1e-3)
        for i in range(2000):
            eng.tick(i * 1e-3)
        res = eng.update_params(1.9995, WalkParams(0.5, 0.08, 3.0))
        assert res.status == "deferred"
        eng.tick(2.0)
        assert eng.params.stride_time == 3.0
        assert eng.stride_end == 5.0

    def test_infeasible_rejected(self):
        eng = GaitEngine(WalkParams(0.5, 0.08, 2.0), GEOM, dt=1e-3)
        res = eng.update_params(0.5, WalkParams(3.9, 0.08, 2.0))
        assert res.status == "rejected"
        assert eng.params.step_length == 0.5

    def test_midstride_step_change_stays_smooth(self):
        eng = GaitEngine(WalkParams(0.4, 0.08, 2.0), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(
            eng, 4.0, events=[(0.9, WalkParams(0.6, 0.08, 2.0))]
        )
        jumps = np.abs(np.diff(acc, axis=0)).max(axis=0)
        for j, name in enumerate(CHANNEL_NAMES):
            assert jumps[j] <= eng.max_jerk[name] * 1e-3 * 1.01 + 1e-15
        # swing foot retargeted to the longer step
        assert eng.stride_records[0].swing_end_x == pytest.approx(0.3, abs=1e-3)

    def test_stride_time_change_moves_end(self):
        eng = GaitEngine(WalkParams(0.4, 0.08, 2.0), GEOM, dt=1e-3)
        for i in range(500):
            eng.tick(i * 1e-3)
        res = eng.update_params(0.5, WalkParams(0.4, 0.08, 3.0))
        assert res.status == "applied"
        assert eng.stride_end == pytest.approx(3.0)
        for bc in (eng.channels[n].boundary for n in CHANNEL_NAMES):
            assert bc.tf == pytest.approx(3.0)


class TestCheckConstraints:
    def test_detects_injected_acceleration_jump(self):
        eng = GaitEngine(WalkParams(0.4, 0.08, 2.0), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(eng, 2.0)
        acc_bad = acc.copy()
        acc_bad[700, 2] += 0.5
        rep = check_constraints(
            t, pos, acc_bad, ang, eng.stride_records, GEOM, eng.max_jerk, 1e-3
        )
        assert not rep.passed
        assert any("x_ra" in v for v in rep.violations)

    def test_clean_run_passes(self):
        eng = GaitEngine(WalkParams(0.4, 0.08, 2.0), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(eng, 2.0)
        rep = check_constraints(
            t, pos, acc, ang, eng.stride_records, GEOM, eng.max_jerk, 1e-3
        )
        assert rep.passed

    def test_stationary_all_zero(self):
        eng = GaitEngine(WalkParams(0.0, 0.0, 1.0), GEOM, dt=1e-3)
        t, pos, vel, acc, ang = run_engine(eng, 2.0)
        rep = check_constraints(
            t, pos, acc, ang, eng.stride_records, GEOM, eng.max_jerk, 1e-3
        )
        assert rep.passed
        assert all(v == 0.0 for v in rep.acc_jump.values())


class TestChannelSet:
    def test_engine_channels_validate(self):
        eng = GaitEngine(WalkParams(0.4, 0.08, 2.0), GEOM, dt=1e-3)
        eng.channels.validate()
        assert isinstance(eng.channels["x_h"].boundary, XBoundary)
        assert isinstance(eng.channels["y_ra"].boundary, YBoundary)
        assert [name for name, _ in eng.channels.items()] == list(CHANNEL_NAMES)

    def test_mispaired_boundary_rejected(self):
        eng = GaitEngine(WalkParams(0.4, 0.08, 2.0), GEOM, dt=1e-3)
        eng.channels.x_h.boundary = eng.channels.y_h.boundary
        with pytest.raises(TypeError):
            eng.channels.validate()


class TestWalkParams:
    def test_invariants(self):
        with pytest.raises(ValueError):
            WalkParams(-0.1, 0.1, 2.0)
        with pytest.raises(ValueError):
            WalkParams(0.5, -0.1, 2.0)
        with pytest.raises(ValueError):
            WalkParams(0.5, 0.1, 0.0)

    def test_geometry_validation(self):
        WalkParams(0.6, 0.1, 2.0).validate_geometry(GEOM)
        with pytest.raises(InfeasibleGeometryError):
            WalkParams(3.3, 0.1, 2.0).validate_geometry(GEOM)
        with pytest.raises(InfeasibleGeometryError):
            WalkParams(0.6, 0.85, 2.0).validate_geometry(GEOM)
