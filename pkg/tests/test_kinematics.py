"""Forward/inverse kinematics tests: spec poses, roundtrip grid, branch."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from gaitplan.kinematics import (
    JointAngles,
    RobotGeometry,
    SagittalPose,
    UnreachableTargetError,
    clamp_acos_arg,
    forward,
    hip_relative,
    inverse,
)

GEOM = RobotGeometry(0.4, 0.4)


class TestHipRelative:
    def test_zero_hip_offset(self):
        pose = SagittalPose(hip=(0, 0), ankle_r=(0.3, -0.7), ankle_l=(-0.1, -0.7))
        assert hip_relative(pose) == (0.3, -0.7, -0.1, -0.7)

    def test_translation(self):
        pose = SagittalPose(hip=(1, 1), ankle_r=(1, 0.2), ankle_l=(0.5, 0.0))
        xr, yr, xl, yl = hip_relative(pose)
        assert (xr, yr) == (0.0, -0.8)
        assert (xl, yl) == (-0.5, -1.0)

    def test_standing(self):
        pose = SagittalPose(hip=(0, 0.8), ankle_r=(0, 0), ankle_l=(0, 0))
        assert hip_relative(pose) == (0.0, -0.8, 0.0, -0.8)


class TestForward:
    def test_straight_legs_hang_down(self):
        assert forward(JointAngles(0, 0, 0, 0), GEOM) == (0.0, -0.8, 0.0, -0.8)

    def test_leg_horizontal(self):
        xr, yr, _, _ = forward(JointAngles(math.pi / 2, 0, 0, 0), GEOM)
        assert xr == pytest.approx(0.8, abs=1e-15)
        assert yr == pytest.approx(0.0, abs=1e-15)

    def test_shin_vertical(self):
        xr, yr, _, _ = forward(JointAngles(math.pi / 2, -math.pi / 2, 0, 0), GEOM)
        assert xr == pytest.approx(0.4, abs=1e-15)
        assert yr == pytest.approx(-0.4, abs=1e-15)


class TestInverse:
    def test_straight_standing(self):
        ang = inverse((0.0, -0.8, 0.0, -0.8), GEOM)
        assert ang.hip_r == pytest.approx(0.0, abs=1e-9)
        assert ang.knee_r == pytest.approx(0.0, abs=1e-7)

    def test_horizontal_reach(self):
        ang = inverse((0.8, 0.0, 0.0, -0.8), GEOM)
        assert ang.hip_r == pytest.approx(math.pi / 2, abs=1e-7)
        assert ang.knee_r == pytest.approx(0.0, abs=1e-7)

    def test_bent_pose_roundtrip(self):
        target = (0.4, -0.4)
        ang = inverse((*target, 0.0, -0.79), GEOM)
        assert ang.hip_r == pytest.approx(math.pi / 2, abs=1e-12)
        assert ang.knee_r == pytest.approx(-math.pi / 2, abs=1e-12)
        xr, yr, _, _ = forward(ang, GEOM)
        assert xr == pytest.approx(target[0], abs=1e-12)
        assert yr == pytest.approx(target[1], abs=1e-12)

    def test_unreachable_raises(self):
        with pytest.raises(UnreachableTargetError):
            inverse((0.9, -0.5, 0.0, -0.8), GEOM)

    def test_degenerate_raises(self):
        with pytest.raises(UnreachableTargetError):
            inverse((0.0, 0.0, 0.0, -0.8), GEOM)

    def test_reach_tolerance_projects_to_straight_leg(self):
        # barely outside full extension: projected to the boundary
        ang = inverse((0.0, -0.8004, 0.0, -0.8), GEOM)
        assert ang.knee_r == pytest.approx(0.0, abs=1e-7)
        xr, yr, _, _ = forward(ang, GEOM)
        assert math.hypot(xr, yr) == pytest.approx(0.8, abs=1e-12)

    def test_roundtrip_grid(self):
        # 50 x 50 workspace grid, forward(inverse(p)) == p within 1e-9
        worst = 0.0
        count = 0
        for x in np.linspace(-0.75, 0.75, 50):
            for y in np.linspace(-0.795, -0.005, 50):
                r = math.hypot(x, y)
                if not 1e-6 < r < GEOM.leg_length - 1e-6:
                    continue
                ang = inverse((x, y, x, y), GEOM)
                assert ang.knee_r <= 0.0
                assert ang.knee_l <= 0.0
                fx, fy, _, _ = forward(ang, GEOM)
                worst = max(worst, abs(fx - x), abs(fy - y))
                count += 1
        assert count > 1000
        assert worst <= 1e-9

    @given(
        phi=st.floats(min_value=-1.4, max_value=1.4),
        r=st.floats(min_value=0.05, max_value=0.799),
    )
    def test_roundtrip_property(self, phi, r):
        x = r * math.sin(phi)
        y = -r * math.cos(phi)
        ang = inverse((x, y, 0.0, -0.6), GEOM)
        fx, fy, _, _ = forward(ang, GEOM)
        assert abs(fx - x) <= 1e-9
        assert abs(fy - y) <= 1e-9
        assert ang.knee_r <= 0.0

    def test_mirror_symmetry(self):
        # mirroring the target x negates the leg direction; the knee
        # depends only on the radius (equal links: alpha == -knee/2)
        for (x, y) in [(0.2, -0.6), (0.35, -0.4), (0.05, -0.75)]:
            a = inverse((x, y, x, y), GEOM)
            m = inverse((-x, y, -x, y), GEOM)
            assert m.knee_r == pytest.approx(a.knee_r, abs=1e-12)
            alpha = -a.knee_r / 2.0
            assert m.hip_r - alpha == pytest.approx(-(a.hip_r - alpha), abs=1e-9)
            fx, _, _, _ = forward(m, GEOM)
            assert fx == pytest.approx(-x, abs=1e-9)


class TestClampAcos:
    def test_rounding_is_clamped(self):
        assert clamp_acos_arg(1.0 + 1e-12) == 1.0
        assert clamp_acos_arg(-1.0 - 1e-12) == -1.0

    def test_interior_passthrough(self):
        assert clamp_acos_arg(-0.5) == -0.5

    def test_beyond_guard_band_errors(self):
        with pytest.raises(UnreachableTargetError):
            clamp_acos_arg(1.1)
        with pytest.raises(UnreachableTargetError):
            clamp_acos_arg(-1.0 - 1e-6)


class TestGeometry:
    def test_rejects_nonpositive_links(self):
        with pytest.raises(ValueError):
            RobotGeometry(0.0, 0.4)

    def test_leg_length(self):
        assert RobotGeometry(0.45, 0.35).leg_length == 0.8
