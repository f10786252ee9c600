"""Planar sagittal-plane kinematics of the two-link-per-leg exoskeleton.

Angle conventions: hip angle is measured from straight down (positive
swings the thigh forward, toward +X), the knee angle is the shin's
rotation relative to the thigh and is non-positive on the human-like
flexion branch returned by `inverse`.  World Y is up, ankles hang below
the hip, so hip-relative ankle Y coordinates are negative.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

#: Guard band for arccos arguments: anything within 1e-9 of [-1, 1] is
#: floating-point rounding and gets clamped; larger violations indicate a
#: genuinely unreachable target.
ACOS_GUARD = 1e-9

#: Relative slack on leg extension accepted by `inverse`.  The planned hip
#: path rides slightly outside the straight-leg circle between stride
#: boundaries (worst case a few tenths of a percent), so targets whose
#: radius exceeds full extension by up to this fraction are projected back
#: onto the boundary instead of rejected.
REACH_TOL = 1e-2


class UnreachableTargetError(ValueError):
    """Ankle target outside the leg workspace beyond the clamp tolerance."""


@dataclass
class RobotGeometry:
    """Thigh and shin lengths in meters."""

    l_thigh: float = 0.4
    l_shin: float = 0.4

    def __post_init__(self):
        if self.l_thigh <= 0.0 or self.l_shin <= 0.0:
            raise ValueError(f"link lengths must be positive, got {self}")

    @property
    def leg_length(self) -> float:
        """Full extension: thigh plus shin."""
        return self.l_thigh + self.l_shin


@dataclass
class JointAngles:
    """Hip and knee angles (radians) for both legs; knees are <= 0."""

    hip_r: float
    knee_r: float
    hip_l: float
    knee_l: float

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.hip_r, self.knee_r, self.hip_l, self.knee_l)


@dataclass
class SagittalPose:
    """World positions (meters) of the hip and both ankles in the sagittal plane."""

    hip: tuple[float, float]
    ankle_r: tuple[float, float]
    ankle_l: tuple[float, float]


def hip_relative(pose: SagittalPose) -> tuple[float, float, float, float]:
    """Ankle positions relative to the hip: (X_R, Y_R, X_L, Y_L)."""
    xh, yh = pose.hip
    return (
        pose.ankle_r[0] - xh,
        pose.ankle_r[1] - yh,
        pose.ankle_l[0] - xh,
        pose.ankle_l[1] - yh,
    )


def _leg_forward(hip: float, knee: float, geom: RobotGeometry) -> tuple[float, float]:
    x = geom.l_thigh * math.sin(hip) + geom.l_shin * math.sin(hip + knee)
    y = -geom.l_thigh * math.cos(hip) - geom.l_shin * math.cos(hip + knee)
    return x, y


def forward(angles: JointAngles, geom: RobotGeometry) -> tuple[float, float, float, float]:
    """Hip-relative ankle positions (X_R, Y_R, X_L, Y_L) from joint angles."""
    xr, yr = _leg_forward(angles.hip_r, angles.knee_r, geom)
    xl, yl = _leg_forward(angles.hip_l, angles.knee_l, geom)
    return (xr, yr, xl, yl)


def clamp_acos_arg(v: float, guard: float = ACOS_GUARD) -> float:
    """Clamp an arccos argument into [-1, 1].

    Only rounding-level violations (within `guard`) are absorbed; anything
    larger is a genuinely unreachable target, not noise.
    """
    if v > 1.0:
        if v > 1.0 + guard:
            raise UnreachableTargetError(f"arccos argument {v} beyond guard band")
        return 1.0
    if v < -1.0:
        if v < -1.0 - guard:
            raise UnreachableTargetError(f"arccos argument {v} beyond guard band")
        return -1.0
    return v


def _leg_inverse(x: float, y: float, geom: RobotGeometry, reach_tol: float) -> tuple[float, float]:
    lt, ls = geom.l_thigh, geom.l_shin
    r = math.hypot(x, y)
    if r == 0.0:
        raise UnreachableTargetError("ankle coincides with hip (degenerate direction)")
    r_max = lt + ls
    r_min = abs(lt - ls)
    if r > r_max:
        if r > r_max * (1.0 + reach_tol):
            raise UnreachableTargetError(
                f"target radius {r:.6f} exceeds leg length {r_max:.6f}"
            )
        # barely out of reach: point the straight leg at the target
        scale = r_max / r
        x *= scale
        y *= scale
        r = r_max
    elif r < r_min:
        if r < r_min * (1.0 - reach_tol) - 1e-12:
            raise UnreachableTargetError(
                f"target radius {r:.6f} inside inner workspace bound {r_min:.6f}"
            )
        scale = r_min / r
        x *= scale
        y *= scale
        r = r_min
    r2 = r * r
    alpha = math.acos(clamp_acos_arg((r2 + lt * lt - ls * ls) / (2.0 * lt * r)))
    beta = math.acos(clamp_acos_arg((r2 + ls * ls - lt * lt) / (2.0 * ls * r)))
    # atan2(x, -y) is the ankle direction from straight down; the thigh
    # leads it by alpha so the knee can flex backward (knee <= 0).
    hip = math.atan2(x, -y) + alpha
    knee = -(alpha + beta)
    return hip, knee


def inverse(
    rel: tuple[float, float, float, float],
    geom: RobotGeometry,
    reach_tol: float = REACH_TOL,
) -> JointAngles:
    """Joint angles for hip-relative ankle targets (X_R, Y_R, X_L, Y_L).

    Targets whose radius falls outside [|l_thigh - l_shin|, l_thigh +
    l_shin] by at most `reach_tol` (relative) are projected onto the
    workspace boundary; beyond that an UnreachableTargetError is raised.
    The returned angles always satisfy forward(inverse(p)) == p for
    in-workspace p, with knees on the flexion branch (<= 0).
    """
    xr, yr, xl, yl = rel
    hip_r, knee_r = _leg_inverse(xr, yr, geom, reach_tol)
    hip_l, knee_l = _leg_inverse(xl, yl, geom, reach_tol)
    return JointAngles(hip_r=hip_r, knee_r=knee_r, hip_l=hip_l, knee_l=knee_l)
