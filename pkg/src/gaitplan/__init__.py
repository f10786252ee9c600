"""Minimum-jerk gait planning for a planar two-link-per-leg exoskeleton.

The package provides:

- ``trajectory``: closed-loop minimum-jerk planners for single trajectory
  channels (position/velocity/acceleration driven by a jerk feedback law),
  including the peak-shaping gain used by vertical channels.
- ``kinematics``: planar forward/inverse kinematics of the two-link legs.
- ``gait``: the stride-level walking pattern generator that turns walking
  parameters (step length, clearance, stride time) into six channel
  boundary conditions and joint angles.
- ``oracles``: independent verification tools (open-loop polynomial
  solutions, a discretized optimal-control QP, bisection on the peak gain).
- ``simulate`` / ``cli``: scripted runs, CSV output, and run reports.

Hot per-step kernels live in a compiled extension (``gaitplan._kernel``)
with a pure-Python fallback selected at import; see ``gaitplan.backend``.
"""

from .backend import BACKEND
from .trajectory import (
    State3,
    XBoundary,
    YBoundary,
    PlannerChannel,
    ux_feedback,
    uy_feedback,
    kstar,
    propagate,
    plan_step_x,
    plan_step_y,
)
from .kinematics import RobotGeometry, JointAngles, SagittalPose, forward, inverse, hip_relative
from .gait import WalkParams, StrideState, GaitEngine

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "State3",
    "XBoundary",
    "YBoundary",
    "PlannerChannel",
    "ux_feedback",
    "uy_feedback",
    "kstar",
    "propagate",
    "plan_step_x",
    "plan_step_y",
    "RobotGeometry",
    "JointAngles",
    "SagittalPose",
    "forward",
    "inverse",
    "hip_relative",
    "WalkParams",
    "StrideState",
    "GaitEngine",
    "__version__",
]
