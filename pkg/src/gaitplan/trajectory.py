"""Closed-loop minimum-jerk trajectory planners.

One planner channel is a triple integrator (position, velocity,
acceleration) driven by a jerk command.  Two feedback laws steer a channel
to endpoint boundary conditions while minimizing the integral of squared
jerk:

- the x-law targets an arbitrary final triple (xf, vxf, axf) at time tf;
- the y-law targets (yf, 0, 0) and carries an extra linear-cost gain k
  that shapes a peak on the way; `kstar` gives the gain for a commanded
  peak height, `calibrate_peak_gain` refines it so the realized maximum
  matches the command.

State propagation is the exact zero-order-hold update, so the only
integration error is holding the jerk constant over one control period.
Boundaries may be replaced at any control step (mid-horizon retargeting);
position, velocity and acceleration stay continuous because only the jerk
jumps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from . import backend as _k

#: Default control period in seconds.  Small enough that zero-order-hold
#: error is far below every tolerance used in the tests, large enough to be
#: a plausible real-time rate.
DT_DEFAULT = 1e-3

#: 5 * 8!, the constant of the peak-gain formula and the integral identity.
PEAK_GAIN_SCALE = 201600.0


class HorizonExpiredError(ValueError):
    """Feedback law evaluated with no remaining horizon (caller must snap)."""


class DegenerateGeometryError(ValueError):
    """Peak-gain geometry with zero denominator but nonzero numerator."""


class RejectedChangeError(ValueError):
    """Boundary replacement whose final time is already unreachable."""


@dataclass
class State3:
    """Position/velocity/acceleration of one trajectory channel (SI units)."""

    pos: float
    vel: float
    acc: float

    def __post_init__(self):
        if not (math.isfinite(self.pos) and math.isfinite(self.vel) and math.isfinite(self.acc)):
            raise ValueError(f"non-finite channel state {(self.pos, self.vel, self.acc)}")

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.pos, self.vel, self.acc)


@dataclass
class XBoundary:
    """Endpoint conditions of an x-channel: reach (xf, vxf, axf) at time tf."""

    tf: float
    xf: float
    vxf: float = 0.0
    axf: float = 0.0


@dataclass
class YBoundary:
    """Endpoint conditions of a y-channel.

    The trajectory starts near y0 at t0, peaks at yp, and ends at rest at
    (yf, 0, 0) at tf.  k is the peak-shaping gain actually applied by the
    feedback law; t0/y0/yp are kept for bookkeeping and gain refreshes.
    """

    t0: float
    tf: float
    y0: float
    yp: float
    yf: float
    k: float = 0.0

    def __post_init__(self):
        if not self.tf > self.t0:
            raise ValueError(f"tf={self.tf} must exceed t0={self.t0}")
        if self.yp < max(self.y0, self.yf) - 1e-9:
            raise ValueError(
                f"peak yp={self.yp} below endpoints ({self.y0}, {self.yf})"
            )


Boundary = Union[XBoundary, YBoundary]


@dataclass
class PlannerChannel:
    """One closed-loop planner instance: current state, active boundary, last jerk."""

    state: State3
    boundary: Boundary
    last_jerk: float = 0.0


def ux_feedback(state: State3, bc: XBoundary, t: float, eps_snap: float = DT_DEFAULT) -> float:
    """Jerk command steering `state` to `bc` by bc.tf.

    Raises HorizonExpiredError when t is within eps_snap of bc.tf; the
    caller must snap to the boundary instead of commanding jerk.
    """
    rem = bc.tf - t
    if rem <= eps_snap:
        raise HorizonExpiredError(f"t={t} within eps_snap={eps_snap} of tf={bc.tf}")
    return _k.ux_feedback(state.pos, state.vel, state.acc, bc.xf, bc.vxf, bc.axf, rem)


def uy_feedback(
    state: State3, yf: float, k: float, tf: float, t: float, eps_snap: float = DT_DEFAULT
) -> float:
    """Jerk command steering `state` to (yf, 0, 0) by tf with peak gain k."""
    rem = tf - t
    if rem <= eps_snap:
        raise HorizonExpiredError(f"t={t} within eps_snap={eps_snap} of tf={tf}")
    return _k.uy_feedback(state.pos, state.vel, state.acc, yf, k, rem)


def kstar(t0: float, tf: float, y0: float, yp: float, yf: float) -> float:
    """Peak-shaping gain for a commanded maximum yp over [t0, tf].

    Derived from the exact integral identity of the y-law combined with a
    trapezoidal area estimate, so the realized peak only approximates yp
    (symmetric peaks overshoot by exactly 35/32; see
    `calibrate_peak_gain` for the refined gain).  Returns 0 for the flat
    case yp == y0 == yf.
    """
    ga = yp - y0
    gb = yp - yf
    num = ga * gb
    den = ga + gb
    if den == 0.0:
        if num == 0.0:
            return 0.0
        raise DegenerateGeometryError(
            f"zero gap sum with nonzero gap product (y0={y0}, yp={yp}, yf={yf})"
        )
    T = tf - t0
    if not T > 0.0:
        raise ValueError(f"tf={tf} must exceed t0={t0}")
    return -PEAK_GAIN_SCALE / (T ** 6) * num / den


def propagate(state: State3, u: float, dt: float) -> State3:
    """Exact zero-order-hold update of the triple integrator for one step."""
    if not dt > 0.0:
        raise ValueError(f"dt={dt} must be positive")
    if not math.isfinite(u):
        raise ValueError(f"non-finite jerk {u}")
    p, v, a = _k.propagate(state.pos, state.vel, state.acc, u, dt)
    return State3(p, v, a)


def plan_step_x(channel: PlannerChannel, t: float, dt: float, eps_snap: float | None = None) -> State3:
    """Advance an x-channel one control period; returns the state at t+dt.

    Inside the horizon this evaluates the feedback law (sampled at the
    period midpoint) and propagates; once the remaining horizon is at most
    eps_snap the state is set exactly to the boundary triple and held.
    """
    bc = channel.boundary
    if eps_snap is None:
        eps_snap = dt
    p, v, a, u, _snapped = _k.step_x(
        channel.state.pos,
        channel.state.vel,
        channel.state.acc,
        bc.xf,
        bc.vxf,
        bc.axf,
        bc.tf,
        t,
        dt,
        eps_snap,
    )
    channel.state = State3(p, v, a)
    channel.last_jerk = u
    return channel.state


def plan_step_y(channel: PlannerChannel, t: float, dt: float, eps_snap: float | None = None) -> State3:
    """Advance a y-channel one control period; snap target is (yf, 0, 0)."""
    bc = channel.boundary
    if eps_snap is None:
        eps_snap = dt
    p, v, a, u, _snapped = _k.step_y(
        channel.state.pos,
        channel.state.vel,
        channel.state.acc,
        bc.yf,
        bc.k,
        bc.tf,
        t,
        dt,
        eps_snap,
    )
    channel.state = State3(p, v, a)
    channel.last_jerk = u
    return channel.state


def retarget_x(channel: PlannerChannel, bc: XBoundary, t: float, eps_snap: float = DT_DEFAULT) -> None:
    """Replace the boundary of an x-channel mid-horizon (state untouched).

    Raises RejectedChangeError if the new final time is in the past or
    within the snap window; the previous boundary stays active.
    """
    if bc.tf - t <= eps_snap:
        raise RejectedChangeError(f"new tf={bc.tf} unreachable from t={t}")
    channel.boundary = bc


def retarget_y(
    channel: PlannerChannel,
    t: float,
    tf: float,
    yp: float,
    yf: float,
    k: float | None = None,
    eps_snap: float = DT_DEFAULT,
) -> YBoundary:
    """Replace the boundary of a y-channel mid-horizon.

    Re-anchors the gain geometry at the current state: t0 becomes t and y0
    the current position, and k is recomputed with `kstar` unless an
    explicit gain is supplied.  A commanded peak already exceeded by the
    current position is clamped up to it.  Returns the new boundary.
    """
    if tf - t <= eps_snap:
        raise RejectedChangeError(f"new tf={tf} unreachable from t={t}")
    y_now = channel.state.pos
    yp_eff = max(yp, y_now, yf)
    if k is None:
        k = kstar(t, tf, y_now, yp_eff, yf)
    channel.boundary = YBoundary(t0=t, tf=tf, y0=y_now, yp=yp_eff, yf=yf, k=k)
    return channel.boundary


# ---------------------------------------------------------------------------
# Peak-gain calibration
# ---------------------------------------------------------------------------

def _poly_max(coeffs: np.ndarray, T: float) -> float:
    """Maximum of a polynomial (ascending coefficients in tau) on [0, T]."""
    c = np.asarray(coeffs, dtype=float)
    dc = c[1:] * np.arange(1, len(c))
    dc_trim = np.trim_zeros(dc, "b")
    candidates = [0.0, T]
    if len(dc_trim) > 1:
        for r in np.roots(dc_trim[::-1]):
            if abs(r.imag) < 1e-9 * (1.0 + abs(r.real)) and 0.0 < r.real < T:
                candidates.append(float(r.real))
    tau = np.array(candidates)
    vals = np.polyval(c[::-1], tau)
    return float(vals.max())


def _rest_target_poly(T: float, y0: float, v0: float, a0: float, yf: float) -> np.ndarray:
    """Position polynomial of the zero-gain y-law from (y0, v0, a0) to (yf, 0, 0)."""
    a = 360.0 * (y0 - yf) / T**5 + 180.0 * v0 / T**4 + 30.0 * a0 / T**3
    b = 360.0 * (y0 - yf) / T**4 + 192.0 * v0 / T**3 + 36.0 * a0 / T**2
    c = 60.0 * (y0 - yf) / T**3 + 36.0 * v0 / T**2 + 9.0 * a0 / T
    # jerk = b*tau - a*tau^2 - c, integrated three times:
    return np.array([y0, v0, a0 / 2.0, -c / 6.0, b / 24.0, -a / 60.0])


def _gain_response_poly(T: float) -> np.ndarray:
    """Unit-gain position response -tau^3 (T-tau)^3 / 1440 (zero boundaries)."""
    return np.array(
        [0.0, 0.0, 0.0, -T**3 / 1440.0, 3.0 * T**2 / 1440.0, -3.0 * T / 1440.0, 1.0 / 1440.0]
    )


def calibrate_peak_gain(
    T: float,
    y0: float,
    v0: float,
    a0: float,
    yp: float,
    yf: float,
    tol: float = 1e-9,
) -> float:
    """Gain k <= 0 whose closed-form trajectory peaks at yp (within tol).

    The trajectory is linear in k, so the maximum of (zero-gain trajectory
    + k * unit-gain response) is bisected on k, seeded with the `kstar`
    estimate.  Returns 0 when the zero-gain trajectory already reaches yp
    (flat commands, descending starts, peaks already exceeded): the gain is
    never used to push the trajectory down.
    """
    if not T > 0.0:
        raise ValueError(f"horizon T={T} must be positive")
    base = _rest_target_poly(T, y0, v0, a0, yf)
    g = np.zeros(7)
    g[: base.size] = base
    gain = _gain_response_poly(T)

    def peak(k: float) -> float:
        return _poly_max(g + k * gain, T)

    if peak(0.0) >= yp - tol:
        return 0.0
    # Reaching here implies yp strictly exceeds both endpoints, so the
    # kstar estimate is well-defined (and known to overshoot the peak a
    # little, which makes it a good lower bracket).
    k_lo = kstar(0.0, T, y0, yp, yf)
    if k_lo == 0.0:
        k_lo = -1.0
    for _ in range(60):
        if peak(k_lo) >= yp:
            break
        k_lo *= 2.0
    else:
        raise DegenerateGeometryError(f"cannot bracket gain for peak yp={yp}")
    k_hi = 0.0
    for _ in range(200):
        k_mid = 0.5 * (k_lo + k_hi)
        p = peak(k_mid)
        if abs(p - yp) <= tol:
            return k_mid
        if p < yp:
            k_hi = k_mid
        else:
            k_lo = k_mid
    return 0.5 * (k_lo + k_hi)


# ---------------------------------------------------------------------------
# Batched closed-loop runs (trace-recording loops over the kernels)
# ---------------------------------------------------------------------------

def run_channel_x(
    state: State3,
    bc: XBoundary,
    t0: float,
    t_end: float,
    dt: float = DT_DEFAULT,
    eps_snap: float | None = None,
):
    """Closed-loop x-run from t0 to t_end; returns (t, pos, vel, acc, u) arrays.

    The sample arrays have n+1 entries for n = round((t_end - t0)/dt); u
    has n (one held jerk per interval, 0.0 on snapped intervals).
    """
    if eps_snap is None:
        eps_snap = dt
    n = int(round((t_end - t0) / dt))
    pos = np.empty(n + 1)
    vel = np.empty(n + 1)
    acc = np.empty(n + 1)
    u = np.empty(n)
    _k.run_x(
        state.pos, state.vel, state.acc,
        bc.xf, bc.vxf, bc.axf, bc.tf,
        t0, dt, eps_snap, n, pos, vel, acc, u,
    )
    t = t0 + dt * np.arange(n + 1)
    return t, pos, vel, acc, u


def run_channel_y(
    state: State3,
    bc: YBoundary,
    t0: float,
    t_end: float,
    dt: float = DT_DEFAULT,
    eps_snap: float | None = None,
):
    """Closed-loop y-run from t0 to t_end; returns (t, pos, vel, acc, u) arrays."""
    if eps_snap is None:
        eps_snap = dt
    n = int(round((t_end - t0) / dt))
    pos = np.empty(n + 1)
    vel = np.empty(n + 1)
    acc = np.empty(n + 1)
    u = np.empty(n)
    _k.run_y(
        state.pos, state.vel, state.acc,
        bc.yf, bc.k, bc.tf,
        t0, dt, eps_snap, n, pos, vel, acc, u,
    )
    t = t0 + dt * np.arange(n + 1)
    return t, pos, vel, acc, u
