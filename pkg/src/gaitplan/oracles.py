"""Independent verification oracles for the closed-loop planners.

Everything here recomputes planner behavior by a different route than the
feedback loop:

- `vx_open_loop` / `vy_open_loop`: the open-loop jerk polynomials that
  solve the same minimum-jerk problems in closed form, with
  `integrate_thrice` turning them into exact position polynomials;
- `qp_minjerk`: a brute-force equality-constrained quadratic program on a
  uniform jerk grid (piecewise-constant jerk matched to the planners'
  zero-order hold), pinning optimality from both sides;
- `bisect_k_for_peak`: numerical ground truth for the approximate
  peak-gain formula, by bisecting the gain against simulated peaks;
- `integral_identity_gap`: checks the exact linear relation between the
  gain and the trajectory's time integral.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .trajectory import DT_DEFAULT, PEAK_GAIN_SCALE, State3, YBoundary, run_channel_y


class BracketFailureError(RuntimeError):
    """Gain bracket expansion failed to straddle the requested peak."""


class SingularSystemError(RuntimeError):
    """Discretized endpoint constraints are inconsistent or rank-deficient."""


@dataclass
class PolyTraj:
    """Polynomial trajectory segment in local time tau = t - t0.

    Coefficients are ascending powers of tau; evaluation and
    differentiation are exact polynomial arithmetic (degree <= 6 in use).
    """

    coeffs: np.ndarray
    t0: float
    tf: float

    def __post_init__(self):
        self.coeffs = np.atleast_1d(np.asarray(self.coeffs, dtype=float))

    def __call__(self, t):
        return np.polyval(self.coeffs[::-1], np.asarray(t) - self.t0)

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def derivative(self) -> "PolyTraj":
        c = self.coeffs
        if len(c) == 1:
            return PolyTraj(np.zeros(1), self.t0, self.tf)
        return PolyTraj(c[1:] * np.arange(1, len(c)), self.t0, self.tf)

    def antiderivative(self, value_at_t0: float = 0.0) -> "PolyTraj":
        c = self.coeffs
        out = np.empty(len(c) + 1)
        out[0] = value_at_t0
        out[1:] = c / np.arange(1, len(c) + 1)
        return PolyTraj(out, self.t0, self.tf)

    def definite_integral(self) -> float:
        """Exact integral over [t0, tf]."""
        T = self.tf - self.t0
        powers = T ** np.arange(1, len(self.coeffs) + 1)
        return float(np.sum(self.coeffs * powers / np.arange(1, len(self.coeffs) + 1)))

    def squared_integral(self) -> float:
        """Exact integral of the square over [t0, tf]."""
        sq = np.convolve(self.coeffs, self.coeffs)
        return PolyTraj(sq, self.t0, self.tf).definite_integral()


def _x_coeffs(x0: State3, xf: State3, T: float) -> tuple[float, float, float]:
    """(a, b, c) of the open-loop x jerk polynomial a*tau^2 - b*tau + c."""
    d = xf.pos - x0.pos
    a = 360.0 * d / T**5 - 180.0 * (xf.vel + x0.vel) / T**4 + 30.0 * (xf.acc - x0.acc) / T**3
    b = 360.0 * d / T**4 - 24.0 * (7.0 * xf.vel + 8.0 * x0.vel) / T**3 + 12.0 * (2.0 * xf.acc - 3.0 * x0.acc) / T**2
    c = 60.0 * d / T**3 - 12.0 * (2.0 * xf.vel + 3.0 * x0.vel) / T**2 + 3.0 * (xf.acc - 3.0 * x0.acc) / T
    return a, b, c


def _y_coeffs(y0: State3, yf: float, k: float, T: float) -> tuple[float, float, float]:
    """(a, b, c) of the open-loop y jerk polynomial k/12*tau^3 - a*tau^2 + b*tau - c."""
    d = y0.pos - yf
    a = 360.0 * d / T**5 + 180.0 * y0.vel / T**4 + 30.0 * y0.acc / T**3 + k * T / 8.0
    b = 360.0 * d / T**4 + 192.0 * y0.vel / T**3 + 36.0 * y0.acc / T**2 + k * T**2 / 20.0
    c = 60.0 * d / T**3 + 36.0 * y0.vel / T**2 + 9.0 * y0.acc / T + k * T**3 / 240.0
    return a, b, c


def vx_open_loop(x0: State3, xf: State3, t0: float, tf: float) -> PolyTraj:
    """Open-loop minimum-jerk command steering x0 to xf over [t0, tf]."""
    if not tf > t0:
        raise ValueError(f"tf={tf} must exceed t0={t0}")
    a, b, c = _x_coeffs(x0, xf, tf - t0)
    return PolyTraj(np.array([c, -b, a]), t0, tf)


def vy_open_loop(y0: State3, yf: float, k: float, t0: float, tf: float) -> PolyTraj:
    """Open-loop jerk steering y0 to (yf, 0, 0) over [t0, tf] with gain k."""
    if not tf > t0:
        raise ValueError(f"tf={tf} must exceed t0={t0}")
    a, b, c = _y_coeffs(y0, yf, k, tf - t0)
    return PolyTraj(np.array([-c, b, -a, k / 12.0]), t0, tf)


def integrate_thrice(jerk: PolyTraj, init: State3) -> PolyTraj:
    """Exact position polynomial of a jerk polynomial with initial conditions."""
    acc = jerk.antiderivative(init.acc)
    vel = acc.antiderivative(init.vel)
    return vel.antiderivative(init.pos)


def eval_cost(jerk_samples, dt: float, k: float = 0.0, pos_samples=None) -> float:
    """Trapezoidal quadrature of jerk^2 (+ k * position for the y-cost)."""
    u = np.asarray(jerk_samples, dtype=float)
    cost = _trapezoid(u * u, dt)
    if k != 0.0:
        if pos_samples is None:
            raise ValueError("position samples required when k != 0")
        cost += k * _trapezoid(np.asarray(pos_samples, dtype=float), dt)
    return float(cost)


def _trapezoid(v: np.ndarray, dt: float) -> float:
    if len(v) < 2:
        return 0.0
    return float(dt * (v.sum() - 0.5 * (v[0] + v[-1])))


def closed_form_cost_x(x0: State3, xf: State3, t0: float, tf: float) -> float:
    """Exact minimum cost (integral of squared jerk) for an x transfer."""
    return vx_open_loop(x0, xf, t0, tf).squared_integral()


def closed_form_cost_y(y0: State3, yf: float, k: float, t0: float, tf: float) -> float:
    """Exact minimum cost (squared jerk + k * position integral) for a y transfer."""
    jerk = vy_open_loop(y0, yf, k, t0, tf)
    pos = integrate_thrice(jerk, y0)
    return jerk.squared_integral() + k * pos.definite_integral()


# ---------------------------------------------------------------------------
# Discretized optimal-control QP
# ---------------------------------------------------------------------------

@dataclass
class DiscreteOCP:
    """Uniform-grid jerk program: n intervals over [t0, tf].

    Steers s0 to sf under exact zero-order-hold dynamics; k weights the
    linear position term of the y-cost (0 for pure x problems).
    """

    n: int
    t0: float
    tf: float
    s0: State3
    sf: State3
    k: float = 0.0

    def __post_init__(self):
        if self.n < 10:
            raise ValueError(f"grid too coarse (n={self.n} < 10)")
        if not self.tf > self.t0:
            raise ValueError(f"tf={self.tf} must exceed t0={self.t0}")


@dataclass
class QPResult:
    u: np.ndarray
    pos: np.ndarray
    cost: float


def qp_minjerk(ocp: DiscreteOCP) -> QPResult:
    """Solve the discretized minimum-jerk program by its normal equations.

    minimize  h * sum(u_i^2) + k * trapezoid(y)
    subject to the endpoint state constraint under exact ZOH dynamics.

    The position row of A^m B has the closed form h^3 ((m+1)^3 - m^3) / 6,
    so the constraint matrix and the linear-cost vector are assembled
    without matrix powers.
    """
    n = ocp.n
    h = (ocp.tf - ocp.t0) / n
    p0, v0, a0 = ocp.s0.as_tuple()

    m = np.arange(n - 1, -1, -1, dtype=float)  # steps remaining after input i
    C = np.empty((3, n))
    C[0] = h**3 * (1.0 + 3.0 * m + 3.0 * m * m) / 6.0
    C[1] = h**2 * (1.0 + 2.0 * m) / 2.0
    C[2] = h

    tN = n * h
    drift = np.array(
        [p0 + v0 * tN + 0.5 * a0 * tN * tN, v0 + a0 * tN, a0]
    )
    r = np.array(ocp.sf.as_tuple()) - drift

    # Linear-cost vector: trapezoid(y) = q0 + q . u
    mm = np.arange(n, dtype=float)
    d = h**3 * ((mm + 1.0) ** 3 - mm**3) / 6.0  # position response after m steps
    prefix = np.cumsum(d)
    M = np.arange(n - 1, -1, -1)  # last response index reaching sample n from input j
    q = h * (prefix[M] - 0.5 * d[M])
    ts = h * np.arange(n + 1)
    y_drift = p0 + v0 * ts + 0.5 * a0 * ts * ts
    q0 = _trapezoid(y_drift, h)

    G = C @ C.T
    rhs = -(2.0 * h * r + ocp.k * (C @ q))
    try:
        lam = np.linalg.solve(G, rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularSystemError(str(exc)) from exc
    u = -(ocp.k * q + C.T @ lam) / (2.0 * h)

    pos = _zoh_positions(ocp.s0, u, h)
    cost = float(h * u @ u + ocp.k * _trapezoid(pos, h))
    return QPResult(u=u, pos=pos, cost=cost)


def _zoh_positions(s0: State3, u: np.ndarray, h: float) -> np.ndarray:
    """Sample positions of the exact ZOH rollout of a jerk sequence."""
    n = len(u)
    pos = np.empty(n + 1)
    p, v, a = s0.as_tuple()
    pos[0] = p
    for i in range(n):
        ui = u[i]
        p += v * h + 0.5 * a * h * h + ui * h**3 / 6.0
        v += a * h + 0.5 * ui * h * h
        a += ui * h
        pos[i + 1] = p
    return pos


def zoh_cost(u: np.ndarray, pos: np.ndarray, h: float, k: float = 0.0) -> float:
    """The QP objective evaluated on an arbitrary ZOH jerk sequence."""
    return float(h * np.asarray(u) @ np.asarray(u) + k * _trapezoid(np.asarray(pos), h))


# ---------------------------------------------------------------------------
# Gain bisection and the integral identity
# ---------------------------------------------------------------------------

def _simulated_peak(t0, tf, y0, yp, yf, k, dt):
    bc = YBoundary(t0=t0, tf=tf, y0=y0, yp=max(yp, y0, yf), yf=yf, k=k)
    _, pos, _, _, _ = run_channel_y(State3(y0, 0.0, 0.0), bc, t0, tf, dt)
    return float(pos.max())


def bisect_k_for_peak(
    t0: float,
    tf: float,
    y0: float,
    yp: float,
    yf: float,
    dt: float = DT_DEFAULT,
    tol: float = 1e-6,
) -> float:
    """Gain whose *simulated* trajectory peaks at yp, by monotone bisection.

    The simulated peak grows strictly as the gain decreases, so the bracket
    [k_lo, 0] is expanded geometrically (factor 2, at most 60 doublings)
    until it straddles yp, then bisected to `tol` on the peak height.
    """
    if not yp > max(y0, yf):
        raise ValueError(f"peak yp={yp} must exceed both endpoints ({y0}, {yf})")
    if _simulated_peak(t0, tf, y0, yp, yf, 0.0, dt) >= yp:
        return 0.0
    k_lo = -1.0
    for _ in range(60):
        if _simulated_peak(t0, tf, y0, yp, yf, k_lo, dt) >= yp:
            break
        k_lo *= 2.0
    else:
        raise BracketFailureError(f"peak yp={yp} not reached at k={k_lo}")
    k_hi = 0.0
    while True:
        k_mid = 0.5 * (k_lo + k_hi)
        p = _simulated_peak(t0, tf, y0, yp, yf, k_mid, dt)
        if abs(p - yp) <= tol or abs(k_lo - k_hi) <= 1e-14 * max(1.0, abs(k_lo)):
            return k_mid
        if p < yp:
            k_hi = k_mid
        else:
            k_lo = k_mid


def _zoh_integral(pos, vel, acc, u, dt) -> float:
    """Exact time integral of a recorded ZOH run (piecewise-cubic position)."""
    seg = pos[:-1] + vel[:-1] * (dt / 2.0) + acc[:-1] * (dt * dt / 6.0) + u * (dt**3 / 24.0)
    return float(dt * seg.sum())


def integral_identity_gap(bc: YBoundary, dt: float = DT_DEFAULT) -> tuple[float, float]:
    """(measured, predicted) integral gap between the gained and zero-gain runs.

    measured: time integral of the closed-loop run at k = bc.k minus the
    run at k = 0 (exact quadrature of the piecewise-cubic samples).
    predicted: -k (tf - t0)^7 / 201600, the closed-form value.
    """
    start = State3(bc.y0, 0.0, 0.0)
    bc0 = YBoundary(bc.t0, bc.tf, bc.y0, bc.yp, bc.yf, 0.0)
    _, p1, v1, a1, u1 = run_channel_y(start, bc, bc.t0, bc.tf, dt)
    _, p0, v0, a0, u0 = run_channel_y(start, bc0, bc.t0, bc.tf, dt)
    measured = _zoh_integral(p1, v1, a1, u1, dt) - _zoh_integral(p0, v0, a0, u0, dt)
    predicted = -bc.k * (bc.tf - bc.t0) ** 7 / PEAK_GAIN_SCALE
    return measured, predicted
