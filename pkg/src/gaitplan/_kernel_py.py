"""Pure-Python planner kernels.

Fallback implementation of the hot per-step operations; the compiled
extension ``gaitplan._kernel`` provides the same API.  Both must stay
expression-for-expression identical so results agree bitwise across
backends (the extension is built with FP contraction disabled).

All functions work on plain floats: one trajectory channel is the triple
(pos, vel, acc) driven by a jerk command held constant over one control
period (zero-order hold), for which `propagate` is the exact update.

Step semantics: ``step_x``/``step_y`` advance one control period from
sample time ``t`` to ``t + dt`` and return the state at ``t + dt``.  The
jerk that is held over the period is the feedback law evaluated at the
period midpoint (one half-step prediction); plain left-endpoint sampling
degrades the match against the continuous-time optimum from O(dt^2) to
O(dt).  When the remaining horizon is at most ``eps`` the state is set to
the boundary triple instead (snap), so the sample that lands on the
horizon holds the boundary values exactly.
"""

# Absolute slack on the snap test: covers accumulated float drift of the
# sample clock (t = i*dt) without ever absorbing a genuine full step.
SNAP_SLACK = 1e-10


def ux_feedback(pos, vel, acc, xf, vxf, axf, rem):
    """Jerk command of the x-channel law; rem = tf - t must be > 0."""
    r2 = rem * rem
    r3 = r2 * rem
    return (
        60.0 * (xf - pos) / r3
        - 12.0 * (2.0 * vxf + 3.0 * vel) / r2
        + 3.0 * (axf - 3.0 * acc) / rem
    )


def uy_feedback(pos, vel, acc, yf, k, rem):
    """Jerk command of the y-channel law with peak-shaping gain k."""
    r2 = rem * rem
    r3 = r2 * rem
    return (
        60.0 * (yf - pos) / r3
        - 36.0 * vel / r2
        - 9.0 * acc / rem
        - k * r3 / 240.0
    )


def propagate(pos, vel, acc, u, dt):
    """Exact triple-integrator update under jerk u held constant for dt."""
    return (
        pos + vel * dt + 0.5 * acc * dt * dt + u * dt * dt * dt / 6.0,
        vel + acc * dt + 0.5 * u * dt * dt,
        acc + u * dt,
    )


def step_x(pos, vel, acc, xf, vxf, axf, tf, t, dt, eps):
    """One closed-loop step of the x-channel.

    Returns (pos, vel, acc, u, snapped) for the sample at t + dt.
    """
    rem = tf - t
    if rem <= eps + SNAP_SLACK:
        return xf, vxf, axf, 0.0, True
    u0 = ux_feedback(pos, vel, acc, xf, vxf, axf, rem)
    h = 0.5 * dt
    pm, vm, am = propagate(pos, vel, acc, u0, h)
    u = ux_feedback(pm, vm, am, xf, vxf, axf, rem - h)
    p, v, a = propagate(pos, vel, acc, u, dt)
    return p, v, a, u, False


def step_y(pos, vel, acc, yf, k, tf, t, dt, eps):
    """One closed-loop step of the y-channel; snap target is (yf, 0, 0)."""
    rem = tf - t
    if rem <= eps + SNAP_SLACK:
        return yf, 0.0, 0.0, 0.0, True
    u0 = uy_feedback(pos, vel, acc, yf, k, rem)
    h = 0.5 * dt
    pm, vm, am = propagate(pos, vel, acc, u0, h)
    u = uy_feedback(pm, vm, am, yf, k, rem - h)
    p, v, a = propagate(pos, vel, acc, u, dt)
    return p, v, a, u, False


def run_x(pos, vel, acc, xf, vxf, axf, tf, t0, dt, eps, n, out_pos, out_vel, out_acc, out_u):
    """Run n closed-loop x-steps from t0, recording n+1 samples.

    out_pos/out_vel/out_acc must hold n+1 entries, out_u holds n (the jerk
    held over each interval, 0.0 on snapped intervals).  Returns the final
    (pos, vel, acc).
    """
    out_pos[0] = pos
    out_vel[0] = vel
    out_acc[0] = acc
    for i in range(n):
        t = t0 + i * dt
        pos, vel, acc, u, _ = step_x(pos, vel, acc, xf, vxf, axf, tf, t, dt, eps)
        out_pos[i + 1] = pos
        out_vel[i + 1] = vel
        out_acc[i + 1] = acc
        out_u[i] = u
    return pos, vel, acc


def run_y(pos, vel, acc, yf, k, tf, t0, dt, eps, n, out_pos, out_vel, out_acc, out_u):
    """Run n closed-loop y-steps from t0, recording n+1 samples."""
    out_pos[0] = pos
    out_vel[0] = vel
    out_acc[0] = acc
    for i in range(n):
        t = t0 + i * dt
        pos, vel, acc, u, _ = step_y(pos, vel, acc, yf, k, tf, t, dt, eps)
        out_pos[i + 1] = pos
        out_vel[i + 1] = vel
        out_acc[i + 1] = acc
        out_u[i] = u
    return pos, vel, acc
