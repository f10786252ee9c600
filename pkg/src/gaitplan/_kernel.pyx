# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled planner kernels.

Mirrors gaitplan._kernel_py expression-for-expression; the build disables
FP contraction so both backends produce bit-identical doubles.  See the
pure module for the step semantics (midpoint-sampled jerk, snap window).
"""

DEF SNAP_SLACK = 1e-10


cdef inline double _ux(double pos, double vel, double acc,
                       double xf, double vxf, double axf, double rem) nogil:
    cdef double r2 = rem * rem
    cdef double r3 = r2 * rem
    return (60.0 * (xf - pos) / r3
            - 12.0 * (2.0 * vxf + 3.0 * vel) / r2
            + 3.0 * (axf - 3.0 * acc) / rem)


cdef inline double _uy(double pos, double vel, double acc,
                       double yf, double k, double rem) nogil:
    cdef double r2 = rem * rem
    cdef double r3 = r2 * rem
    return (60.0 * (yf - pos) / r3
            - 36.0 * vel / r2
            - 9.0 * acc / rem
            - k * r3 / 240.0)


def ux_feedback(double pos, double vel, double acc,
                double xf, double vxf, double axf, double rem):
    """Jerk command of the x-channel law; rem = tf - t must be > 0."""
    return _ux(pos, vel, acc, xf, vxf, axf, rem)


def uy_feedback(double pos, double vel, double acc,
                double yf, double k, double rem):
    """Jerk command of the y-channel law with peak-shaping gain k."""
    return _uy(pos, vel, acc, yf, k, rem)


def propagate(double pos, double vel, double acc, double u, double dt):
    """Exact triple-integrator update under jerk u held constant for dt."""
    return (pos + vel * dt + 0.5 * acc * dt * dt + u * dt * dt * dt / 6.0,
            vel + acc * dt + 0.5 * u * dt * dt,
            acc + u * dt)


def step_x(double pos, double vel, double acc,
           double xf, double vxf, double axf,
           double tf, double t, double dt, double eps):
    """One closed-loop x-step; returns (pos, vel, acc, u, snapped) at t+dt."""
    cdef double rem = tf - t
    cdef double h, u0, u, pm, vm, am
    if rem <= eps + SNAP_SLACK:
        return xf, vxf, axf, 0.0, True
    u0 = _ux(pos, vel, acc, xf, vxf, axf, rem)
    h = 0.5 * dt
    pm = pos + vel * h + 0.5 * acc * h * h + u0 * h * h * h / 6.0
    vm = vel + acc * h + 0.5 * u0 * h * h
    am = acc + u0 * h
    u = _ux(pm, vm, am, xf, vxf, axf, rem - h)
    return (pos + vel * dt + 0.5 * acc * dt * dt + u * dt * dt * dt / 6.0,
            vel + acc * dt + 0.5 * u * dt * dt,
            acc + u * dt, u, False)


def step_y(double pos, double vel, double acc,
           double yf, double k,
           double tf, double t, double dt, double eps):
    """One closed-loop y-step; snap target is (yf, 0, 0)."""
    cdef double rem = tf - t
    cdef double h, u0, u, pm, vm, am
    if rem <= eps + SNAP_SLACK:
        return yf, 0.0, 0.0, 0.0, True
    u0 = _uy(pos, vel, acc, yf, k, rem)
    h = 0.5 * dt
    pm = pos + vel * h + 0.5 * acc * h * h + u0 * h * h * h / 6.0
    vm = vel + acc * h + 0.5 * u0 * h * h
    am = acc + u0 * h
    u = _uy(pm, vm, am, yf, k, rem - h)
    return (pos + vel * dt + 0.5 * acc * dt * dt + u * dt * dt * dt / 6.0,
            vel + acc * dt + 0.5 * u * dt * dt,
            acc + u * dt, u, False)


def run_x(double pos, double vel, double acc,
          double xf, double vxf, double axf, double tf,
          double t0, double dt, double eps, Py_ssize_t n,
          double[::1] out_pos, double[::1] out_vel, double[::1] out_acc,
          double[::1] out_u):
    """Run n closed-loop x-steps from t0, recording n+1 samples."""
    cdef Py_ssize_t i
    cdef double t, rem, h, u0, u, pm, vm, am
    out_pos[0] = pos
    out_vel[0] = vel
    out_acc[0] = acc
    with nogil:
        for i in range(n):
            t = t0 + i * dt
            rem = tf - t
            if rem <= eps + SNAP_SLACK:
                pos = xf
                vel = vxf
                acc = axf
                u = 0.0
            else:
                u0 = _ux(pos, vel, acc, xf, vxf, axf, rem)
                h = 0.5 * dt
                pm = pos + vel * h + 0.5 * acc * h * h + u0 * h * h * h / 6.0
                vm = vel + acc * h + 0.5 * u0 * h * h
                am = acc + u0 * h
                u = _ux(pm, vm, am, xf, vxf, axf, rem - h)
                pm = pos + vel * dt + 0.5 * acc * dt * dt + u * dt * dt * dt / 6.0
                vm = vel + acc * dt + 0.5 * u * dt * dt
                am = acc + u * dt
                pos = pm
                vel = vm
                acc = am
            out_pos[i + 1] = pos
            out_vel[i + 1] = vel
            out_acc[i + 1] = acc
            out_u[i] = u
    return pos, vel, acc


def run_y(double pos, double vel, double acc,
          double yf, double k, double tf,
          double t0, double dt, double eps, Py_ssize_t n,
          double[::1] out_pos, double[::1] out_vel, double[::1] out_acc,
          double[::1] out_u):
    """Run n closed-loop y-steps from t0, recording n+1 samples."""
    cdef Py_ssize_t i
    cdef double t, rem, h, u0, u, pm, vm, am
    out_pos[0] = pos
    out_vel[0] = vel
    out_acc[0] = acc
    with nogil:
        for i in range(n):
            t = t0 + i * dt
            rem = tf - t
            if rem <= eps + SNAP_SLACK:
                pos = yf
                vel = 0.0
                acc = 0.0
                u = 0.0
            else:
                u0 = _uy(pos, vel, acc, yf, k, rem)
                h = 0.5 * dt
                pm = pos + vel * h + 0.5 * acc * h * h + u0 * h * h * h / 6.0
                vm = vel + acc * h + 0.5 * u0 * h * h
                am = acc + u0 * h
                u = _uy(pm, vm, am, yf, k, rem - h)
                pm = pos + vel * dt + 0.5 * acc * dt * dt + u * dt * dt * dt / 6.0
                vm = vel + acc * dt + 0.5 * u * dt * dt
                am = acc + u * dt
                pos = pm
                vel = vm
                acc = am
            out_pos[i + 1] = pos
            out_vel[i + 1] = vel
            out_acc[i + 1] = acc
            out_u[i] = u
    return pos, vel, acc
