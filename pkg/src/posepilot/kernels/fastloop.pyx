# cython: language_level=3
# cython: boundscheck=False, wraparound=False, initializedcheck=False, cdivision=True
"""Compiled flight-loop kernel.

Statement-for-statement transliteration of pyloop.py onto C doubles. Keep
every arithmetic expression in the same order as the Python twin and build
with FP contraction off so trajectories stay bit-identical across kernels.
Buffer offsets are hard-coded here; layout.py is the source of truth and
LAYOUT_TAG below must match it.
"""

from libc.math cimport M_PI, asin, atan2, fmod, isfinite, isnan, sqrt

BACKEND = "fast"

cdef double TWO_PI = 6.283185307179586

# Offsets mirrored from layout.py (tag checked at import time by the package).
cdef enum:
    S_POS = 0
    S_VEL = 3
    S_QUAT = 6
    S_OMEGA = 10
    S_INTEG = 13
    S_PREV = 21
    S_SP_PHI = 29
    S_SP_THETA = 30
    S_SP_PSI = 31
    S_SP_Z = 32
    S_CMD = 33
    S_FAULT = 37
    S_N_PHYS = 38
    S_N_CASC = 39

cdef enum:
    LOOP_ROLL = 0
    LOOP_PITCH = 1
    LOOP_YAW = 2
    LOOP_Z = 3
    LOOP_ROLL_RATE = 4
    LOOP_PITCH_RATE = 5
    LOOP_YAW_RATE = 6
    LOOP_Z_RATE = 7

cdef enum:
    P_MASS = 0
    P_GRAVITY = 1
    P_INERTIA = 2
    P_DRAG = 5
    P_THRUST_MAX = 6
    P_THRUST_AUTH = 7
    P_TORQUE_MAX = 8
    P_DT = 11
    P_RATE_LIM = 12
    P_GAINS = 16
    P_WINDUP = 40
    P_STEPS_PER_TICK = 48
    P_STEPS_PER_CASC = 49
    P_SCALE_Z = 50
    P_SCALE_PHI = 51
    P_SCALE_THETA = 52
    P_SCALE_PSI = 53


def layout_tag():
    return "posepilot-kernel-layout-1"


cdef inline double _wrap_pi(double a) noexcept:
    a = fmod(a, TWO_PI)
    if a > M_PI:
        a -= TWO_PI
    elif a <= -M_PI:
        a += TWO_PI
    return a


def wrap_pi(double a):
    """Wrap an angle to (-pi, pi]."""
    return _wrap_pi(a)


cdef double _pid_step(double[::1] s, int loop, double err, double meas,
                      double dt, double[::1] p, int angular) noexcept:
    cdef double kp, ki, kd, out, integ, lim, prev, dm
    if not (isfinite(err) and isfinite(meas)):
        s[S_FAULT] = 1.0
        return 0.0
    kp = p[P_GAINS + 3 * loop]
    ki = p[P_GAINS + 3 * loop + 1]
    kd = p[P_GAINS + 3 * loop + 2]
    out = kp * err
    if ki > 0.0:
        integ = s[S_INTEG + loop] + err * dt
        lim = p[P_WINDUP + loop] / ki
        if integ > lim:
            integ = lim
        elif integ < -lim:
            integ = -lim
        s[S_INTEG + loop] = integ
        out += ki * integ
    if kd > 0.0:
        prev = s[S_PREV + loop]
        if not isnan(prev):
            dm = meas - prev
            if angular:
                dm = _wrap_pi(dm)
            out -= kd * dm / dt
    s[S_PREV + loop] = meas
    return out


def pid_step(double[::1] s, int loop, double err, double meas, double dt,
             double[::1] p, int angular):
    """Advance one PID loop and return its output.

    Parallel form: kp*e + ki*integral(e) - kd*d(meas)/dt, rectangle-rule
    integral clamped so the integral contribution stays within the windup
    limit, derivative on the measurement (wrapped when angular != 0).
    Sets the fault flag and freezes loop state on non-finite input.
    """
    return _pid_step(s, loop, err, meas, dt, p, angular)


cdef void _cascade(double[::1] s, double[::1] p) noexcept:
    cdef double qw, qx, qy, qz, roll, sinp, pitch, yaw, dt_c
    cdef double p_sp, q_sp, r_sp, vz_sp, lim, u_p, u_q, u_r, u_z, thrust
    if s[S_FAULT] != 0.0:
        return
    qw = s[S_QUAT]
    qx = s[S_QUAT + 1]
    qy = s[S_QUAT + 2]
    qz = s[S_QUAT + 3]
    roll = atan2(2.0 * (qw * qx + qy * qz), 1.0 - 2.0 * (qx * qx + qy * qy))
    sinp = 2.0 * (qw * qy - qz * qx)
    if sinp > 1.0:
        sinp = 1.0
    elif sinp < -1.0:
        sinp = -1.0
    pitch = asin(sinp)
    yaw = atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz))

    dt_c = p[P_DT] * p[P_STEPS_PER_CASC]

    p_sp = _pid_step(s, LOOP_ROLL, s[S_SP_PHI] - roll, roll, dt_c, p, 0)
    lim = p[P_RATE_LIM]
    if p_sp > lim:
        p_sp = lim
    elif p_sp < -lim:
        p_sp = -lim

    q_sp = _pid_step(s, LOOP_PITCH, s[S_SP_THETA] - pitch, pitch, dt_c, p, 0)
    lim = p[P_RATE_LIM + 1]
    if q_sp > lim:
        q_sp = lim
    elif q_sp < -lim:
        q_sp = -lim

    r_sp = _pid_step(s, LOOP_YAW, _wrap_pi(s[S_SP_PSI] - yaw), yaw, dt_c, p, 1)
    lim = p[P_RATE_LIM + 2]
    if r_sp > lim:
        r_sp = lim
    elif r_sp < -lim:
        r_sp = -lim

    vz_sp = _pid_step(s, LOOP_Z, s[S_SP_Z] - s[S_POS + 2], s[S_POS + 2], dt_c, p, 0)
    lim = p[P_RATE_LIM + 3]
    if vz_sp > lim:
        vz_sp = lim
    elif vz_sp < -lim:
        vz_sp = -lim

    u_p = _pid_step(s, LOOP_ROLL_RATE, p_sp - s[S_OMEGA], s[S_OMEGA], dt_c, p, 0)
    u_q = _pid_step(s, LOOP_PITCH_RATE, q_sp - s[S_OMEGA + 1], s[S_OMEGA + 1], dt_c, p, 0)
    u_r = _pid_step(s, LOOP_YAW_RATE, r_sp - s[S_OMEGA + 2], s[S_OMEGA + 2], dt_c, p, 0)
    u_z = _pid_step(s, LOOP_Z_RATE, vz_sp - s[S_VEL + 2], s[S_VEL + 2], dt_c, p, 0)
    if u_p > 1.0:
        u_p = 1.0
    elif u_p < -1.0:
        u_p = -1.0
    if u_q > 1.0:
        u_q = 1.0
    elif u_q < -1.0:
        u_q = -1.0
    if u_r > 1.0:
        u_r = 1.0
    elif u_r < -1.0:
        u_r = -1.0
    if u_z > 1.0:
        u_z = 1.0
    elif u_z < -1.0:
        u_z = -1.0

    thrust = p[P_MASS] * p[P_GRAVITY] + u_z * p[P_THRUST_AUTH]
    if thrust > p[P_THRUST_MAX]:
        thrust = p[P_THRUST_MAX]
    elif thrust < 0.0:
        thrust = 0.0
    s[S_CMD] = thrust
    s[S_CMD + 1] = u_p * p[P_TORQUE_MAX]
    s[S_CMD + 2] = u_q * p[P_TORQUE_MAX + 1]
    s[S_CMD + 3] = u_r * p[P_TORQUE_MAX + 2]
    s[S_N_CASC] += 1.0


def cascade(double[::1] s, double[::1] p):
    """Run one evaluation of the cascaded controller.

    Outer loops turn setpoint errors into rate setpoints; inner loops turn
    rate errors into a normalized actuator command mapped onto thrust about
    hover and body torques. Writes the command into s[S_CMD:S_CMD+4].
    """
    _cascade(s, p)


cdef void _physics_step(double[::1] s, double[::1] p) noexcept:
    cdef double thrust, tx, ty, tz, dt, m, qw, qx, qy, qz
    cdef double fx, fy, fz, vx, vy, vz, ixx, iyy, izz, wx, wy, wz
    cdef double cx, cy, cz, nqw, nqx, nqy, nqz, n
    if s[S_FAULT] != 0.0:
        return
    thrust = s[S_CMD]
    tx = s[S_CMD + 1]
    ty = s[S_CMD + 2]
    tz = s[S_CMD + 3]
    if not (
        isfinite(thrust)
        and isfinite(tx)
        and isfinite(ty)
        and isfinite(tz)
    ):
        s[S_FAULT] = 1.0
        return

    dt = p[P_DT]
    m = p[P_MASS]
    qw = s[S_QUAT]
    qx = s[S_QUAT + 1]
    qy = s[S_QUAT + 2]
    qz = s[S_QUAT + 3]

    fx = thrust * (2.0 * (qx * qz + qw * qy)) - p[P_DRAG] * s[S_VEL]
    fy = thrust * (2.0 * (qy * qz - qw * qx)) - p[P_DRAG] * s[S_VEL + 1]
    fz = (
        thrust * (1.0 - 2.0 * (qx * qx + qy * qy))
        - m * p[P_GRAVITY]
        - p[P_DRAG] * s[S_VEL + 2]
    )

    vx = s[S_VEL] + dt * (fx / m)
    vy = s[S_VEL + 1] + dt * (fy / m)
    vz = s[S_VEL + 2] + dt * (fz / m)
    s[S_VEL] = vx
    s[S_VEL + 1] = vy
    s[S_VEL + 2] = vz
    s[S_POS] += dt * vx
    s[S_POS + 1] += dt * vy
    s[S_POS + 2] += dt * vz

    ixx = p[P_INERTIA]
    iyy = p[P_INERTIA + 1]
    izz = p[P_INERTIA + 2]
    wx = s[S_OMEGA]
    wy = s[S_OMEGA + 1]
    wz = s[S_OMEGA + 2]
    cx = wy * (izz * wz) - wz * (iyy * wy)
    cy = wz * (ixx * wx) - wx * (izz * wz)
    cz = wx * (iyy * wy) - wy * (ixx * wx)
    wx = wx + dt * ((tx - cx) / ixx)
    wy = wy + dt * ((ty - cy) / iyy)
    wz = wz + dt * ((tz - cz) / izz)
    s[S_OMEGA] = wx
    s[S_OMEGA + 1] = wy
    s[S_OMEGA + 2] = wz

    nqw = qw + dt * (0.5 * (-qx * wx - qy * wy - qz * wz))
    nqx = qx + dt * (0.5 * (qw * wx + qy * wz - qz * wy))
    nqy = qy + dt * (0.5 * (qw * wy - qx * wz + qz * wx))
    nqz = qz + dt * (0.5 * (qw * wz + qx * wy - qy * wx))
    n = sqrt(nqw * nqw + nqx * nqx + nqy * nqy + nqz * nqz)
    s[S_QUAT] = nqw / n
    s[S_QUAT + 1] = nqx / n
    s[S_QUAT + 2] = nqy / n
    s[S_QUAT + 3] = nqz / n
    s[S_N_PHYS] += 1.0


def physics_step(double[::1] s, double[::1] p):
    """One semi-implicit Euler step of the rigid-body dynamics.

    World force = R*(0,0,thrust) - (0,0,m*g) - drag*v; body-frame Euler
    equation with diagonal inertia; quaternion integrated from the updated
    angular rate and renormalized.
    """
    _physics_step(s, p)


def reference_tick(double[::1] s, double[::1] p, double r1, double r2,
                   double r3, double r4):
    """Advance one reference period from a reference vector.

    Integrates the setpoints (absolute roll/pitch, accumulated yaw/height),
    then runs the physics sub-steps with the cascade evaluated on its own
    decimated schedule.
    """
    cdef int n_steps, per_casc, i
    if s[S_FAULT] != 0.0:
        return
    if not (
        isfinite(r1)
        and isfinite(r2)
        and isfinite(r3)
        and isfinite(r4)
    ):
        s[S_FAULT] = 1.0
        return
    s[S_SP_PHI] = r4 * p[P_SCALE_PHI]
    s[S_SP_THETA] = r3 * p[P_SCALE_THETA]
    s[S_SP_PSI] = s[S_SP_PSI] + r2 * p[P_SCALE_PSI]
    s[S_SP_Z] = s[S_SP_Z] + r1 * p[P_SCALE_Z]

    n_steps = <int> p[P_STEPS_PER_TICK]
    per_casc = <int> p[P_STEPS_PER_CASC]
    for i in range(n_steps):
        if i % per_casc == 0:
            _cascade(s, p)
        _physics_step(s, p)
