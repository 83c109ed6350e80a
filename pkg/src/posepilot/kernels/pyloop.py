"""Pure-Python flight-loop kernel.

Reference implementation of the hot loop: parallel-form PID steps, the
cascaded attitude/height controller, and semi-implicit Euler rigid-body
integration. fastloop.pyx is a statement-for-statement transliteration of
this module; keep every arithmetic expression in the same order in both so
trajectories stay bit-identical across kernels.
"""

import math

from .layout import (
    LOOP_PITCH,
    LOOP_PITCH_RATE,
    LOOP_ROLL,
    LOOP_ROLL_RATE,
    LOOP_YAW,
    LOOP_YAW_RATE,
    LOOP_Z,
    LOOP_Z_RATE,
    P_DRAG,
    P_DT,
    P_GAINS,
    P_GRAVITY,
    P_INERTIA,
    P_MASS,
    P_RATE_LIM,
    P_SCALE_PHI,
    P_SCALE_PSI,
    P_SCALE_THETA,
    P_SCALE_Z,
    P_STEPS_PER_CASC,
    P_STEPS_PER_TICK,
    P_THRUST_AUTH,
    P_THRUST_MAX,
    P_TORQUE_MAX,
    P_WINDUP,
    S_CMD,
    S_FAULT,
    S_INTEG,
    S_N_CASC,
    S_N_PHYS,
    S_OMEGA,
    S_POS,
    S_PREV,
    S_QUAT,
    S_SP_PHI,
    S_SP_PSI,
    S_SP_THETA,
    S_SP_Z,
    S_VEL,
    LAYOUT_TAG,
)

BACKEND = "python"

TWO_PI = 6.283185307179586


def layout_tag():
    return LAYOUT_TAG


def wrap_pi(a):
    """Wrap an angle to (-pi, pi]."""
    a = math.fmod(a, TWO_PI)
    if a > math.pi:
        a -= TWO_PI
    elif a <= -math.pi:
        a += TWO_PI
    return a


def pid_step(s, loop, err, meas, dt, p, angular):
    """Advance one PID loop and return its output.

    Parallel form: kp*e + ki*integral(e) - kd*d(meas)/dt, rectangle-rule
    integral clamped so the integral contribution stays within the windup
    limit, derivative on the measurement (wrapped when angular != 0).
    Sets the fault flag and freezes loop state on non-finite input.
    """
    if not (math.isfinite(err) and math.isfinite(meas)):
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
        if not math.isnan(prev):
            dm = meas - prev
            if angular:
                dm = wrap_pi(dm)
            out -= kd * dm / dt
    s[S_PREV + loop] = meas
    return out


def cascade(s, p):
    """Run one evaluation of the cascaded controller.

    Outer loops turn setpoint errors into rate setpoints; inner loops turn
    rate errors into a normalized actuator command mapped onto thrust about
    hover and body torques. Writes the command into s[S_CMD:S_CMD+4].
    """
    if s[S_FAULT] != 0.0:
        return
    qw = s[S_QUAT]
    qx = s[S_QUAT + 1]
    qy = s[S_QUAT + 2]
    qz = s[S_QUAT + 3]
    roll = math.atan2(2.0 * (qw * qx + qy * qz), 1.0 - 2.0 * (qx * qx + qy * qy))
    sinp = 2.0 * (qw * qy - qz * qx)
    if sinp > 1.0:
        sinp = 1.0
    elif sinp < -1.0:
        sinp = -1.0
    pitch = math.asin(sinp)
    yaw = math.atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz))

    dt_c = p[P_DT] * p[P_STEPS_PER_CASC]

    p_sp = pid_step(s, LOOP_ROLL, s[S_SP_PHI] - roll, roll, dt_c, p, 0)
    lim = p[P_RATE_LIM]
    if p_sp > lim:
        p_sp = lim
    elif p_sp < -lim:
        p_sp = -lim

    q_sp = pid_step(s, LOOP_PITCH, s[S_SP_THETA] - pitch, pitch, dt_c, p, 0)
    lim = p[P_RATE_LIM + 1]
    if q_sp > lim:
        q_sp = lim
    elif q_sp < -lim:
        q_sp = -lim

    r_sp = pid_step(s, LOOP_YAW, wrap_pi(s[S_SP_PSI] - yaw), yaw, dt_c, p, 1)
    lim = p[P_RATE_LIM + 2]
    if r_sp > lim:
        r_sp = lim
    elif r_sp < -lim:
        r_sp = -lim

    vz_sp = pid_step(s, LOOP_Z, s[S_SP_Z] - s[S_POS + 2], s[S_POS + 2], dt_c, p, 0)
    lim = p[P_RATE_LIM + 3]
    if vz_sp > lim:
        vz_sp = lim
    elif vz_sp < -lim:
        vz_sp = -lim

    u_p = pid_step(s, LOOP_ROLL_RATE, p_sp - s[S_OMEGA], s[S_OMEGA], dt_c, p, 0)
    u_q = pid_step(s, LOOP_PITCH_RATE, q_sp - s[S_OMEGA + 1], s[S_OMEGA + 1], dt_c, p, 0)
    u_r = pid_step(s, LOOP_YAW_RATE, r_sp - s[S_OMEGA + 2], s[S_OMEGA + 2], dt_c, p, 0)
    u_z = pid_step(s, LOOP_Z_RATE, vz_sp - s[S_VEL + 2], s[S_VEL + 2], dt_c, p, 0)
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


def physics_step(s, p):
    """One semi-implicit Euler step of the rigid-body dynamics.

    World force = R*(0,0,thrust) - (0,0,m*g) - drag*v; body-frame Euler
    equation with diagonal inertia; quaternion integrated from the updated
    angular rate and renormalized.
    """
    if s[S_FAULT] != 0.0:
        return
    thrust = s[S_CMD]
    tx = s[S_CMD + 1]
    ty = s[S_CMD + 2]
    tz = s[S_CMD + 3]
    if not (
        math.isfinite(thrust)
        and math.isfinite(tx)
        and math.isfinite(ty)
        and math.isfinite(tz)
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
    n = math.sqrt(nqw * nqw + nqx * nqx + nqy * nqy + nqz * nqz)
    s[S_QUAT] = nqw / n
    s[S_QUAT + 1] = nqx / n
    s[S_QUAT + 2] = nqy / n
    s[S_QUAT + 3] = nqz / n
    s[S_N_PHYS] += 1.0


def reference_tick(s, p, r1, r2, r3, r4):
    """Advance one reference period from a reference vector.

    Integrates the setpoints (absolute roll/pitch, accumulated yaw/height),
    then runs the physics sub-steps with the cascade evaluated on its own
    decimated schedule.
    """
    if s[S_FAULT] != 0.0:
        return
    if not (
        math.isfinite(r1)
        and math.isfinite(r2)
        and math.isfinite(r3)
        and math.isfinite(r4)
    ):
        s[S_FAULT] = 1.0
        return
    s[S_SP_PHI] = r4 * p[P_SCALE_PHI]
    s[S_SP_THETA] = r3 * p[P_SCALE_THETA]
    s[S_SP_PSI] = s[S_SP_PSI] + r2 * p[P_SCALE_PSI]
    s[S_SP_Z] = s[S_SP_Z] + r1 * p[P_SCALE_Z]

    n_steps = int(p[P_STEPS_PER_TICK])
    per_casc = int(p[P_STEPS_PER_CASC])
    for i in range(n_steps):
        if i % per_casc == 0:
            cascade(s, p)
        physics_step(s, p)
