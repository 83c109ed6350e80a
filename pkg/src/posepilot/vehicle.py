"""Rigid-body quadrotor and its cascaded controller.

The arithmetic lives in the kernel modules (compiled when available, pure
Python otherwise); this module owns the typed views: immutable state values
in and out, the controller's persistent loop state, and the parameter
plumbing from config to kernel buffers.
"""

from __future__ import annotations

import math
from array import array
from dataclasses import dataclass
from typing import Sequence

from . import kernels
from .kernels import layout as L
from .refgen import ReferenceVector, Setpoints

LOOPS = ("roll", "pitch", "yaw", "z", "roll_rate", "pitch_rate", "yaw_rate", "z_rate")


class VehicleFault(RuntimeError):
    """Non-finite input reached the control or dynamics path; state is frozen."""


@dataclass(frozen=True)
class PidGains:
    p: float
    i: float
    d: float

    def __post_init__(self):
        if self.p < 0 or self.i < 0 or self.d < 0:
            raise ValueError("gains must be >= 0")


@dataclass(frozen=True)
class PhysicalParams:
    mass: float
    gravity: float
    inertia: tuple[float, float, float]
    drag: float
    thrust_max: float

    @classmethod
    def from_config(cls, config) -> "PhysicalParams":
        v = config.vehicle
        return cls(mass=v["mass"], gravity=v["gravity"], inertia=tuple(v["inertia"]),
                   drag=v["drag"], thrust_max=v["thrust_max"])


@dataclass(frozen=True)
class VehicleState:
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    orientation: tuple[float, float, float, float]  # unit quaternion, w first
    angular_rate: tuple[float, float, float]        # body frame

    @classmethod
    def hover(cls, position=(0.0, 0.0, 1.0), yaw: float = 0.0) -> "VehicleState":
        h = yaw / 2.0
        return cls(position=tuple(position), velocity=(0.0, 0.0, 0.0),
                   orientation=(math.cos(h), 0.0, 0.0, math.sin(h)),
                   angular_rate=(0.0, 0.0, 0.0))


@dataclass(frozen=True)
class BodyCommand:
    thrust: float                         # N, along body z
    torque: tuple[float, float, float]    # N*m, body frame


def quat_to_euler(q: Sequence[float]) -> tuple[float, float, float]:
    """Roll, pitch, yaw from a unit quaternion; same convention as the kernel."""
    qw, qx, qy, qz = q
    roll = math.atan2(2.0 * (qw * qx + qy * qz), 1.0 - 2.0 * (qx * qx + qy * qy))
    sinp = 2.0 * (qw * qy - qz * qx)
    sinp = max(-1.0, min(1.0, sinp))
    pitch = math.asin(sinp)
    yaw = math.atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz))
    return roll, pitch, yaw


def _state_into(s: array, st: VehicleState) -> None:
    for i in range(3):
        s[L.S_POS + i] = st.position[i]
        s[L.S_VEL + i] = st.velocity[i]
        s[L.S_OMEGA + i] = st.angular_rate[i]
    for i in range(4):
        s[L.S_QUAT + i] = st.orientation[i]


def _state_from(s: array) -> VehicleState:
    return VehicleState(
        position=(s[L.S_POS], s[L.S_POS + 1], s[L.S_POS + 2]),
        velocity=(s[L.S_VEL], s[L.S_VEL + 1], s[L.S_VEL + 2]),
        orientation=(s[L.S_QUAT], s[L.S_QUAT + 1], s[L.S_QUAT + 2], s[L.S_QUAT + 3]),
        angular_rate=(s[L.S_OMEGA], s[L.S_OMEGA + 1], s[L.S_OMEGA + 2]),
    )


def _blank_state_buffer() -> array:
    s = array("d", [0.0] * L.S_LEN)
    s[L.S_QUAT] = 1.0
    for i in range(8):
        s[L.S_PREV + i] = math.nan  # no previous measurement yet
    return s


# --- functional operations (one-shot views over the kernel) -----------------

@dataclass(frozen=True)
class PidState:
    integral: float = 0.0
    prev_measurement: float = math.nan
    faulted: bool = False


def pid_step(state: PidState, error: float, dt: float, gains: PidGains,
             measurement: float = 0.0, windup_limit: float = math.inf,
             angular: bool = False, backend: str | None = None) -> tuple[float, PidState]:
    """One parallel-form PID step; returns (output, advanced state).

    Integral is clamped so its contribution stays within windup_limit;
    derivative acts on the measurement. Non-finite input faults the state.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if state.faulted:
        return 0.0, state
    k = kernels.get_kernel(backend)
    s = _blank_state_buffer()
    p = array("d", [0.0] * L.P_LEN)
    s[L.S_INTEG] = state.integral
    s[L.S_PREV] = state.prev_measurement
    p[L.P_GAINS] = gains.p
    p[L.P_GAINS + 1] = gains.i
    p[L.P_GAINS + 2] = gains.d
    p[L.P_WINDUP] = windup_limit
    out = k.pid_step(s, 0, error, measurement, dt, p, 1 if angular else 0)
    if s[L.S_FAULT] != 0.0:
        return 0.0, PidState(state.integral, state.prev_measurement, faulted=True)
    return out, PidState(s[L.S_INTEG], s[L.S_PREV], faulted=False)


def dynamics_step(state: VehicleState, cmd: BodyCommand, dt: float,
                  params: PhysicalParams, backend: str | None = None) -> VehicleState:
    """Semi-implicit Euler step. dt must lie in (0, 0.01]."""
    if not 0.0 < dt <= 0.01:
        raise ValueError("dt must be in (0, 0.01]")
    k = kernels.get_kernel(backend)
    s = _blank_state_buffer()
    _state_into(s, state)
    s[L.S_CMD] = cmd.thrust
    s[L.S_CMD + 1] = cmd.torque[0]
    s[L.S_CMD + 2] = cmd.torque[1]
    s[L.S_CMD + 3] = cmd.torque[2]
    p = array("d", [0.0] * L.P_LEN)
    p[L.P_MASS] = params.mass
    p[L.P_GRAVITY] = params.gravity
    for i in range(3):
        p[L.P_INERTIA + i] = params.inertia[i]
    p[L.P_DRAG] = params.drag
    p[L.P_THRUST_MAX] = params.thrust_max
    p[L.P_DT] = dt
    k.physics_step(s, p)
    if s[L.S_FAULT] != 0.0:
        raise VehicleFault("non-finite command")
    return _state_from(s)


class Vehicle:
    """Stateful vehicle + controller pair driven by the session loop.

    Owns the kernel state buffer; everything hot runs inside the selected
    kernel backend. Exposes immutable snapshots for logging and telemetry.
    """

    def __init__(self, config, backend: str | None = None):
        self._kernel = kernels.get_kernel(backend)
        self.backend = self._kernel.BACKEND
        self._p = config.kernel_params()
        self._s = _blank_state_buffer()
        self._thrust_max = float(config.vehicle["thrust_max"])
        # Until the first cascade evaluation the command is exact hover.
        self._s[L.S_CMD] = self._p[L.P_MASS] * self._p[L.P_GRAVITY]

    def set_pose(self, position, yaw: float = 0.0) -> None:
        """Place the vehicle at rest and align the setpoints so it stays put."""
        st = VehicleState.hover(position, yaw)
        _state_into(self._s, st)
        for i in range(3):
            self._s[L.S_VEL + i] = 0.0
            self._s[L.S_OMEGA + i] = 0.0
        self._s[L.S_SP_PHI] = 0.0
        self._s[L.S_SP_THETA] = 0.0
        self._s[L.S_SP_PSI] = yaw
        self._s[L.S_SP_Z] = position[2]
        self._s[L.S_CMD] = self._p[L.P_MASS] * self._p[L.P_GRAVITY]
        self._s[L.S_CMD + 1] = 0.0
        self._s[L.S_CMD + 2] = 0.0
        self._s[L.S_CMD + 3] = 0.0
        for i in range(8):
            self._s[L.S_INTEG + i] = 0.0
            self._s[L.S_PREV + i] = math.nan
        self._s[L.S_FAULT] = 0.0

    @property
    def state(self) -> VehicleState:
        return _state_from(self._s)

    @property
    def setpoints(self) -> Setpoints:
        s = self._s
        return Setpoints(phi=s[L.S_SP_PHI], theta=s[L.S_SP_THETA],
                         psi=s[L.S_SP_PSI], z=s[L.S_SP_Z])

    @property
    def command(self) -> BodyCommand:
        s = self._s
        return BodyCommand(thrust=s[L.S_CMD], torque=(s[L.S_CMD + 1], s[L.S_CMD + 2], s[L.S_CMD + 3]))

    @property
    def faulted(self) -> bool:
        return self._s[L.S_FAULT] != 0.0

    @property
    def physics_steps(self) -> int:
        return int(self._s[L.S_N_PHYS])

    @property
    def cascade_evals(self) -> int:
        return int(self._s[L.S_N_CASC])

    def euler(self) -> tuple[float, float, float]:
        return quat_to_euler(self.state.orientation)

    def set_setpoints(self, sp: Setpoints) -> None:
        self._s[L.S_SP_PHI] = sp.phi
        self._s[L.S_SP_THETA] = sp.theta
        self._s[L.S_SP_PSI] = sp.psi
        self._s[L.S_SP_Z] = sp.z

    def cascade_once(self) -> BodyCommand:
        """One controller evaluation at the configured cascade period."""
        self._kernel.cascade(self._s, self._p)
        return self.command

    def physics_once(self) -> None:
        """One physics sub-step with the currently latched command."""
        self._kernel.physics_step(self._s, self._p)

    def reference_tick(self, r: ReferenceVector) -> None:
        self._kernel.reference_tick(self._s, self._p, r.r1, r.r2, r.r3, r.r4)
