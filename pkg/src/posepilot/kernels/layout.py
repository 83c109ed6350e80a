"""Buffer layout shared by the pure-Python and compiled flight-loop kernels.

Both kernels operate on two flat ``array('d')`` buffers: a mutable state
buffer S (vehicle state, PID internals, setpoints, last actuator command,
counters) and a read-only parameter buffer P (physical constants, gains,
limits, loop rates). The compiled kernel hard-codes these offsets, so any
change here must be mirrored in fastloop.pyx; test_kernels asserts the two
stay in sync via LAYOUT_TAG.
"""

# --- S buffer (mutable per-session state) ---
S_POS = 0          # 3: world position x, y, z (m)
S_VEL = 3          # 3: world velocity (m/s)
S_QUAT = 6         # 4: orientation quaternion w, x, y, z (world<-body)
S_OMEGA = 10       # 3: body angular rate (rad/s)
S_INTEG = 13       # 8: PID integrals, loop-indexed
S_PREV = 21        # 8: PID previous measurement (NaN = unset)
S_SP_PHI = 29      # roll setpoint (rad)
S_SP_THETA = 30    # pitch setpoint (rad)
S_SP_PSI = 31      # yaw setpoint (rad, unwrapped)
S_SP_Z = 32        # height setpoint (m)
S_CMD = 33         # 4: last actuator command: thrust (N), torque x/y/z (N*m)
S_FAULT = 37       # 0.0 ok, 1.0 faulted (state frozen)
S_N_PHYS = 38      # physics steps executed (count, stored as double)
S_N_CASC = 39      # cascade evaluations executed
S_LEN = 40

# --- PID loop indices ---
LOOP_ROLL = 0
LOOP_PITCH = 1
LOOP_YAW = 2
LOOP_Z = 3
LOOP_ROLL_RATE = 4
LOOP_PITCH_RATE = 5
LOOP_YAW_RATE = 6
LOOP_Z_RATE = 7
N_LOOPS = 8

# --- P buffer (read-only parameters) ---
P_MASS = 0         # kg
P_GRAVITY = 1      # m/s^2
P_INERTIA = 2      # 3: diagonal inertia Ixx, Iyy, Izz (kg*m^2)
P_DRAG = 5         # linear drag coefficient (N*s/m)
P_THRUST_MAX = 6   # N
P_THRUST_AUTH = 7  # N of thrust delta at full inner-loop command
P_TORQUE_MAX = 8   # 3: N*m at full inner-loop command
P_DT = 11          # physics timestep (s)
P_RATE_LIM = 12    # 4: outer-loop output clamps: roll, pitch, yaw (rad/s), climb (m/s)
P_GAINS = 16       # 8 loops x (P, I, D)
P_WINDUP = 40      # 8: cap on |integral contribution| per loop, output units
P_STEPS_PER_TICK = 48     # physics steps per reference tick
P_STEPS_PER_CASC = 49     # physics steps per cascade evaluation
P_SCALE_Z = 50     # reference scaling: m per tick
P_SCALE_PHI = 51   # rad
P_SCALE_THETA = 52 # rad
P_SCALE_PSI = 53   # rad per tick
P_LEN = 54

# Bumped whenever any offset above changes; fastloop must report the same tag.
LAYOUT_TAG = "posepilot-kernel-layout-1"
