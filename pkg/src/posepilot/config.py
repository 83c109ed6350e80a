"""Configuration loading, validation, and canonical digesting.

One YAML document drives everything: zone geometry, scaling, gains, physical
parameters, rates, gateway endpoints. The resolved document has a canonical
sha256 digest that is stamped into run logs and telemetry so a log, a replay,
and a cockpit overlay can prove they were produced by the same configuration.
"""

from __future__ import annotations

import hashlib
import json
import math
from array import array
from dataclasses import dataclass
from importlib import resources
from typing import Any, Mapping

import yaml

from .kernels import layout as L
from .refgen import Rect, ScalingFactors, Zone, make_zone

LOOP_NAMES = ("roll", "roll_rate", "pitch", "pitch_rate", "yaw", "yaw_rate", "z", "z_rate")

# Windup/rate-limit kernel slots are keyed by loop index, not YAML order.
_WINDUP_ORDER = ("roll", "pitch", "yaw", "z", "roll_rate", "pitch_rate", "yaw_rate", "z_rate")


class ConfigError(ValueError):
    """Invalid configuration; message carries the dotted key path."""


def _fail(path: str, msg: str) -> None:
    raise ConfigError(f"config: {path}: {msg}")


def _need(doc: Mapping[str, Any], path: str, key: str) -> Any:
    if not isinstance(doc, Mapping):
        _fail(path, f"expected mapping, got {type(doc).__name__}")
    if key not in doc:
        _fail(f"{path}.{key}" if path else key, "missing")
    return doc[key]


def _num(v: Any, path: str, lo: float | None = None, hi: float | None = None) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        _fail(path, f"expected number, got {type(v).__name__}")
    f = float(v)
    if not math.isfinite(f):
        _fail(path, "must be finite")
    if lo is not None and f < lo:
        _fail(path, f"must be >= {lo}")
    if hi is not None and f > hi:
        _fail(path, f"must be <= {hi}")
    return f


def _numlist(v: Any, path: str, n: int) -> list[float]:
    if not isinstance(v, (list, tuple)) or len(v) != n:
        _fail(path, f"expected list of {n} numbers")
    return [_num(x, f"{path}[{i}]") for i, x in enumerate(v)]


def _bool(v: Any, path: str) -> bool:
    if not isinstance(v, bool):
        _fail(path, f"expected boolean, got {type(v).__name__}")
    return v


def _rect(v: Any, path: str) -> Rect:
    vals = _numlist(v, path, 4)
    for i, x in enumerate(vals):
        if not 0.0 <= x <= 1.0:
            _fail(f"{path}[{i}]", "must lie in [0, 1]")
    r = Rect(vals[0], vals[1], vals[2], vals[3])
    if not (r.x_min < r.x_max and r.y_min < r.y_max):
        _fail(path, "min corner must be strictly below max corner")
    return r


def _zone(v: Any, path: str) -> Zone:
    outer = _rect(_need(v, path, "outer"), f"{path}.outer")
    dead = _rect(_need(v, path, "dead"), f"{path}.dead")
    if not (outer.x_min < dead.x_min and dead.x_max < outer.x_max
            and outer.y_min < dead.y_min and dead.y_max < outer.y_max):
        _fail(path, "dead rect must be strictly nested inside outer rect")
    return make_zone(outer, dead)


def _deep_merge(base: dict, over: Mapping) -> dict:
    out = dict(base)
    for k, v in over.items():
        if isinstance(v, Mapping) and isinstance(out.get(k), dict):
            out[k] = _deep_merge(out[k], v)
        else:
            out[k] = v
    return out


def canonical_digest(doc: Any) -> str:
    """sha256 over canonical JSON: sorted keys, no whitespace, repr floats."""
    blob = json.dumps(doc, sort_keys=True, separators=(",", ":"), allow_nan=False)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class Timing:
    physics_dt: float
    cascade_hz: float
    reference_hz: float
    telemetry_hz: float

    @property
    def steps_per_tick(self) -> int:
        return round(1.0 / (self.reference_hz * self.physics_dt))

    @property
    def steps_per_cascade(self) -> int:
        return round(1.0 / (self.cascade_hz * self.physics_dt))

    @property
    def reference_dt(self) -> float:
        return 1.0 / self.reference_hz


@dataclass(frozen=True)
class Config:
    doc: dict
    digest: str
    timing: Timing
    zone1: Zone
    zone2: Zone
    scaling: ScalingFactors
    rescale_continuous: bool
    clamp_outside: bool

    def __getitem__(self, key: str) -> Any:
        return self.doc[key]

    @property
    def vehicle(self) -> dict:
        return self.doc["vehicle"]

    @property
    def control(self) -> dict:
        return self.doc["control"]

    def kernel_params(self) -> array:
        """Flatten physics + control into the shared kernel parameter buffer."""
        p = array("d", [0.0]) * L.P_LEN
        veh, ctl, tim = self.doc["vehicle"], self.doc["control"], self.timing
        p[L.P_MASS] = veh["mass"]
        p[L.P_GRAVITY] = veh["gravity"]
        for i in range(3):
            p[L.P_INERTIA + i] = veh["inertia"][i]
            p[L.P_TORQUE_MAX + i] = ctl["torque_max"][i]
        p[L.P_DRAG] = veh["drag"]
        p[L.P_THRUST_MAX] = veh["thrust_max"]
        p[L.P_THRUST_AUTH] = ctl["thrust_authority"]
        p[L.P_DT] = tim.physics_dt
        rl = ctl["rate_limits"]
        p[L.P_RATE_LIM + 0] = rl["roll"]
        p[L.P_RATE_LIM + 1] = rl["pitch"]
        p[L.P_RATE_LIM + 2] = rl["yaw"]
        p[L.P_RATE_LIM + 3] = rl["climb"]
        for li, name in enumerate(_WINDUP_ORDER):
            g = ctl["gains"][name]
            p[L.P_GAINS + 3 * li + 0] = g[0]
            p[L.P_GAINS + 3 * li + 1] = g[1]
            p[L.P_GAINS + 3 * li + 2] = g[2]
            p[L.P_WINDUP + li] = ctl["windup"][name]
        p[L.P_STEPS_PER_TICK] = tim.steps_per_tick
        p[L.P_STEPS_PER_CASC] = tim.steps_per_cascade
        sc = self.scaling
        p[L.P_SCALE_Z] = sc.s_z
        p[L.P_SCALE_PHI] = sc.s_phi
        p[L.P_SCALE_THETA] = sc.s_theta
        p[L.P_SCALE_PSI] = sc.s_psi
        return p


def default_doc() -> dict:
    text = resources.files("posepilot.data").joinpath("default.yaml").read_text("utf-8")
    return yaml.safe_load(text)


def _validate(doc: dict) -> Config:
    if _need(doc, "", "schema") != 1:
        _fail("schema", f"unsupported value {doc['schema']!r}, expected 1")

    t = _need(doc, "", "timing")
    physics_dt = _num(_need(t, "timing", "physics_dt"), "timing.physics_dt", 1e-5, 0.01)
    cascade_hz = _num(_need(t, "timing", "cascade_hz"), "timing.cascade_hz", 1)
    reference_hz = _num(_need(t, "timing", "reference_hz"), "timing.reference_hz", 1)
    telemetry_hz = _num(_need(t, "timing", "telemetry_hz"), "timing.telemetry_hz", 1)
    timing = Timing(physics_dt, cascade_hz, reference_hz, telemetry_hz)
    for label, hz in (("cascade_hz", cascade_hz), ("reference_hz", reference_hz)):
        period = 1.0 / hz
        steps = round(period / physics_dt)
        if steps < 1 or abs(steps * physics_dt - period) > 1e-9:
            _fail(f"timing.{label}", f"period {period} is not a whole multiple of physics_dt")
    if timing.steps_per_tick % timing.steps_per_cascade != 0:
        _fail("timing.cascade_hz", "cascade period must divide the reference period")

    po = _need(doc, "", "pose")
    window = _need(po, "pose", "filter_window")
    if isinstance(window, bool) or not isinstance(window, int) or window < 1:
        _fail("pose.filter_window", "expected integer >= 1")
    _num(_need(po, "pose", "hold_s"), "pose.hold_s", 0.0)
    _num(_need(po, "pose", "decay_s"), "pose.decay_s", 0.0)
    rows = _need(po, "pose", "rows")
    for key in ("right_hand", "left_hand"):
        idx = _need(rows, "pose.rows", key)
        if isinstance(idx, bool) or not isinstance(idx, int) or not 0 <= idx <= 15:
            _fail(f"pose.rows.{key}", "expected row index 0..15")

    z = _need(doc, "", "zones")
    zone1 = _zone(_need(z, "zones", "zone1"), "zones.zone1")
    zone2 = _zone(_need(z, "zones", "zone2"), "zones.zone2")
    rescale = _bool(_need(z, "zones", "rescale_continuous"), "zones.rescale_continuous")
    clamp = _bool(_need(z, "zones", "clamp_outside"), "zones.clamp_outside")

    s = _need(doc, "", "scaling")
    scaling = ScalingFactors(
        s_z=_num(_need(s, "scaling", "s_z"), "scaling.s_z", 1e-9),
        s_phi=_num(_need(s, "scaling", "s_phi"), "scaling.s_phi", 1e-9),
        s_theta=_num(_need(s, "scaling", "s_theta"), "scaling.s_theta", 1e-9),
        s_psi=_num(_need(s, "scaling", "s_psi"), "scaling.s_psi", 1e-9),
    )

    j = _need(doc, "", "joystick")
    amap = _need(j, "joystick", "axis_map")
    if (not isinstance(amap, list) or len(amap) != 4
            or any(isinstance(a, bool) or not isinstance(a, int) or not 0 <= a <= 3 for a in amap)):
        _fail("joystick.axis_map", "expected 4 axis indices in 0..3")
    inv = _need(j, "joystick", "invert")
    if not isinstance(inv, list) or len(inv) != 4 or any(not isinstance(b, bool) for b in inv):
        _fail("joystick.invert", "expected 4 booleans")

    v = _need(doc, "", "vehicle")
    _num(_need(v, "vehicle", "mass"), "vehicle.mass", 1e-6)
    _num(_need(v, "vehicle", "gravity"), "vehicle.gravity", 0.0)
    inertia = _numlist(_need(v, "vehicle", "inertia"), "vehicle.inertia", 3)
    for i, val in enumerate(inertia):
        if val <= 0:
            _fail(f"vehicle.inertia[{i}]", "must be > 0")
    _num(_need(v, "vehicle", "drag"), "vehicle.drag", 0.0)
    _num(_need(v, "vehicle", "thrust_max"), "vehicle.thrust_max", 0.0)
    _num(_need(v, "vehicle", "collision_radius"), "vehicle.collision_radius", 1e-6)

    c = _need(doc, "", "control")
    gains = _need(c, "control", "gains")
    for name in LOOP_NAMES:
        trip = _numlist(_need(gains, "control.gains", name), f"control.gains.{name}", 3)
        for i, g in enumerate(trip):
            if g < 0:
                _fail(f"control.gains.{name}[{i}]", "gains must be >= 0")
    _numlist(_need(c, "control", "torque_max"), "control.torque_max", 3)
    _num(_need(c, "control", "thrust_authority"), "control.thrust_authority", 0.0)
    rl = _need(c, "control", "rate_limits")
    for key in ("roll", "pitch", "yaw", "climb"):
        _num(_need(rl, "control.rate_limits", key), f"control.rate_limits.{key}", 1e-9)
    wu = _need(c, "control", "windup")
    for name in LOOP_NAMES:
        _num(_need(wu, "control.windup", name), f"control.windup.{name}", 0.0)

    w = _need(doc, "", "world")
    _need(w, "world", "maze")
    mode = _need(w, "world", "collision_mode")
    if mode not in ("advisory", "reset"):
        _fail("world.collision_mode", f"expected 'advisory' or 'reset', got {mode!r}")
    _num(_need(w, "world", "spawn_height"), "world.spawn_height", 0.0)

    se = _need(doc, "", "session")
    modality = _need(se, "session", "modality")
    if modality not in ("pose", "joystick", "trace"):
        _fail("session.modality", f"expected pose|joystick|trace, got {modality!r}")

    gw = _need(doc, "", "gateway")
    _need(gw, "gateway", "host")
    for key in ("tcp_port", "ws_port"):
        port = _need(gw, "gateway", key)
        if isinstance(port, bool) or not isinstance(port, int) or not 0 <= port <= 65535:
            _fail(f"gateway.{key}", "expected port 0..65535")
    _num(_need(gw, "gateway", "max_input_hz"), "gateway.max_input_hz", 1)
    _num(_need(gw, "gateway", "max_frame_bytes"), "gateway.max_frame_bytes", 256)

    return Config(
        doc=doc,
        digest=canonical_digest(doc),
        timing=timing,
        zone1=zone1,
        zone2=zone2,
        scaling=scaling,
        rescale_continuous=rescale,
        clamp_outside=clamp,
    )


def load_config(path: str | None = None) -> Config:
    """Resolve shipped defaults, deep-merge the user file on top, validate."""
    doc = default_doc()
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                user = yaml.safe_load(fh)
        except yaml.YAMLError as e:
            raise ConfigError(f"config: {path}: not valid YAML: {e}") from e
        if user is None:
            user = {}
        if not isinstance(user, dict):
            raise ConfigError(f"config: {path}: top level must be a mapping")
        doc = _deep_merge(doc, user)
    return _validate(doc)


def config_from_doc(doc: dict) -> Config:
    """Validate an already-merged document (used by replay digest checks)."""
    return _validate(json.loads(json.dumps(doc)))
