"""Wire protocol: length-prefixed JSON frames, the same payloads over WebSocket.

Every message is a JSON object with "v" (schema version) and "kind". The TCP
transport prefixes each payload with a 4-byte big-endian length; WebSocket
text messages carry the identical JSON. Full field reference lives in
docs/protocol.md, which this module implements normatively.
"""

from __future__ import annotations

import json
import math
import struct
from dataclasses import dataclass
from typing import Any, Optional

from .pose import KeypointFrame, keypoint_frame, FrameError
from .session import TelemetrySnapshot

PROTOCOL_VERSION = 1
MAX_FRAME_BYTES = 65536
_LEN = struct.Struct(">I")

INBOUND_KINDS = ("hello", "keypoints", "joy_axes", "set_mode", "run_control", "tlx_submit")
DATA_PLANE = ("keypoints", "joy_axes", "set_mode")     # latest-wins per kind
CONTROL_PLANE = ("run_control", "tlx_submit")          # lossless, ordered


class ProtocolError(ValueError):
    """Decode/validation failure with a stable machine-readable code."""

    def __init__(self, code: str, detail: str):
        super().__init__(f"{code}: {detail}")
        self.code = code
        self.detail = detail


@dataclass(frozen=True)
class Hello:
    client: str
    token: Optional[str] = None
    ts: Optional[float] = None
    kind: str = "hello"


@dataclass(frozen=True)
class Keypoints:
    frame: KeypointFrame
    ts: Optional[float] = None
    kind: str = "keypoints"


@dataclass(frozen=True)
class JoyAxes:
    axes: tuple[float, float, float, float]
    ts: Optional[float] = None
    kind: str = "joy_axes"


@dataclass(frozen=True)
class SetMode:
    modality: str
    ts: Optional[float] = None
    kind: str = "set_mode"


@dataclass(frozen=True)
class RunControl:
    action: str
    ts: Optional[float] = None
    kind: str = "run_control"


@dataclass(frozen=True)
class TlxSubmit:
    participant: str
    modality: str
    ratings: dict[str, float]
    ts: Optional[float] = None
    kind: str = "tlx_submit"


InboundMessage = Hello | Keypoints | JoyAxes | SetMode | RunControl | TlxSubmit

_TLX_KEYS = ("mental", "physical", "temporal", "performance", "effort", "frustration")


def _ts_of(obj: dict) -> Optional[float]:
    ts = obj.get("ts")
    if ts is None:
        return None
    if not isinstance(ts, (int, float)) or isinstance(ts, bool) or not math.isfinite(float(ts)):
        raise ProtocolError("bad_payload", "ts must be a finite number")
    return float(ts)


def parse_message(obj: Any) -> InboundMessage:
    """Validate one decoded JSON object into a typed inbound message."""
    if not isinstance(obj, dict):
        raise ProtocolError("bad_payload", "message must be a JSON object")
    v = obj.get("v")
    if v != PROTOCOL_VERSION:
        raise ProtocolError("bad_version", f"unsupported protocol version {v!r}")
    kind = obj.get("kind")
    if kind not in INBOUND_KINDS:
        raise ProtocolError("unknown_kind", f"unknown message kind {kind!r}")
    ts = _ts_of(obj)

    if kind == "hello":
        client = obj.get("client", "")
        if not isinstance(client, str):
            raise ProtocolError("bad_payload", "hello.client must be a string")
        token = obj.get("token")
        if token is not None and not isinstance(token, str):
            raise ProtocolError("bad_payload", "hello.token must be a string or null")
        return Hello(client=client, token=token, ts=ts)

    if kind == "keypoints":
        points = obj.get("points")
        if not isinstance(points, list):
            raise ProtocolError("bad_payload", "keypoints.points must be a list")
        valid = obj.get("valid")
        if valid is not None and (not isinstance(valid, list) or
                                  any(not isinstance(b, bool) for b in valid)):
            raise ProtocolError("bad_payload", "keypoints.valid must be a list of booleans")
        for i, row in enumerate(points):
            if not isinstance(row, list) or len(row) != 2 or \
                    any(isinstance(c, bool) or not isinstance(c, (int, float)) for c in row):
                raise ProtocolError("bad_payload", f"keypoints.points[{i}] must be [x, y]")
        try:
            frame = keypoint_frame(points, valid, ts or 0.0)
        except FrameError as e:
            msg = str(e)
            code = "range" if "outside" in msg else "bad_payload"
            raise ProtocolError(code, msg) from e
        return Keypoints(frame=frame, ts=ts)

    if kind == "joy_axes":
        axes = obj.get("axes")
        if not isinstance(axes, list) or len(axes) != 4:
            raise ProtocolError("axis_count", f"joy_axes needs exactly 4 axes, got "
                                              f"{len(axes) if isinstance(axes, list) else type(axes).__name__}")
        vals = []
        for i, a in enumerate(axes):
            if isinstance(a, bool) or not isinstance(a, (int, float)) or not math.isfinite(float(a)):
                raise ProtocolError("bad_payload", f"axes[{i}] must be a finite number")
            vals.append(float(a))
        return JoyAxes(axes=tuple(vals), ts=ts)

    if kind == "set_mode":
        m = obj.get("modality")
        if m not in ("pose", "joystick"):
            raise ProtocolError("bad_payload", f"set_mode.modality must be pose|joystick, got {m!r}")
        return SetMode(modality=m, ts=ts)

    if kind == "run_control":
        a = obj.get("action")
        if a not in ("start", "reset", "pause", "resume"):
            raise ProtocolError("bad_payload", f"run_control.action must be start|reset|pause|resume, got {a!r}")
        return RunControl(action=a, ts=ts)

    # tlx_submit
    part = obj.get("participant")
    if not isinstance(part, str) or not part:
        raise ProtocolError("bad_payload", "tlx_submit.participant must be a non-empty string")
    modality = obj.get("modality")
    if modality not in ("pose", "joystick"):
        raise ProtocolError("bad_payload", f"tlx_submit.modality must be pose|joystick, got {modality!r}")
    ratings = obj.get("ratings")
    if not isinstance(ratings, dict):
        raise ProtocolError("bad_payload", "tlx_submit.ratings must be an object")
    clean = {}
    for key in _TLX_KEYS:
        val = ratings.get(key)
        if isinstance(val, bool) or not isinstance(val, (int, float)):
            raise ProtocolError("bad_payload", f"tlx_submit.ratings.{key} missing or not a number")
        f = float(val)
        if not 0.0 <= f <= 20.0:
            raise ProtocolError("range", f"tlx_submit.ratings.{key} = {f} outside [0, 20]")
        clean[key] = f
    return TlxSubmit(participant=part, modality=modality, ratings=clean, ts=ts)


def message_to_obj(msg: InboundMessage) -> dict:
    """Inverse of parse_message, for clients and round-trip tests."""
    base: dict[str, Any] = {"v": PROTOCOL_VERSION, "kind": msg.kind}
    if msg.ts is not None:
        base["ts"] = msg.ts
    if isinstance(msg, Hello):
        base["client"] = msg.client
        if msg.token is not None:
            base["token"] = msg.token
    elif isinstance(msg, Keypoints):
        base["points"] = [list(p) for p in msg.frame.points]
        base["valid"] = list(msg.frame.valid)
    elif isinstance(msg, JoyAxes):
        base["axes"] = list(msg.axes)
    elif isinstance(msg, SetMode):
        base["modality"] = msg.modality
    elif isinstance(msg, RunControl):
        base["action"] = msg.action
    elif isinstance(msg, TlxSubmit):
        base["participant"] = msg.participant
        base["modality"] = msg.modality
        base["ratings"] = dict(msg.ratings)
    return base


def snapshot_to_obj(snap: TelemetrySnapshot) -> dict:
    return {
        "v": PROTOCOL_VERSION,
        "kind": "telemetry",
        "tick": snap.tick,
        "t": snap.t,
        "pos": list(snap.position),
        "vel": list(snap.velocity),
        "quat": list(snap.orientation),
        "omega": list(snap.angular_rate),
        "setpoints": list(snap.setpoints),
        "ref": list(snap.reference),
        "events": [{"kind": e.kind, "t": e.time, "pos": list(e.position)} for e in snap.events],
        "hud": {
            "compass": snap.compass,
            "horizon_roll": snap.horizon_roll,
            "horizon_pitch": snap.horizon_pitch,
            "height": snap.height,
            "speed": snap.speed,
        },
        "mode": snap.mode,
        "armed": snap.armed,
        "halted": snap.halted,
        "config_digest": snap.config_digest,
        "hands": [list(h) for h in snap.hands] if snap.hands is not None else None,
        "echo_ts": snap.echo_ts,
    }


def obj_to_snapshot(obj: dict) -> TelemetrySnapshot:
    from .world import RunEvent
    hud = obj["hud"]
    return TelemetrySnapshot(
        tick=obj["tick"], t=obj["t"],
        position=tuple(obj["pos"]), velocity=tuple(obj["vel"]),
        orientation=tuple(obj["quat"]), angular_rate=tuple(obj["omega"]),
        setpoints=tuple(obj["setpoints"]), reference=tuple(obj["ref"]),
        events=tuple(RunEvent(e["kind"], e["t"], tuple(e["pos"])) for e in obj["events"]),
        compass=hud["compass"], horizon_roll=hud["horizon_roll"],
        horizon_pitch=hud["horizon_pitch"], height=hud["height"], speed=hud["speed"],
        mode=obj["mode"], armed=obj["armed"], halted=obj["halted"],
        config_digest=obj["config_digest"],
        hands=tuple(tuple(h) for h in obj["hands"]) if obj.get("hands") is not None else None,
        echo_ts=obj.get("echo_ts"),
    )


def error_obj(code: str, detail: str) -> dict:
    return {"v": PROTOCOL_VERSION, "kind": "error", "code": code, "detail": detail}


# --- framing ----------------------------------------------------------------

def encode_payload(obj: dict) -> bytes:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False).encode("utf-8")


def decode_payload(data: bytes) -> dict:
    try:
        obj = json.loads(data.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as e:
        raise ProtocolError("bad_json", f"payload is not valid JSON: {e}") from e
    if not isinstance(obj, dict):
        raise ProtocolError("bad_payload", "payload must be a JSON object")
    return obj


def frame_bytes(payload: bytes) -> bytes:
    return _LEN.pack(len(payload)) + payload


def encode_frame(obj: dict) -> bytes:
    payload = encode_payload(obj)
    if len(payload) > MAX_FRAME_BYTES:
        raise ProtocolError("too_large", f"frame of {len(payload)} bytes exceeds {MAX_FRAME_BYTES}")
    return frame_bytes(payload)


class FrameSplitter:
    """Incremental length-prefix splitter for the TCP byte stream."""

    def __init__(self, limit: int = MAX_FRAME_BYTES):
        self._buf = bytearray()
        self._limit = limit

    def feed(self, data: bytes) -> list[bytes]:
        self._buf.extend(data)
        out = []
        while True:
            if len(self._buf) < 4:
                return out
            (n,) = _LEN.unpack_from(self._buf)
            if n > self._limit:
                raise ProtocolError("too_large", f"frame of {n} bytes exceeds {self._limit}")
            if len(self._buf) < 4 + n:
                return out
            out.append(bytes(self._buf[4:4 + n]))
            del self._buf[:4 + n]


async def read_frame(reader, limit: int = MAX_FRAME_BYTES) -> bytes | None:
    """Read one frame from an asyncio StreamReader; None on EOF/disconnect."""
    try:
        head = await reader.readexactly(4)
    except (EOFError, ConnectionError, OSError):
        return None
    (n,) = _LEN.unpack(head)
    if n > limit:
        raise ProtocolError("too_large", f"frame of {n} bytes exceeds {limit}")
    try:
        return await reader.readexactly(n)
    except (EOFError, ConnectionError, OSError):
        return None
