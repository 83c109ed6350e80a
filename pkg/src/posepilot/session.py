"""Fixed-timestep session loop, run logging, replay, trace execution.

One tick = one reference period. Inside it: consume the freshest input,
derive the reference vector (with the hold-then-decay dropout policy),
advance the vehicle through its cascade/physics sub-steps, update run
bookkeeping, append to the log. Everything is driven by a logical clock,
so identical inputs produce bit-identical logs.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, NamedTuple, Optional

from .config import Config
from .pose import FrameError, KeypointFrame, MissingHandError, PoseFilter, extract_hands, keypoint_frame
from .refgen import (
    ReferenceVector,
    ZERO_REFERENCE,
    hands_in_dead_zones,
    joy_to_reference,
    make_reference,
)
from .vehicle import Vehicle, quat_to_euler
from .world import Maze, RunEvent, RunState, advance_run

LOG_SCHEMA = 1
HEADLESS_EPOCH = "1970-01-01T00:00:00Z"


class TraceError(ValueError):
    """Bad trace file; message cites the offending line."""


class LogError(ValueError):
    """Bad or mismatched run log."""


class Record(NamedTuple):
    tick: int
    r: tuple[float, float, float, float]
    sp: tuple[float, float, float, float]   # phi, theta, psi, z
    pos: tuple[float, float, float]
    vel: tuple[float, float, float]
    quat: tuple[float, float, float, float]
    omega: tuple[float, float, float]


@dataclass(frozen=True)
class TelemetrySnapshot:
    tick: int
    t: float
    position: tuple[float, float, float]
    velocity: tuple[float, float, float]
    orientation: tuple[float, float, float, float]
    angular_rate: tuple[float, float, float]
    setpoints: tuple[float, float, float, float]
    reference: tuple[float, float, float, float]
    events: tuple[RunEvent, ...]
    compass: float        # yaw, rad
    horizon_roll: float
    horizon_pitch: float
    height: float
    speed: float
    mode: str
    armed: bool
    halted: bool
    config_digest: str
    hands: Optional[tuple[tuple[float, float], tuple[float, float]]]
    echo_ts: Optional[float]


@dataclass
class RunLog:
    header: dict
    entries: list = field(default_factory=list)  # ("rec", Record) | ("event", RunEvent)
    truncated: bool = False

    @property
    def records(self) -> list[Record]:
        return [e for k, e in self.entries if k == "rec"]

    @property
    def events(self) -> list[RunEvent]:
        return [e for k, e in self.entries if k == "event"]

    def add_record(self, rec: Record) -> None:
        self.entries.append(("rec", rec))

    def add_event(self, ev: RunEvent) -> None:
        self.entries.append(("event", ev))


def _jdump(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def log_to_jsonl(log: RunLog) -> str:
    lines = [_jdump({"schema": LOG_SCHEMA, "type": "header", **log.header})]
    for kind, e in log.entries:
        if kind == "rec":
            lines.append(_jdump({
                "type": "rec", "tick": e.tick, "r": list(e.r), "sp": list(e.sp),
                "pos": list(e.pos), "vel": list(e.vel), "quat": list(e.quat),
                "omega": list(e.omega),
            }))
        else:
            lines.append(_jdump({"type": "event", "kind": e.kind, "t": e.time,
                                 "pos": list(e.position)}))
    return "\n".join(lines) + "\n"


def log_from_jsonl(text: str) -> RunLog:
    lines = text.splitlines()
    if not lines:
        raise LogError("empty log")
    try:
        head = json.loads(lines[0])
    except json.JSONDecodeError as e:
        raise LogError(f"line 1: not valid JSON: {e}") from e
    if head.get("type") != "header" or head.get("schema") != LOG_SCHEMA:
        raise LogError("line 1: missing or unsupported header")
    header = {k: v for k, v in head.items() if k not in ("type", "schema")}
    log = RunLog(header=header)
    last_tick = -1
    for ln, raw in enumerate(lines[1:], start=2):
        if not raw.strip():
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError:
            log.truncated = True  # partial tail write; keep the valid prefix
            break
        t = row.get("type")
        if t == "rec":
            rec = Record(
                tick=row["tick"], r=tuple(row["r"]), sp=tuple(row["sp"]),
                pos=tuple(row["pos"]), vel=tuple(row["vel"]),
                quat=tuple(row["quat"]), omega=tuple(row["omega"]),
            )
            if rec.tick <= last_tick:
                raise LogError(f"line {ln}: tick {rec.tick} not increasing")
            last_tick = rec.tick
            log.add_record(rec)
        elif t == "event":
            log.add_event(RunEvent(row["kind"], row["t"], tuple(row["pos"])))
        else:
            raise LogError(f"line {ln}: unknown entry type {t!r}")
    return log


_TABLE_COLS = ("tick r1 r2 r3 r4 phi theta psi z px py pz vx vy vz "
               "qw qx qy qz wx wy wz").split()


def log_to_table(log: RunLog) -> str:
    """Tab-separated export with header/event rows as '#' comment lines."""
    lines = ["# header\t" + _jdump({"schema": LOG_SCHEMA, **log.header}),
             "# columns\t" + "\t".join(_TABLE_COLS)]
    for kind, e in log.entries:
        if kind == "rec":
            vals = [str(e.tick)] + [repr(v) for v in (*e.r, *e.sp, *e.pos, *e.vel, *e.quat, *e.omega)]
            lines.append("\t".join(vals))
        else:
            lines.append("# event\t" + _jdump({"kind": e.kind, "t": e.time, "pos": list(e.position)}))
    return "\n".join(lines) + "\n"


def log_from_table(text: str) -> RunLog:
    log: RunLog | None = None
    for ln, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip():
            continue
        if raw.startswith("# header\t"):
            head = json.loads(raw.split("\t", 1)[1])
            if head.get("schema") != LOG_SCHEMA:
                raise LogError(f"line {ln}: unsupported schema")
            log = RunLog(header={k: v for k, v in head.items() if k != "schema"})
        elif raw.startswith("# columns\t"):
            continue
        elif raw.startswith("# event\t"):
            if log is None:
                raise LogError(f"line {ln}: event before header")
            row = json.loads(raw.split("\t", 1)[1])
            log.add_event(RunEvent(row["kind"], row["t"], tuple(row["pos"])))
        elif raw.startswith("#"):
            continue
        else:
            if log is None:
                raise LogError(f"line {ln}: data before header")
            parts = raw.split("\t")
            if len(parts) != len(_TABLE_COLS):
                raise LogError(f"line {ln}: expected {len(_TABLE_COLS)} columns, got {len(parts)}")
            tick = int(parts[0])
            v = [float(x) for x in parts[1:]]
            log.add_record(Record(tick=tick, r=tuple(v[0:4]), sp=tuple(v[4:8]),
                                  pos=tuple(v[8:11]), vel=tuple(v[11:14]),
                                  quat=tuple(v[14:18]), omega=tuple(v[18:21])))
    if log is None:
        raise LogError("no header row")
    return log


class Session:
    """Single-owner state machine; all mutation happens inside tick()."""

    def __init__(self, config: Config, maze: Maze, modality: str | None = None,
                 backend: str | None = None, label: str = "",
                 started: str = HEADLESS_EPOCH):
        self.config = config
        self.maze = maze
        self.modality = modality or config.doc["session"]["modality"]
        if self.modality == "trace":
            self.modality = "joystick"  # trace files carry their own input kinds
        self.vehicle = Vehicle(config, backend)
        self.filter = PoseFilter(config.doc["pose"]["filter_window"])
        self.radius = float(config.vehicle["collision_radius"])
        self.spawn = (maze.spawn_position[0], maze.spawn_position[1],
                      float(config.doc["world"]["spawn_height"]))
        self.reset_on_collision = config.doc["world"]["collision_mode"] == "reset"
        self._axis_map = tuple(config.doc["joystick"]["axis_map"])
        self._invert = tuple(config.doc["joystick"]["invert"])
        self._rows = config.doc["pose"]["rows"]
        self._hold_s = float(config.doc["pose"]["hold_s"])
        self._decay_s = float(config.doc["pose"]["decay_s"])
        self._dt = config.timing.reference_dt

        self.vehicle.set_pose(self.spawn, maze.spawn_yaw)
        self.run = RunState()
        self.armed = self.modality != "pose"  # the latch is a pose-mode concept
        self.paused = False
        self.tick_count = 0
        self.tlx_records: list[dict] = []
        self.log = RunLog(header={
            "config_digest": config.digest,
            "modality": self.modality,
            "maze": maze.name,
            "started": started,
            "label": label,
        })
        self._mailbox: dict[str, Any] = {}
        self._held_r = ZERO_REFERENCE
        self._age_s = math.inf
        self._hands: Optional[tuple[tuple[float, float], tuple[float, float]]] = None
        self._echo_ts: Optional[float] = None
        self._last_snapshot: Optional[TelemetrySnapshot] = None

    # -- input side (gateway / trace feeder) --------------------------------

    def offer_keypoints(self, frame: KeypointFrame, ts: float | None = None) -> None:
        self._mailbox["keypoints"] = frame
        if ts is not None:
            self._echo_ts = ts

    def offer_axes(self, axes, ts: float | None = None) -> None:
        self._mailbox["joy_axes"] = tuple(float(a) for a in axes)
        if ts is not None:
            self._echo_ts = ts

    def offer_mode(self, modality: str) -> None:
        self._mailbox["set_mode"] = modality

    def control(self, action: str) -> None:
        if action in ("start", "reset"):
            self.reset()
        elif action == "pause":
            self.paused = True
        elif action == "resume":
            self.paused = False
        else:
            raise ValueError(f"unknown run control action {action!r}")

    def submit_tlx(self, record: dict) -> None:
        self.tlx_records.append(record)

    def reset(self) -> None:
        """Back to spawn, fresh run, disarmed; the log keeps accumulating."""
        self.vehicle.set_pose(self.spawn, self.maze.spawn_yaw)
        self.run = RunState()
        self.armed = self.modality != "pose"
        self.filter.reset()
        self._held_r = ZERO_REFERENCE
        self._age_s = math.inf
        self._hands = None
        if self.tick_count > 0:
            t = self.tick_count * self._dt
            self.log.add_event(RunEvent("reset", t, self.vehicle.state.position))

    # -- the loop -----------------------------------------------------------

    def _consume_input(self) -> None:
        mode = self._mailbox.pop("set_mode", None)
        if mode is not None and mode != self.modality:
            self.modality = mode
            self.armed = mode != "pose"
            self._held_r = ZERO_REFERENCE
            self._age_s = math.inf
            self._hands = None
        fresh = False
        if self.modality == "pose":
            frame = self._mailbox.pop("keypoints", None)
            self._mailbox.pop("joy_axes", None)
            if frame is not None:
                pose = self.filter.push_frame(frame)
                try:
                    hands = extract_hands(pose, self._rows["left_hand"], self._rows["right_hand"])
                except MissingHandError:
                    self._hands = None
                else:
                    self._hands = (hands.left, hands.right)
                    if not self.armed and hands_in_dead_zones(hands, self.config.zone1, self.config.zone2):
                        self.armed = True
                    self._held_r = make_reference(
                        hands, self.config.zone1, self.config.zone2, armed=self.armed,
                        rescale_continuous=self.config.rescale_continuous,
                        clamp_outside=self.config.clamp_outside)
                    fresh = True
        else:
            axes = self._mailbox.pop("joy_axes", None)
            self._mailbox.pop("keypoints", None)
            if axes is not None:
                self._held_r = joy_to_reference(axes, self._axis_map, self._invert)
                fresh = True
        if fresh:
            self._age_s = 0.0
        else:
            self._age_s += self._dt

    def _effective_reference(self) -> ReferenceVector:
        if self._age_s <= self._hold_s:
            return self._held_r
        over = self._age_s - self._hold_s
        if over < self._decay_s:
            k = 1.0 - over / self._decay_s
            return ReferenceVector(self._held_r.r1 * k, self._held_r.r2 * k,
                                   self._held_r.r3 * k, self._held_r.r4 * k)
        return ZERO_REFERENCE

    def tick(self) -> TelemetrySnapshot:
        if self.paused or self.vehicle.faulted:
            snap = self._last_snapshot or self._snapshot((), self.tick_count * self._dt,
                                                         ZERO_REFERENCE)
            return snap
        self._consume_input()
        r = self._effective_reference()
        self.vehicle.reference_tick(r)
        self.tick_count += 1
        t = self.tick_count * self._dt

        events: list[RunEvent] = []
        if not self.vehicle.faulted:
            st = self.vehicle.state
            events = advance_run(self.run, self.maze, st.position, t, self.radius)
            reset_now = self.reset_on_collision and any(e.kind == "collision" for e in events)
            sp = self.vehicle.setpoints
            self.log.add_record(Record(
                tick=self.tick_count, r=tuple(r),
                sp=(sp.phi, sp.theta, sp.psi, sp.z),
                pos=st.position, vel=st.velocity,
                quat=st.orientation, omega=st.angular_rate,
            ))
            for e in events:
                self.log.add_event(e)
            if reset_now:
                self.reset()
        snap = self._snapshot(tuple(events), t, r)
        self._last_snapshot = snap
        return snap

    def _snapshot(self, events: tuple[RunEvent, ...], t: float,
                  r: ReferenceVector) -> TelemetrySnapshot:
        st = self.vehicle.state
        sp = self.vehicle.setpoints
        roll, pitch, yaw = quat_to_euler(st.orientation)
        vx, vy, vz = st.velocity
        return TelemetrySnapshot(
            tick=self.tick_count,
            t=t,
            position=st.position,
            velocity=st.velocity,
            orientation=st.orientation,
            angular_rate=st.angular_rate,
            setpoints=(sp.phi, sp.theta, sp.psi, sp.z),
            reference=tuple(r),
            events=events,
            compass=yaw,
            horizon_roll=roll,
            horizon_pitch=pitch,
            height=st.position[2],
            speed=math.sqrt(vx * vx + vy * vy + vz * vz),
            mode=self.modality,
            armed=self.armed,
            halted=self.vehicle.faulted,
            config_digest=self.config.digest,
            hands=self._hands,
            echo_ts=self._echo_ts,
        )

    def run_ticks(self, n: int) -> None:
        for _ in range(n):
            self.tick()

    def run_seconds(self, seconds: float) -> None:
        self.run_ticks(round(seconds * self.config.timing.reference_hz))


# --- trace files ------------------------------------------------------------

class TraceMessage(NamedTuple):
    ts: float
    kind: str     # keypoints | joy_axes | set_mode | run_control
    payload: Any


def parse_trace(text: str) -> list[TraceMessage]:
    """Line-delimited JSON, same payload schemas as the wire messages."""
    out: list[TraceMessage] = []
    last_ts = -math.inf
    for ln, raw in enumerate(text.splitlines(), start=1):
        if not raw.strip() or raw.lstrip().startswith("#"):
            continue
        try:
            row = json.loads(raw)
        except json.JSONDecodeError as e:
            raise TraceError(f"trace line {ln}: not valid JSON: {e.msg}") from e
        if not isinstance(row, dict):
            raise TraceError(f"trace line {ln}: expected an object")
        kind = row.get("kind")
        ts = row.get("ts", 0.0)
        if not isinstance(ts, (int, float)) or not math.isfinite(float(ts)):
            raise TraceError(f"trace line {ln}: bad ts")
        ts = float(ts)
        if ts < last_ts:
            raise TraceError(f"trace line {ln}: ts {ts} decreases")
        last_ts = ts
        if kind == "joy_axes":
            axes = row.get("axes")
            if not isinstance(axes, list) or len(axes) != 4 \
                    or any(not isinstance(a, (int, float)) for a in axes):
                raise TraceError(f"trace line {ln}: joy_axes needs 4 numeric axes")
            out.append(TraceMessage(ts, "joy_axes", tuple(float(a) for a in axes)))
        elif kind == "keypoints":
            try:
                frame = keypoint_frame(row.get("points", []), row.get("valid"), ts)
            except FrameError as e:
                raise TraceError(f"trace line {ln}: {e}") from e
            out.append(TraceMessage(ts, "keypoints", frame))
        elif kind == "set_mode":
            m = row.get("modality")
            if m not in ("pose", "joystick"):
                raise TraceError(f"trace line {ln}: set_mode modality must be pose|joystick")
            out.append(TraceMessage(ts, "set_mode", m))
        elif kind == "run_control":
            a = row.get("action")
            if a not in ("start", "reset", "pause", "resume"):
                raise TraceError(f"trace line {ln}: bad run_control action {a!r}")
            out.append(TraceMessage(ts, "run_control", a))
        else:
            raise TraceError(f"trace line {ln}: unknown kind {kind!r}")
    return out


def run_trace(session: Session, trace: list[TraceMessage],
              duration: float | None = None) -> RunLog:
    """Deterministic headless execution: a message lands in the mailbox when
    sim time reaches its timestamp, then the tick consumes it latest-wins."""
    dt = session.config.timing.reference_dt
    end = duration if duration is not None else (trace[-1].ts + dt if trace else 0.0)
    n_ticks = max(0, round(end / dt))
    i = 0
    for k in range(n_ticks):
        now = k * dt  # inputs arriving before this tick runs
        while i < len(trace) and trace[i].ts <= now:
            msg = trace[i]
            if msg.kind == "joy_axes":
                session.offer_axes(msg.payload, ts=msg.ts)
            elif msg.kind == "keypoints":
                session.offer_keypoints(msg.payload, ts=msg.ts)
            elif msg.kind == "set_mode":
                session.offer_mode(msg.payload)
            elif msg.kind == "run_control":
                session.control(msg.payload)
            i += 1
        session.tick()
    return session.log


def replay(log: RunLog, config: Config, maze: Maze,
           backend: str | None = None) -> list[Record]:
    """Re-simulate from the recorded reference sequence.

    The header digest must match the supplied config; the produced odometry
    is bit-identical to the recording on the same platform.
    """
    if log.header.get("config_digest") != config.digest:
        raise LogError("config digest mismatch: log was recorded with a different configuration")
    if log.header.get("maze") != maze.name:
        raise LogError(f"log was recorded on maze {log.header.get('maze')!r}, not {maze.name!r}")
    vehicle = Vehicle(config, backend)
    spawn = (maze.spawn_position[0], maze.spawn_position[1],
             float(config.doc["world"]["spawn_height"]))
    vehicle.set_pose(spawn, maze.spawn_yaw)
    out: list[Record] = []
    for kind, e in log.entries:
        if kind == "event":
            if e.kind == "reset":
                vehicle.set_pose(spawn, maze.spawn_yaw)
            continue
        vehicle.reference_tick(ReferenceVector(*e.r))
        st = vehicle.state
        sp = vehicle.setpoints
        out.append(Record(tick=e.tick, r=e.r, sp=(sp.phi, sp.theta, sp.psi, sp.z),
                          pos=st.position, vel=st.velocity, quat=st.orientation,
                          omega=st.angular_rate))
    return out
