"""Pose-driven quadrotor teleoperation workbench.

Pose keypoints or joystick axes in, simulated quadrotor flight out, with a
deterministic headless mode, a live gateway for cockpit clients, and the
analysis tooling for comparing the two input modalities.
"""

from .config import Config, ConfigError, canonical_digest, config_from_doc, default_doc, load_config
from .metrics import MetricsError, ParticipantRecord, RunSummary, TlxRecord, rtlx
from .pose import KeypointFrame, MissingHandError, PoseFilter, extract_hands, keypoint_frame
from .refgen import (
    ReferenceVector,
    Setpoints,
    ZERO_REFERENCE,
    integrate_setpoints,
    joy_to_reference,
    make_reference,
    map_axis,
)
from .session import (
    Record,
    RunLog,
    Session,
    TelemetrySnapshot,
    TraceError,
    log_from_jsonl,
    log_to_jsonl,
    parse_trace,
    replay,
    run_trace,
)
from .vehicle import BodyCommand, PhysicalParams, Vehicle, VehicleFault, VehicleState
from .world import Maze, MazeError, check_collision, load_maze, load_maze_file

__version__ = "0.1.0"

__all__ = [
    "BodyCommand",
    "Config",
    "ConfigError",
    "KeypointFrame",
    "Maze",
    "MazeError",
    "MetricsError",
    "MissingHandError",
    "ParticipantRecord",
    "PhysicalParams",
    "PoseFilter",
    "Record",
    "ReferenceVector",
    "RunLog",
    "RunSummary",
    "Session",
    "Setpoints",
    "TelemetrySnapshot",
    "TlxRecord",
    "TraceError",
    "Vehicle",
    "VehicleFault",
    "VehicleState",
    "ZERO_REFERENCE",
    "canonical_digest",
    "check_collision",
    "config_from_doc",
    "default_doc",
    "extract_hands",
    "integrate_setpoints",
    "joy_to_reference",
    "keypoint_frame",
    "load_config",
    "load_maze",
    "load_maze_file",
    "log_from_jsonl",
    "log_to_jsonl",
    "map_axis",
    "parse_trace",
    "replay",
    "rtlx",
    "run_trace",
    "__version__",
]
