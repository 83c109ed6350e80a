"""Keypoint frame ingestion, moving-average smoothing, hand extraction."""

from __future__ import annotations

from collections import deque
from typing import NamedTuple, Sequence

N_ROWS = 16
ROW_RIGHT_HAND = 10
ROW_LEFT_HAND = 15


class FrameError(ValueError):
    """Rejected keypoint frame; the filter state is left untouched."""


class MissingHandError(ValueError):
    """A required hand row is invalid in the filtered pose."""


class KeypointFrame(NamedTuple):
    points: tuple[tuple[float, float], ...]  # 16 rows, normalized image coords
    valid: tuple[bool, ...]
    ts: float


class FilteredPose(NamedTuple):
    points: tuple[tuple[float, float], ...]
    valid: tuple[bool, ...]  # row usable: valid in at least one window frame
    window_fill: int


class HandPair(NamedTuple):
    left: tuple[float, float]
    right: tuple[float, float]


def keypoint_frame(points: Sequence[Sequence[float]], valid: Sequence[bool] | None = None,
                   ts: float = 0.0) -> KeypointFrame:
    """Validate and freeze one raw frame. Coordinates of valid rows must be in [0,1]."""
    if len(points) != N_ROWS:
        raise FrameError(f"expected {N_ROWS} keypoint rows, got {len(points)}")
    if valid is None:
        valid = [True] * N_ROWS
    if len(valid) != N_ROWS:
        raise FrameError(f"expected {N_ROWS} validity flags, got {len(valid)}")
    rows = []
    for i, row in enumerate(points):
        if len(row) != 2:
            raise FrameError(f"row {i}: expected 2 coordinates, got {len(row)}")
        x, y = float(row[0]), float(row[1])
        if valid[i] and not (0.0 <= x <= 1.0 and 0.0 <= y <= 1.0):
            raise FrameError(f"row {i}: coordinate ({x}, {y}) outside [0, 1]")
        rows.append((x, y))
    return KeypointFrame(points=tuple(rows), valid=tuple(bool(v) for v in valid), ts=float(ts))


class PoseFilter:
    """Per-coordinate moving average over the last n frames.

    Until the window fills, the mean runs over the frames seen so far. A row's
    average only includes frames where that row was valid; a row valid in no
    window frame comes out invalid.
    """

    def __init__(self, window: int = 5):
        if window < 1:
            raise ValueError("window must be >= 1")
        self.window = window
        self._frames: deque[KeypointFrame] = deque(maxlen=window)

    def reset(self) -> None:
        self._frames.clear()

    def push_frame(self, frame: KeypointFrame) -> FilteredPose:
        if not isinstance(frame, KeypointFrame):
            frame = keypoint_frame(*frame)
        self._frames.append(frame)
        pts = []
        flags = []
        for row in range(N_ROWS):
            sx = sy = 0.0
            k = 0
            for f in self._frames:
                if f.valid[row]:
                    sx += f.points[row][0]
                    sy += f.points[row][1]
                    k += 1
            if k:
                pts.append((sx / k, sy / k))
                flags.append(True)
            else:
                pts.append((0.0, 0.0))
                flags.append(False)
        return FilteredPose(points=tuple(pts), valid=tuple(flags), window_fill=len(self._frames))


def extract_hands(pose: FilteredPose, left_row: int = ROW_LEFT_HAND,
                  right_row: int = ROW_RIGHT_HAND) -> HandPair:
    if not pose.valid[right_row]:
        raise MissingHandError(f"right hand row {right_row} invalid")
    if not pose.valid[left_row]:
        raise MissingHandError(f"left hand row {left_row} invalid")
    return HandPair(left=pose.points[left_row], right=pose.points[right_row])
