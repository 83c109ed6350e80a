"""Maze environment: ASCII map loading, wall collision, traversal events.

Map grammar (documented in docs/maze_format.md): `key=value` header lines,
then the grid. Grid characters: '#' wall, '.' free, 'S' start gate, 'F'
finish gate. Row 0 of the text is the far (+y) edge so maps read the way
they fly; x grows with columns, z is up, the floor is z=0.
"""

from __future__ import annotations

from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Optional

WALL, FREE, START, FINISH = "#", ".", "S", "F"
_GRID_CHARS = frozenset(WALL + FREE + START + FINISH)

_HEADERS = {
    "cell_size": (1e-3, None),
    "wall_height": (1e-3, None),
    "spawn_yaw": (None, None),
}
_REQUIRED_HEADERS = ("cell_size", "wall_height")


class MazeError(ValueError):
    """Malformed map document; message carries line (and column) numbers."""


@dataclass(frozen=True)
class GateRect:
    x_min: float
    y_min: float
    x_max: float
    y_max: float

    def contains(self, x: float, y: float) -> bool:
        return self.x_min <= x <= self.x_max and self.y_min <= y <= self.y_max


@dataclass(frozen=True)
class Maze:
    name: str
    cell_size: float
    wall_height: float
    rows: int
    cols: int
    grid: tuple[str, ...]           # row 0 = top text line = largest y
    start_gate: GateRect
    finish_gate: GateRect
    spawn_position: tuple[float, float]
    spawn_yaw: float
    wall_boxes: tuple[tuple[float, float, float, float, float, float], ...]

    def cell_origin(self, row: int, col: int) -> tuple[float, float]:
        # world y of a grid row counts up from the bottom text line
        return col * self.cell_size, (self.rows - 1 - row) * self.cell_size


def load_maze(text: str, name: str = "maze") -> Maze:
    headers: dict[str, float] = {}
    grid_lines: list[tuple[int, str]] = []  # (1-based line number, content)
    in_grid = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\n")
        if not in_grid:
            if not line.strip():
                continue
            if "=" in line:
                key, _, val = line.partition("=")
                key = key.strip()
                if key not in _HEADERS:
                    raise MazeError(f"line {lineno}: unknown header {key!r}")
                try:
                    num = float(val.strip())
                except ValueError:
                    raise MazeError(f"line {lineno}: header {key} needs a number, got {val.strip()!r}") from None
                lo, hi = _HEADERS[key]
                if lo is not None and num < lo:
                    raise MazeError(f"line {lineno}: header {key} must be >= {lo}")
                headers[key] = num
                continue
            in_grid = True
        if not line.strip():
            continue
        for col, ch in enumerate(line, start=1):
            if ch not in _GRID_CHARS:
                raise MazeError(f"line {lineno}, column {col}: invalid character {ch!r}")
        grid_lines.append((lineno, line))

    for key in _REQUIRED_HEADERS:
        if key not in headers:
            raise MazeError(f"missing required header {key}=")
    if not grid_lines:
        raise MazeError("map has no grid rows")

    width = len(grid_lines[0][1])
    for lineno, line in grid_lines:
        if len(line) != width:
            raise MazeError(f"line {lineno}: ragged row, expected width {width}, got {len(line)}")

    rows = len(grid_lines)
    cell = headers["cell_size"]
    height = headers["wall_height"]
    grid = tuple(line for _, line in grid_lines)

    starts, finishes, walls = [], [], []
    for r, (lineno, line) in enumerate(grid_lines):
        for c, ch in enumerate(line):
            if ch == START:
                starts.append((r, c))
            elif ch == FINISH:
                finishes.append((r, c))
            elif ch == WALL:
                walls.append((r, c))
    if not starts:
        raise MazeError("map has no 'S' start marker")
    free_cells = rows * width - len(walls)
    if not finishes:
        # degenerate maps where every free cell is a start cell finish where they begin
        if free_cells == len(starts):
            finishes = starts
        else:
            raise MazeError("map has no 'F' finish marker")

    def rect_of(cells: list[tuple[int, int]]) -> GateRect:
        x0 = min(c for _, c in cells) * cell
        x1 = (max(c for _, c in cells) + 1) * cell
        y0 = (rows - 1 - max(r for r, _ in cells)) * cell
        y1 = (rows - min(r for r, _ in cells)) * cell
        return GateRect(x0, y0, x1, y1)

    start_gate = rect_of(starts)
    finish_gate = rect_of(finishes)

    boxes = []
    for r, c in walls:
        x0 = c * cell
        y0 = (rows - 1 - r) * cell
        boxes.append((x0, y0, 0.0, x0 + cell, y0 + cell, height))

    sx = sum(c + 0.5 for _, c in starts) / len(starts) * cell
    sy = sum(rows - 1 - r + 0.5 for r, _ in starts) / len(starts) * cell

    return Maze(
        name=name,
        cell_size=cell,
        wall_height=height,
        rows=rows,
        cols=width,
        grid=grid,
        start_gate=start_gate,
        finish_gate=finish_gate,
        spawn_position=(sx, sy),
        spawn_yaw=headers.get("spawn_yaw", 0.0),
        wall_boxes=tuple(boxes),
    )


def shipped_maze_names() -> list[str]:
    root = resources.files("posepilot.data.mazes")
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".maze"))


def load_maze_file(spec: str) -> Maze:
    """Load a maze by shipped name or filesystem path."""
    path = Path(spec)
    if path.exists():
        return load_maze(path.read_text("utf-8"), name=path.stem)
    try:
        text = resources.files("posepilot.data.mazes").joinpath(f"{spec}.maze").read_text("utf-8")
    except FileNotFoundError:
        raise MazeError(f"no maze file at {spec!r} and no shipped maze named {spec!r} "
                        f"(shipped: {', '.join(shipped_maze_names())})") from None
    return load_maze(text, name=spec)


def check_collision(maze: Maze, position, radius: float) -> bool:
    """Sphere vs wall boxes and ground plane. Contact at exact distance counts."""
    if radius <= 0:
        raise ValueError("radius must be > 0")
    x, y, z = position
    if z - radius < 0.0:
        return True
    r2 = radius * radius
    for (x0, y0, z0, x1, y1, z1) in maze.wall_boxes:
        cx = x0 if x < x0 else x1 if x > x1 else x
        cy = y0 if y < y0 else y1 if y > y1 else y
        cz = z0 if z < z0 else z1 if z > z1 else z
        dx, dy, dz = x - cx, y - cy, z - cz
        if dx * dx + dy * dy + dz * dz <= r2:
            return True
    return False


@dataclass(frozen=True)
class RunEvent:
    kind: str       # run_started | collision | finished | reset
    time: float     # seconds since session start
    position: tuple[float, float, float]


@dataclass
class RunState:
    started_at: Optional[float] = None
    finished_at: Optional[float] = None
    in_contact: bool = False
    collision_count: int = 0

    @property
    def traversal_time(self) -> Optional[float]:
        if self.started_at is None or self.finished_at is None:
            return None
        return self.finished_at - self.started_at


def advance_run(run: RunState, maze: Maze, position, t: float,
                radius: float) -> list[RunEvent]:
    """Per-tick run bookkeeping. Returns the events this tick emitted (0..2).

    run_started fires on the first exit from the start gate; when start and
    finish coincide (degenerate map) it fires on the first tick instead, and
    finished follows on a later tick so event times stay strictly ordered.
    Collisions are edge-triggered per contact episode. All events after
    finished are suppressed.
    """
    events: list[RunEvent] = []
    if run.finished_at is not None:
        return events
    x, y, z = position
    pos = (x, y, z)
    degenerate = maze.start_gate == maze.finish_gate

    if run.started_at is None:
        if degenerate:
            # never leaves the gate, so the run starts on the first tick;
            # the finish check below then fires on a strictly later tick
            run.started_at = t
            events.append(RunEvent("run_started", t, pos))
            return events
        if not maze.start_gate.contains(x, y):
            run.started_at = t
            events.append(RunEvent("run_started", t, pos))
    if run.started_at is None:
        return events

    hit = check_collision(maze, pos, radius)
    if hit and not run.in_contact:
        run.collision_count += 1
        events.append(RunEvent("collision", t, pos))
    run.in_contact = hit

    if maze.finish_gate.contains(x, y) and t > run.started_at:
        run.finished_at = t
        events.append(RunEvent("finished", t, pos))
    return events
