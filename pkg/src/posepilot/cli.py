"""Command-line entry point.

Exit codes: 0 success, 1 validation error (config/trace/map/log/data),
2 runtime fault in the simulation, 3 I/O failure.
"""

from __future__ import annotations

import asyncio
import functools
import json
import sys
from pathlib import Path

import click

from . import metrics as M
from . import session as S
from .bench import format_bench, run_bench
from .config import ConfigError, load_config
from .gateway import serve_forever
from .kernels import available_backends
from .protocol import ProtocolError
from .vehicle import VehicleFault
from .world import MazeError, load_maze_file

EXIT_VALIDATION = 1
EXIT_FAULT = 2
EXIT_IO = 3

_VALIDATION_ERRORS = (ConfigError, MazeError, S.TraceError, S.LogError,
                      M.MetricsError, ProtocolError, ValueError)


def _to_exit_codes(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except VehicleFault as e:
            click.echo(f"fault: {e}", err=True)
            sys.exit(EXIT_FAULT)
        except _VALIDATION_ERRORS as e:
            click.echo(f"error: {e}", err=True)
            sys.exit(EXIT_VALIDATION)
        except OSError as e:
            click.echo(f"i/o error: {e}", err=True)
            sys.exit(EXIT_IO)
    return wrapper


def _load(config_path, maze_override=None):
    config = load_config(config_path)
    maze_spec = maze_override or config.doc["world"]["maze"]
    maze = load_maze_file(maze_spec)
    return config, maze


backend_option = click.option("--backend", type=click.Choice(["auto", "fast", "py"]),
                              default=None, help="Kernel backend (default: auto).")
config_option = click.option("--config", "config_path", type=click.Path(), default=None,
                             help="YAML config merged over shipped defaults.")
maze_option = click.option("--maze", "maze_spec", default=None,
                           help="Maze name or path, overriding the config.")


@click.group()
def cli():
    """Pose-driven quadrotor teleoperation workbench."""


@cli.command()
@config_option
@maze_option
@_to_exit_codes
def validate(config_path, maze_spec):
    """Validate config and maze; print the canonical config digest."""
    config, maze = _load(config_path, maze_spec)
    click.echo(f"config ok, digest {config.digest}")
    click.echo(f"maze ok: {maze.name} ({maze.rows}x{maze.cols}, "
               f"{len(maze.wall_boxes)} wall cells, cell {maze.cell_size} m)")
    click.echo(f"kernels available: {', '.join(available_backends())}")


@cli.command()
@config_option
@maze_option
@backend_option
@click.option("--trace", "trace_path", type=click.Path(), default=None,
              help="Input trace (line-delimited JSON). Omit for a no-input run.")
@click.option("--duration", type=float, default=None,
              help="Simulated seconds; defaults to the trace extent.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Run log destination.")
@click.option("--format", "fmt", type=click.Choice(["jsonl", "table"]), default="jsonl")
@click.option("--modality", type=click.Choice(["pose", "joystick"]), default=None)
@click.option("--label", default="", help="Free-text label stored in the log header.")
@_to_exit_codes
def simulate(config_path, maze_spec, backend, trace_path, duration, out_path, fmt,
             modality, label):
    """Headless deterministic simulation from a recorded input trace."""
    config, maze = _load(config_path, maze_spec)
    if trace_path is not None:
        try:
            text = Path(trace_path).read_text("utf-8")
        except FileNotFoundError:
            raise S.TraceError(f"trace file not found: {trace_path}") from None
        trace = S.parse_trace(text)
    else:
        trace = []
    if duration is None and not trace:
        duration = 10.0
    sess = S.Session(config, maze, modality=modality, backend=backend, label=label)
    S.run_trace(sess, trace, duration=duration)
    if sess.vehicle.faulted:
        click.echo("simulation faulted: non-finite value reached the control loop", err=True)
        sys.exit(EXIT_FAULT)
    log = sess.log
    if out_path:
        text = S.log_to_jsonl(log) if fmt == "jsonl" else S.log_to_table(log)
        Path(out_path).write_text(text, encoding="utf-8")
    st = sess.vehicle.state
    summary = {
        "ticks": sess.tick_count,
        "sim_seconds": sess.tick_count * config.timing.reference_dt,
        "traversal_time": sess.run.traversal_time,
        "collisions": sess.run.collision_count,
        "finished": sess.run.finished_at is not None,
        "final_pos": [st.position[0], st.position[1], st.position[2]],
        "faulted": False,
    }
    click.echo("summary: " + json.dumps(summary, sort_keys=True))


@cli.command()
@config_option
@maze_option
@backend_option
@click.option("--log", "log_path", type=click.Path(), required=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the replayed trajectory as a jsonl log.")
@_to_exit_codes
def replay(config_path, maze_spec, backend, log_path, out_path):
    """Re-simulate a run log and verify the odometry matches bit-for-bit."""
    config, maze = _load(config_path, maze_spec)
    try:
        text = Path(log_path).read_text("utf-8")
    except FileNotFoundError:
        raise S.LogError(f"log file not found: {log_path}") from None
    log = S.log_from_jsonl(text) if not text.startswith("# header") else S.log_from_table(text)
    if log.truncated:
        click.echo("note: log ends mid-record; replaying the valid prefix", err=True)
    out = S.replay(log, config, maze, backend=backend)
    mismatches = 0
    for rec, got in zip(log.records, out):
        if rec.pos != got.pos or rec.vel != got.vel or rec.quat != got.quat \
                or rec.omega != got.omega:
            mismatches += 1
    click.echo(f"replayed {len(out)} ticks, odometry mismatches: {mismatches}")
    if out_path:
        relog = S.RunLog(header=dict(log.header))
        for rec in out:
            relog.add_record(rec)
        Path(out_path).write_text(S.log_to_jsonl(relog), encoding="utf-8")
    if mismatches:
        sys.exit(EXIT_FAULT)


@cli.command()
@click.option("--participants", "participants_path", type=click.Path(), required=True)
@click.option("--tlx", "tlx_path", type=click.Path(), required=True)
@click.option("--runs", "runs_path", type=click.Path(), default=None)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@_to_exit_codes
def report(participants_path, tlx_path, runs_path, out_dir):
    """Workload/metrics report bundle from CSV tables."""
    def read(p):
        try:
            return Path(p).read_text("utf-8")
        except FileNotFoundError:
            raise M.MetricsError(f"file not found: {p}") from None
    participants = M.read_participants(read(participants_path))
    tlx = M.read_tlx(read(tlx_path))
    runs = M.read_runs(read(runs_path)) if runs_path else None
    artifacts = M.write_report(out_dir, participants, tlx, runs)
    if len(participants) >= 2:
        mean, std = M.summarize_ages(participants)
        click.echo(f"population: n={len(participants)} age mean {mean:.2f} std {std:.2f}")
    click.echo(f"wrote {len(artifacts)} artifacts to {out_dir}")


@cli.command()
@config_option
@maze_option
@backend_option
@click.option("--host", default=None)
@click.option("--tcp-port", type=int, default=None)
@click.option("--ws-port", type=int, default=None)
@click.option("--token", default=None)
@click.option("--tlx-out", type=click.Path(), default=None,
              help="CSV file collecting submitted workload ratings.")
@click.option("--modality", type=click.Choice(["pose", "joystick"]), default=None)
@_to_exit_codes
def serve(config_path, maze_spec, backend, host, tcp_port, ws_port, token, tlx_out,
          modality):
    """Run the live gateway for cockpit clients."""
    import datetime
    config, maze = _load(config_path, maze_spec)
    gw_cfg = config.doc["gateway"]
    started = datetime.datetime.now(datetime.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    sess = S.Session(config, maze, modality=modality, backend=backend, started=started)
    try:
        asyncio.run(serve_forever(
            sess,
            host=host or gw_cfg["host"],
            tcp_port=tcp_port if tcp_port is not None else gw_cfg["tcp_port"],
            ws_port=ws_port if ws_port is not None else gw_cfg["ws_port"],
            token=token if token is not None else gw_cfg["token"],
            tlx_out=tlx_out,
        ))
    except KeyboardInterrupt:
        click.echo("stopped")


@cli.command()
@config_option
@click.option("--seconds", type=float, default=5.0, help="Simulated seconds per backend.")
@_to_exit_codes
def bench(config_path, seconds):
    """Compare the compiled and pure-Python kernels on the same workload."""
    config = load_config(config_path)
    results = run_bench(config, seconds=seconds)
    click.echo(format_bench(results))


def main():
    cli(prog_name="posepilot")


if __name__ == "__main__":
    main()
