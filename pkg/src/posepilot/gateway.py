"""Network boundary: fans operator inputs into the session, telemetry out.

Two transports share one message schema: raw TCP with 4-byte length prefixes
and WebSocket text frames. Data-plane inputs (keypoints, joy_axes, set_mode)
coalesce latest-wins into the session mailbox; run_control and tlx_submit are
applied losslessly in arrival order.

Latency: besides the paced telemetry broadcast, every data-plane input
triggers an immediate push of the current snapshot (echoing the input's
client timestamp) to its sender, throttled per client. A loopback echo
round-trip therefore measures the gateway path, not the control period.
"""

from __future__ import annotations

import asyncio
import contextlib
import csv
import logging
import time
from pathlib import Path
from typing import Optional

import websockets

from . import protocol
from .protocol import (
    CONTROL_PLANE,
    DATA_PLANE,
    Hello,
    JoyAxes,
    Keypoints,
    ProtocolError,
    RunControl,
    SetMode,
    TlxSubmit,
)
from .session import Session

log = logging.getLogger(__name__)


class _Client:
    """One connected operator; transport differences live behind `send`."""

    _ids = 0

    def __init__(self, send_coro, kind: str):
        _Client._ids += 1
        self.id = _Client._ids
        self.kind = kind
        self._send = send_coro
        self.name = f"{kind}-{self.id}"
        self.min_push_gap = 1.0 / 60.0
        self._last_push = 0.0
        self.closed = False

    async def send_obj(self, obj: dict) -> bool:
        if self.closed:
            return False
        try:
            await self._send(protocol.encode_payload(obj))
            return True
        except Exception:
            self.closed = True
            return False

    def may_push(self, now: float) -> bool:
        return (now - self._last_push) >= self.min_push_gap

    def mark_push(self, now: float) -> None:
        self._last_push = now


class Gateway:
    """Owns the session loop task and all client connections."""

    def __init__(self, session: Session, host: str = "127.0.0.1",
                 tcp_port: int = 0, ws_port: int = 0,
                 token: Optional[str] = None, tlx_out: str | Path | None = None,
                 live: bool = True):
        self.session = session
        self.host = host
        self.tcp_port = tcp_port
        self.ws_port = ws_port
        self.token = token
        self.tlx_out = Path(tlx_out) if tlx_out else None
        self.live = live
        self._clients: set[_Client] = set()
        self._tcp_server: Optional[asyncio.AbstractServer] = None
        self._ws_server = None
        self._ticker: Optional[asyncio.Task] = None
        self._max_frame = protocol.MAX_FRAME_BYTES
        self._snapshot_obj: Optional[dict] = None

    # -- lifecycle ----------------------------------------------------------

    async def start(self) -> None:
        self._tcp_server = await asyncio.start_server(
            self._handle_tcp, self.host, self.tcp_port)
        self.tcp_port = self._tcp_server.sockets[0].getsockname()[1]
        self._ws_server = await websockets.serve(
            self._handle_ws, self.host, self.ws_port, max_size=self._max_frame)
        self.ws_port = next(iter(self._ws_server.sockets)).getsockname()[1]
        if self.live:
            self._ticker = asyncio.create_task(self._tick_loop())
        log.info("gateway listening tcp=%s:%d ws=%s:%d",
                 self.host, self.tcp_port, self.host, self.ws_port)

    async def stop(self) -> None:
        if self._ticker:
            self._ticker.cancel()
            with contextlib.suppress(asyncio.CancelledError):
                await self._ticker
        if self._tcp_server:
            self._tcp_server.close()
            await self._tcp_server.wait_closed()
        if self._ws_server:
            self._ws_server.close()
            await self._ws_server.wait_closed()

    async def _tick_loop(self) -> None:
        """Pace the session at the reference rate on the event-loop clock."""
        period = self.session.config.timing.reference_dt
        loop = asyncio.get_running_loop()
        next_at = loop.time() + period
        while True:
            await asyncio.sleep(max(0.0, next_at - loop.time()))
            next_at += period
            if next_at < loop.time():  # fell behind; don't burst-tick to catch up
                next_at = loop.time() + period
            snap = self.session.tick()
            self._snapshot_obj = protocol.snapshot_to_obj(snap)
            await self._broadcast(self._snapshot_obj)

    async def _broadcast(self, obj: dict) -> None:
        # paced by the tick loop already; must not touch the echo throttle,
        # or inputs landing just after a broadcast lose their fast path
        dead = []
        for c in list(self._clients):
            if not await c.send_obj(obj):
                dead.append(c)
        for c in dead:
            self._clients.discard(c)

    # -- per-connection plumbing -------------------------------------------

    async def _handle_tcp(self, reader: asyncio.StreamReader,
                          writer: asyncio.StreamWriter) -> None:
        async def send(payload: bytes) -> None:
            writer.write(protocol.frame_bytes(payload))
            await writer.drain()

        client = _Client(send, "tcp")
        try:
            while True:
                try:
                    data = await protocol.read_frame(reader, self._max_frame)
                except ProtocolError as e:
                    await client.send_obj(protocol.error_obj(e.code, e.detail))
                    break  # framing is unrecoverable mid-stream
                if data is None:
                    break
                await self._handle_payload(client, data)
        finally:
            self._clients.discard(client)
            client.closed = True
            writer.close()
            with contextlib.suppress(Exception):
                await writer.wait_closed()

    async def _handle_ws(self, conn) -> None:
        async def send(payload: bytes) -> None:
            await conn.send(payload.decode("utf-8"))

        client = _Client(send, "ws")
        try:
            async for message in conn:
                data = message.encode("utf-8") if isinstance(message, str) else bytes(message)
                await self._handle_payload(client, data)
        except websockets.ConnectionClosed:
            pass
        finally:
            self._clients.discard(client)
            client.closed = True

    async def _handle_payload(self, client: _Client, data: bytes) -> None:
        try:
            obj = protocol.decode_payload(data)
            msg = protocol.parse_message(obj)
        except ProtocolError as e:
            await client.send_obj(protocol.error_obj(e.code, e.detail))
            return

        if isinstance(msg, Hello):
            if self.token is not None and msg.token != self.token:
                await client.send_obj(protocol.error_obj("bad_token", "authentication failed"))
                return
            self._clients.add(client)
            if msg.client:
                client.name = f"{client.kind}:{msg.client}"
            await client.send_obj(self._hello_ack())
            return

        if client not in self._clients:
            await client.send_obj(protocol.error_obj("no_hello", "send hello before other messages"))
            return

        if msg.kind in DATA_PLANE:
            self._offer(msg)
            # immediate echo so input latency is not quantized to the tick period
            now = time.monotonic()
            if client in self._clients and client.may_push(now):
                snap_obj = self._snapshot_obj
                if snap_obj is not None:
                    pushed = dict(snap_obj)
                    pushed["echo_ts"] = msg.ts
                    if await client.send_obj(pushed):
                        client.mark_push(now)
            return

        if msg.kind in CONTROL_PLANE:
            if isinstance(msg, RunControl):
                self.session.control(msg.action)
                await client.send_obj({"v": protocol.PROTOCOL_VERSION, "kind": "ack",
                                       "of": "run_control", "action": msg.action})
            elif isinstance(msg, TlxSubmit):
                record = {"participant": msg.participant, "modality": msg.modality,
                          **msg.ratings}
                self.session.submit_tlx(record)
                if self.tlx_out:
                    self._append_tlx(record)
                await client.send_obj({"v": protocol.PROTOCOL_VERSION, "kind": "ack",
                                       "of": "tlx_submit", "participant": msg.participant})

    def _offer(self, msg) -> None:
        if isinstance(msg, Keypoints):
            self.session.offer_keypoints(msg.frame, ts=msg.ts)
        elif isinstance(msg, JoyAxes):
            self.session.offer_axes(msg.axes, ts=msg.ts)
        elif isinstance(msg, SetMode):
            self.session.offer_mode(msg.modality)

    def _hello_ack(self) -> dict:
        cfg = self.session.config
        maze = self.session.maze
        return {
            "v": protocol.PROTOCOL_VERSION,
            "kind": "hello_ack",
            "config": cfg.doc,
            "config_digest": cfg.digest,
            "maze": {
                "name": maze.name,
                "cell_size": maze.cell_size,
                "wall_height": maze.wall_height,
                "grid": list(maze.grid),
                "spawn": [maze.spawn_position[0], maze.spawn_position[1]],
                "spawn_yaw": maze.spawn_yaw,
            },
            "modality": self.session.modality,
            "rates": {
                "reference_hz": cfg.timing.reference_hz,
                "telemetry_hz": cfg.timing.telemetry_hz,
                "max_input_hz": cfg.doc["gateway"]["max_input_hz"],
            },
        }

    def _append_tlx(self, record: dict) -> None:
        new = not self.tlx_out.exists()
        with self.tlx_out.open("a", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            if new:
                w.writerow(["participant", "modality", "mental", "physical", "temporal",
                            "performance", "effort", "frustration"])
            w.writerow([record["participant"], record["modality"],
                        *(record[k] for k in ("mental", "physical", "temporal",
                                              "performance", "effort", "frustration"))])


async def serve_forever(session: Session, host: str, tcp_port: int, ws_port: int,
                        token: Optional[str] = None,
                        tlx_out: str | Path | None = None) -> None:
    gw = Gateway(session, host, tcp_port, ws_port, token=token, tlx_out=tlx_out)
    await gw.start()
    print(f"listening: tcp {gw.host}:{gw.tcp_port}  ws {gw.host}:{gw.ws_port}")
    try:
        await asyncio.Event().wait()
    finally:
        await gw.stop()
