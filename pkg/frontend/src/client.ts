/** Duplex gateway connection with the cockpit-side input contract:
 * data-plane inputs are coalesced latest-wins and flushed at the server's
 * advertised input rate, control-plane sends go out immediately and in order.
 */

import {
  configDigestOfHelloAck,
  helloMsg,
  parseServerMessage,
  type HelloAckObj,
  type Modality,
  type RunAction,
  type ServerMessage,
  type TelemetryObj,
  runControlMsg,
  setModeMsg,
  tlxSubmitMsg,
  type TlxRatings,
} from "./protocol.js";

/** The subset of the WebSocket API the client uses; lets tests inject one. */
export interface SocketLike {
  onopen: ((ev: unknown) => void) | null;
  onmessage: ((ev: { data: unknown }) => void) | null;
  onclose: ((ev: unknown) => void) | null;
  onerror: ((ev: unknown) => void) | null;
  send(data: string): void;
  close(): void;
}

export type SocketFactory = (url: string) => SocketLike;

export interface ClientEvents {
  onHello?: (ack: HelloAckObj, digestVerified: boolean) => void;
  onTelemetry?: (snap: TelemetryObj) => void;
  onAck?: (msg: ServerMessage) => void;
  onProtocolError?: (code: string, detail: string) => void;
  onLink?: (up: boolean) => void;
}

const DATA_KINDS = ["keypoints", "joy_axes"] as const;
type DataKind = (typeof DATA_KINDS)[number];

export class GatewayClient {
  private sock: SocketLike | null = null;
  private pending = new Map<DataKind, string>();
  private flushTimer: ReturnType<typeof setInterval> | null = null;
  private lastTelemetryMs = 0;
  private linkUp = false;

  helloAck: HelloAckObj | null = null;
  /** null until hello_ack; then whether our recomputed digest matched. */
  digestVerified: boolean | null = null;
  /** set when any later telemetry carries a different config digest. */
  configDrift = false;

  constructor(
    private events: ClientEvents,
    private makeSocket: SocketFactory = (url) =>
      new (globalThis as { WebSocket: new (u: string) => SocketLike }).WebSocket(url),
  ) {}

  connect(url: string, clientName: string, token?: string): void {
    this.close();
    const sock = this.makeSocket(url);
    this.sock = sock;
    sock.onopen = () => sock.send(helloMsg(clientName, token));
    sock.onmessage = (ev) => {
      const text =
        typeof ev.data === "string" ? ev.data : new TextDecoder().decode(ev.data as ArrayBuffer);
      void this.handleText(text);
    };
    sock.onclose = () => this.setLink(false);
    sock.onerror = () => this.setLink(false);
  }

  close(): void {
    if (this.flushTimer !== null) clearInterval(this.flushTimer);
    this.flushTimer = null;
    this.sock?.close();
    this.sock = null;
    this.setLink(false);
  }

  private setLink(up: boolean): void {
    if (up !== this.linkUp) {
      this.linkUp = up;
      this.events.onLink?.(up);
    }
  }

  private async handleText(text: string): Promise<void> {
    let msg: ServerMessage;
    try {
      msg = parseServerMessage(text);
    } catch {
      return; // an unknown kind from a newer server is not fatal
    }
    if (msg.kind === "hello_ack") {
      this.helloAck = msg;
      try {
        this.digestVerified = (await configDigestOfHelloAck(text)) === msg.config_digest;
      } catch {
        this.digestVerified = false;
      }
      this.startFlushing(msg.rates.max_input_hz);
      this.setLink(true);
      this.events.onHello?.(msg, this.digestVerified);
      return;
    }
    if (msg.kind === "telemetry") {
      this.lastTelemetryMs = Date.now();
      this.setLink(true);
      if (this.helloAck && msg.config_digest !== this.helloAck.config_digest) {
        this.configDrift = true;
      }
      this.events.onTelemetry?.(msg);
      return;
    }
    if (msg.kind === "error") {
      this.events.onProtocolError?.(msg.code, msg.detail);
      return;
    }
    this.events.onAck?.(msg);
  }

  /** Link is stale when telemetry stops arriving; inputs are then dropped. */
  isStale(nowMs: number = Date.now()): boolean {
    if (!this.linkUp || !this.helloAck) return true;
    const periodMs = 1000 / this.helloAck.rates.telemetry_hz;
    return nowMs - this.lastTelemetryMs > 3 * periodMs + 50;
  }

  /** Queue a data-plane payload; a newer one for the same kind replaces it. */
  offerInput(kind: DataKind, payload: string): void {
    if (this.isStale()) return;
    this.pending.set(kind, payload);
  }

  /** Send queued data-plane payloads now. Called by the rate timer. */
  flushPending(): void {
    if (!this.sock) return;
    for (const kind of DATA_KINDS) {
      const payload = this.pending.get(kind);
      if (payload !== undefined) {
        this.pending.delete(kind);
        this.sock.send(payload);
      }
    }
  }

  private startFlushing(maxInputHz: number): void {
    if (this.flushTimer !== null) clearInterval(this.flushTimer);
    this.flushTimer = setInterval(() => this.flushPending(), 1000 / Math.max(1, maxInputHz));
  }

  setMode(modality: Modality): void {
    this.sock?.send(setModeMsg(modality));
  }

  runControl(action: RunAction): void {
    this.sock?.send(runControlMsg(action));
  }

  submitTlx(participant: string, modality: Modality, ratings: TlxRatings): void {
    this.sock?.send(tlxSubmitMsg(participant, modality, ratings));
  }
}
