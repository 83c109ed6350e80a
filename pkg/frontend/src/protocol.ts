/** Gateway wire protocol: typed messages, canonical config digest.
 *
 * The server side of this contract is docs/protocol.md in the repository
 * root. Payloads are JSON objects with v=1 and a kind; over WebSocket each
 * text message is one payload.
 */

export const PROTOCOL_VERSION = 1;

export type Modality = "pose" | "joystick";
export type RunAction = "start" | "reset" | "pause" | "resume";

export interface RunEventObj {
  kind: "run_started" | "collision" | "finished" | "reset";
  t: number;
  pos: [number, number, number];
}

export interface HudFields {
  compass: number;
  horizon_roll: number;
  horizon_pitch: number;
  height: number;
  speed: number;
}

export interface TelemetryObj {
  v: number;
  kind: "telemetry";
  tick: number;
  t: number;
  pos: [number, number, number];
  vel: [number, number, number];
  quat: [number, number, number, number];
  omega: [number, number, number];
  setpoints: [number, number, number, number]; // roll, pitch, yaw, height
  ref: [number, number, number, number];
  events: RunEventObj[];
  hud: HudFields;
  mode: Modality;
  armed: boolean;
  halted: boolean;
  config_digest: string;
  hands: [[number, number], [number, number]] | null;
  echo_ts: number | null;
}

export interface MazeObj {
  name: string;
  cell_size: number;
  wall_height: number;
  grid: string[];
  spawn: [number, number];
  spawn_yaw: number;
}

export interface HelloAckObj {
  v: number;
  kind: "hello_ack";
  config: ConfigDoc;
  config_digest: string;
  maze: MazeObj;
  modality: Modality;
  rates: { reference_hz: number; telemetry_hz: number; max_input_hz: number };
}

export interface AckObj {
  v: number;
  kind: "ack";
  of: "run_control" | "tlx_submit";
  action?: RunAction;
  participant?: string;
}

export interface ErrorObj {
  v: number;
  kind: "error";
  code: string;
  detail: string;
}

export type ServerMessage = TelemetryObj | HelloAckObj | AckObj | ErrorObj;

/** Rects are [x_min, y_min, x_max, y_max] in normalized image coords. */
export type Rect = [number, number, number, number];

export interface ZoneDoc {
  outer: Rect;
  dead: Rect;
}

/** The slice of the server config document the cockpit reads. */
export interface ConfigDoc {
  zones: {
    zone1: ZoneDoc;
    zone2: ZoneDoc;
    rescale_continuous: boolean;
    clamp_outside: boolean;
  };
  pose: { rows: { right_hand: number; left_hand: number } };
  gateway: { max_input_hz: number };
  [section: string]: unknown;
}

export const TLX_KEYS = [
  "mental", "physical", "temporal", "performance", "effort", "frustration",
] as const;
export type TlxRatings = Record<(typeof TLX_KEYS)[number], number>;

export function helloMsg(client: string, token?: string): string {
  const obj: Record<string, unknown> = { v: PROTOCOL_VERSION, kind: "hello", client };
  if (token !== undefined) obj.token = token;
  return JSON.stringify(obj);
}

export function joyAxesMsg(axes: [number, number, number, number], ts?: number): string {
  const obj: Record<string, unknown> = { v: PROTOCOL_VERSION, kind: "joy_axes", axes };
  if (ts !== undefined) obj.ts = ts;
  return JSON.stringify(obj);
}

export function keypointsMsg(
  points: Array<[number, number]>,
  valid: boolean[],
  ts?: number,
): string {
  const obj: Record<string, unknown> = { v: PROTOCOL_VERSION, kind: "keypoints", points, valid };
  if (ts !== undefined) obj.ts = ts;
  return JSON.stringify(obj);
}

export function setModeMsg(modality: Modality): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, kind: "set_mode", modality });
}

export function runControlMsg(action: RunAction): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, kind: "run_control", action });
}

export function tlxSubmitMsg(participant: string, modality: Modality, ratings: TlxRatings): string {
  return JSON.stringify({ v: PROTOCOL_VERSION, kind: "tlx_submit", participant, modality, ratings });
}

export function parseServerMessage(text: string): ServerMessage {
  const obj = JSON.parse(text);
  if (typeof obj !== "object" || obj === null || Array.isArray(obj)) {
    throw new Error("server payload is not an object");
  }
  if (obj.v !== PROTOCOL_VERSION) {
    throw new Error(`unsupported protocol version ${obj.v}`);
  }
  switch (obj.kind) {
    case "telemetry":
    case "hello_ack":
    case "ack":
    case "error":
      return obj as ServerMessage;
    default:
      throw new Error(`unknown server message kind ${String(obj.kind)}`);
  }
}

// --- canonical config digest -----------------------------------------------
//
// The server digests sha256 over its config serialized with sorted keys and
// compact separators. Number formatting is the serializer's: 14.0 stays
// "14.0", which JSON.parse cannot represent (it parses to the integer 14).
// Verifying the digest therefore canonicalizes the RAW hello_ack text,
// keeping every number lexeme exactly as the server wrote it.

type Tok =
  | { k: "punct"; v: string }
  | { k: "str"; v: string }      // raw lexeme including quotes
  | { k: "num"; v: string }      // raw lexeme
  | { k: "lit"; v: string };     // true/false/null

function* tokenize(text: string): Generator<Tok> {
  let i = 0;
  const n = text.length;
  while (i < n) {
    const c = text[i]!;
    if (c === " " || c === "\t" || c === "\n" || c === "\r") { i++; continue; }
    if ("{}[]:,".includes(c)) { yield { k: "punct", v: c }; i++; continue; }
    if (c === '"') {
      let j = i + 1;
      while (j < n) {
        if (text[j] === "\\") j += 2;
        else if (text[j] === '"') break;
        else j++;
      }
      if (j >= n) throw new Error("unterminated string");
      yield { k: "str", v: text.slice(i, j + 1) };
      i = j + 1;
      continue;
    }
    const lit = /^(true|false|null)/.exec(text.slice(i, i + 5));
    if (lit) { yield { k: "lit", v: lit[1]! }; i += lit[1]!.length; continue; }
    const num = /^-?\d+(\.\d+)?([eE][+-]?\d+)?/.exec(text.slice(i, i + 40));
    if (num) { yield { k: "num", v: num[0] }; i += num[0].length; continue; }
    throw new Error(`unexpected character ${c} at offset ${i}`);
  }
}

interface RawValue {
  emit(): string;
}

class RawScalar implements RawValue {
  constructor(private lexeme: string) {}
  emit(): string { return this.lexeme; }
}

class RawArray implements RawValue {
  constructor(private items: RawValue[]) {}
  emit(): string { return "[" + this.items.map((v) => v.emit()).join(",") + "]"; }
}

class RawObject implements RawValue {
  constructor(private entries: Array<[string, string, RawValue]>) {} // key, raw key lexeme, value
  emit(): string {
    const sorted = [...this.entries].sort((a, b) => (a[0] < b[0] ? -1 : a[0] > b[0] ? 1 : 0));
    return "{" + sorted.map(([, raw, v]) => raw + ":" + v.emit()).join(",") + "}";
  }
}

function parseRaw(toks: Tok[], at: { i: number }): RawValue {
  const t = toks[at.i];
  if (!t) throw new Error("unexpected end of input");
  if (t.k === "str" || t.k === "num" || t.k === "lit") {
    at.i++;
    return new RawScalar(t.v);
  }
  if (t.k === "punct" && t.v === "[") {
    at.i++;
    const items: RawValue[] = [];
    if (toks[at.i]?.v === "]" && toks[at.i]?.k === "punct") { at.i++; return new RawArray(items); }
    for (;;) {
      items.push(parseRaw(toks, at));
      const s = toks[at.i];
      if (s?.k === "punct" && s.v === ",") { at.i++; continue; }
      if (s?.k === "punct" && s.v === "]") { at.i++; return new RawArray(items); }
      throw new Error("bad array");
    }
  }
  if (t.k === "punct" && t.v === "{") {
    at.i++;
    const entries: Array<[string, string, RawValue]> = [];
    if (toks[at.i]?.v === "}" && toks[at.i]?.k === "punct") { at.i++; return new RawObject(entries); }
    for (;;) {
      const key = toks[at.i];
      if (key?.k !== "str") throw new Error("object key must be a string");
      at.i++;
      const colon = toks[at.i];
      if (colon?.k !== "punct" || colon.v !== ":") throw new Error("missing colon");
      at.i++;
      entries.push([JSON.parse(key.v) as string, key.v, parseRaw(toks, at)]);
      const s = toks[at.i];
      if (s?.k === "punct" && s.v === ",") { at.i++; continue; }
      if (s?.k === "punct" && s.v === "}") { at.i++; return new RawObject(entries); }
      throw new Error("bad object");
    }
  }
  throw new Error(`unexpected token ${t.v}`);
}

/** Key-sorted compact re-serialization preserving every scalar lexeme. */
export function canonicalizeRawJson(text: string): string {
  const toks = [...tokenize(text)];
  const at = { i: 0 };
  const v = parseRaw(toks, at);
  if (at.i !== toks.length) throw new Error("trailing data");
  return v.emit();
}

/** One top-level field's value, re-serialized canonically (lexemes kept). */
export function extractCanonicalField(text: string, field: string): string {
  const toks = [...tokenize(text)];
  if (toks[0]?.k !== "punct" || toks[0].v !== "{") throw new Error("not an object");
  // walk top-level entries, tracking token spans
  const at = { i: 1 };
  if (toks[at.i]?.v === "}" && toks[at.i]?.k === "punct") throw new Error(`field ${field} not found`);
  for (;;) {
    const key = toks[at.i];
    if (key?.k !== "str") throw new Error("object key must be a string");
    const name = JSON.parse(key.v) as string;
    at.i += 2; // key, colon
    const value = parseRaw(toks, at);
    if (name === field) return value.emit();
    const s = toks[at.i];
    if (s?.k === "punct" && s.v === ",") { at.i++; continue; }
    if (s?.k === "punct" && s.v === "}") throw new Error(`field ${field} not found`);
    throw new Error("bad object");
  }
}

export async function sha256Hex(text: string): Promise<string> {
  const data = new TextEncoder().encode(text);
  const digest = await crypto.subtle.digest("SHA-256", data);
  return [...new Uint8Array(digest)].map((b) => b.toString(16).padStart(2, "0")).join("");
}

/** Recompute the canonical digest of the config carried by a raw hello_ack. */
export async function configDigestOfHelloAck(rawHelloAck: string): Promise<string> {
  return sha256Hex(extractCanonicalField(rawHelloAck, "config"));
}
