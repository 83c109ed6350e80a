import { readFileSync } from "node:fs";
import { describe, expect, it } from "vitest";

import {
  canonicalizeRawJson,
  configDigestOfHelloAck,
  extractCanonicalField,
  helloMsg,
  joyAxesMsg,
  keypointsMsg,
  parseServerMessage,
  runControlMsg,
  setModeMsg,
  sha256Hex,
  tlxSubmitMsg,
  type HelloAckObj,
} from "../src/protocol.js";

const helloAckRaw = readFileSync(new URL("./fixtures/hello_ack.json", import.meta.url), "utf-8");

describe("canonicalizeRawJson", () => {
  it("preserves number lexemes JSON.parse would destroy", () => {
    expect(canonicalizeRawJson('{"a": 14.0, "b": 1e3}')).toBe('{"a":14.0,"b":1e3}');
  });

  it("sorts keys recursively and strips whitespace", () => {
    const text = '{ "b": {"z": 1, "a": 2},\n "a": [1, {"q": 3, "p": 4}] }';
    expect(canonicalizeRawJson(text)).toBe('{"a":[1,{"p":4,"q":3}],"b":{"a":2,"z":1}}');
  });

  it("keeps string escapes untouched", () => {
    expect(canonicalizeRawJson('{"k": "a\\"b\\\\c"}')).toBe('{"k":"a\\"b\\\\c"}');
  });

  it("handles empty containers and literals", () => {
    expect(canonicalizeRawJson('{"x": [], "y": {}, "z": [true, false, null]}')).toBe(
      '{"x":[],"y":{},"z":[true,false,null]}',
    );
  });

  it("rejects trailing garbage", () => {
    expect(() => canonicalizeRawJson('{"a": 1} extra')).toThrow();
  });
});

describe("extractCanonicalField", () => {
  it("pulls one top-level field in canonical form", () => {
    const text = '{"first": {"b": 1.50, "a": 2}, "second": "x"}';
    expect(extractCanonicalField(text, "first")).toBe('{"a":2,"b":1.50}');
    expect(extractCanonicalField(text, "second")).toBe('"x"');
  });

  it("throws on a missing field", () => {
    expect(() => extractCanonicalField('{"a": 1}', "nope")).toThrow("not found");
  });
});

describe("sha256Hex", () => {
  it("matches a known vector", async () => {
    // sha256("abc"), the classic FIPS 180 example
    expect(await sha256Hex("abc")).toBe(
      "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad",
    );
  });
});

describe("config digest against a captured server frame", () => {
  it("recomputes the digest the server advertised", async () => {
    // fixture captured from a live server; the e2e suite repeats this check
    // against a freshly spawned one
    const ack = JSON.parse(helloAckRaw) as HelloAckObj;
    expect(ack.config_digest).toMatch(/^[0-9a-f]{64}$/);
    expect(await configDigestOfHelloAck(helloAckRaw)).toBe(ack.config_digest);
  });

  it("detects a tampered config", async () => {
    const tampered = helloAckRaw.replace('"s_psi":0.06', '"s_psi":0.07');
    expect(tampered).not.toBe(helloAckRaw);
    const ack = JSON.parse(tampered) as HelloAckObj;
    expect(await configDigestOfHelloAck(tampered)).not.toBe(ack.config_digest);
  });
});

describe("message builders", () => {
  it("hello carries optional token only when given", () => {
    expect(JSON.parse(helloMsg("ui"))).toEqual({ v: 1, kind: "hello", client: "ui" });
    expect(JSON.parse(helloMsg("ui", "sekrit"))).toEqual({
      v: 1, kind: "hello", client: "ui", token: "sekrit",
    });
  });

  it("joy_axes and keypoints carry the capture timestamp", () => {
    expect(JSON.parse(joyAxesMsg([0, 0.5, -1, 1], 2.5))).toEqual({
      v: 1, kind: "joy_axes", axes: [0, 0.5, -1, 1], ts: 2.5,
    });
    const pts = Array.from({ length: 16 }, (_, i) => [i / 16, 0.5] as [number, number]);
    const valid = Array(16).fill(true);
    const obj = JSON.parse(keypointsMsg(pts, valid, 3.25));
    expect(obj.kind).toBe("keypoints");
    expect(obj.points).toHaveLength(16);
    expect(obj.ts).toBe(3.25);
  });

  it("mode, run control and ratings submit", () => {
    expect(JSON.parse(setModeMsg("pose")).modality).toBe("pose");
    expect(JSON.parse(runControlMsg("pause")).action).toBe("pause");
    const tlx = JSON.parse(tlxSubmitMsg("p1", "joystick", {
      mental: 5, physical: 10, temporal: 15, performance: 0, effort: 20, frustration: 10,
    }));
    expect(tlx.participant).toBe("p1");
    expect(tlx.ratings.effort).toBe(20);
  });
});

describe("parseServerMessage", () => {
  it("accepts the captured telemetry fixture", () => {
    const raw = readFileSync(new URL("./fixtures/telemetry.json", import.meta.url), "utf-8");
    const msg = parseServerMessage(raw);
    expect(msg.kind).toBe("telemetry");
    if (msg.kind === "telemetry") {
      expect(msg.pos).toHaveLength(3);
      expect(typeof msg.config_digest).toBe("string");
    }
  });

  it("rejects wrong version, non-objects and unknown kinds", () => {
    expect(() => parseServerMessage('{"v": 2, "kind": "telemetry"}')).toThrow("version");
    expect(() => parseServerMessage("[1, 2]")).toThrow("object");
    expect(() => parseServerMessage('{"v": 1, "kind": "mystery"}')).toThrow("unknown");
  });
});
