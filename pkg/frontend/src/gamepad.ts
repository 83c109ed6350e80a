/** Gamepad capture: first four axes, normalized and centered.
 *
 * The server owns axis routing and inversion (its joystick.axis_map), so
 * the cockpit sends raw axis order. A small snap window around center maps
 * resting sticks to exactly zero; real hardware jitters a few counts and
 * the control law's dead band should not be the only thing absorbing that.
 */

import { GatewayClient } from "./client.js";
import { joyAxesMsg } from "./protocol.js";

export const CENTER_SNAP = 0.01;

export function normalizeAxes(raw: ArrayLike<number>): [number, number, number, number] {
  const out: number[] = [];
  for (let i = 0; i < 4; i++) {
    let v = i < raw.length ? Number(raw[i]) : 0;
    if (!Number.isFinite(v)) v = 0;
    if (Math.abs(v) < CENTER_SNAP) v = 0;
    out.push(Math.max(-1, Math.min(1, v)));
  }
  return out as [number, number, number, number];
}

export interface GamepadSource {
  axes: ArrayLike<number> | null; // null: no device connected
}

function firstGamepad(): GamepadSource {
  const pads = navigator.getGamepads ? navigator.getGamepads() : [];
  for (const p of pads) {
    if (p && p.connected) return { axes: p.axes };
  }
  return { axes: null };
}

export class GamepadCapture {
  private timer: ReturnType<typeof setInterval> | null = null;
  connected = false;

  constructor(
    private client: GatewayClient,
    private source: () => GamepadSource = firstGamepad,
    private now: () => number = () => performance.now() / 1000,
  ) {}

  /** Read the device once and queue the sample; returns what was sent. */
  sample(): [number, number, number, number] | null {
    const src = this.source();
    this.connected = src.axes !== null;
    if (src.axes === null) return null;
    const axes = normalizeAxes(src.axes);
    this.client.offerInput("joy_axes", joyAxesMsg(axes, this.now()));
    return axes;
  }

  start(hz = 60): void {
    this.stop();
    this.timer = setInterval(() => this.sample(), 1000 / hz);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }
}
