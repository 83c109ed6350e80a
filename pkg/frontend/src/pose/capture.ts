/** Pose capture pipeline: estimator -> remap -> latest-wins send.
 *
 * The estimator is pluggable so the heavy neural model stays out of this
 * module's dependencies. Production wires a tfjs-based detector through
 * the same interface; tests and the no-camera fallback use synthetic
 * sources. A frame where no person was found sends nothing at all, which
 * lets the server's hold-then-decay policy engage.
 */

import { GatewayClient } from "../client.js";
import { keypointsMsg } from "../protocol.js";
import { remapEstimate, type NamedKeypoint, type RemapOptions } from "./remap.js";

export interface KeypointEstimator {
  /** One estimate from the current camera frame; null when nobody is visible. */
  estimate(): Promise<NamedKeypoint[] | null>;
}

export class PoseCapture {
  private timer: ReturnType<typeof setInterval> | null = null;
  private busy = false;
  lastFrameValidCount = 0;

  constructor(
    private client: GatewayClient,
    private estimator: KeypointEstimator,
    private opts: RemapOptions = {},
    private now: () => number = () => performance.now() / 1000,
  ) {}

  async captureOnce(): Promise<boolean> {
    if (this.busy) return false; // model slower than the tick: drop, latest wins
    this.busy = true;
    try {
      const kps = await this.estimator.estimate();
      if (kps === null) {
        this.lastFrameValidCount = 0;
        return false;
      }
      const frame = remapEstimate(kps, this.opts);
      this.lastFrameValidCount = frame.valid.filter(Boolean).length;
      if (this.lastFrameValidCount === 0) return false;
      this.client.offerInput("keypoints", keypointsMsg(frame.points, frame.valid, this.now()));
      return true;
    } finally {
      this.busy = false;
    }
  }

  start(hz = 30): void {
    this.stop();
    this.timer = setInterval(() => void this.captureOnce(), 1000 / hz);
  }

  stop(): void {
    if (this.timer !== null) clearInterval(this.timer);
    this.timer = null;
  }
}

/** Desk-testing estimator: hands follow two scripted anchor points that the
 * demo page drives from pointer events. Not a neural model, same contract. */
export class AnchorEstimator implements KeypointEstimator {
  leftWrist: [number, number] | null = null;
  rightWrist: [number, number] | null = null;

  async estimate(): Promise<NamedKeypoint[] | null> {
    if (!this.leftWrist && !this.rightWrist) return null;
    const out: NamedKeypoint[] = [];
    if (this.leftWrist) {
      out.push({ name: "left_wrist", x: this.leftWrist[0], y: this.leftWrist[1], score: 1 });
    }
    if (this.rightWrist) {
      out.push({ name: "right_wrist", x: this.rightWrist[0], y: this.rightWrist[1], score: 1 });
    }
    return out;
  }
}
