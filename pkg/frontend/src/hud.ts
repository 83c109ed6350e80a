/** HUD view model: pure projections of the latest telemetry snapshot.
 *
 * Authoritative values are never smoothed or re-derived client-side; the
 * only transformations allowed here are unit/format conversions for
 * display. Anything that looks like filtering belongs on the server.
 */

import type { Modality, TelemetryObj } from "./protocol.js";

export interface HudState {
  compass: number;        // rad, straight from the snapshot
  horizonRoll: number;    // rad
  horizonPitch: number;   // rad
  height: number;         // m
  speed: number;          // m/s
  mode: Modality;
  armed: boolean;
  halted: boolean;
  tick: number;
  t: number;
  reference: [number, number, number, number];
  setpoints: [number, number, number, number];
  hands: [[number, number], [number, number]] | null;
  configDigest: string;
}

export function hudState(snap: TelemetryObj): HudState {
  return {
    compass: snap.hud.compass,
    horizonRoll: snap.hud.horizon_roll,
    horizonPitch: snap.hud.horizon_pitch,
    height: snap.hud.height,
    speed: snap.hud.speed,
    mode: snap.mode,
    armed: snap.armed,
    halted: snap.halted,
    tick: snap.tick,
    t: snap.t,
    reference: snap.ref,
    setpoints: snap.setpoints,
    hands: snap.hands,
    configDigest: snap.config_digest,
  };
}

/** The pose-feedback panel exists only in pose mode. */
export function posePanelVisible(mode: Modality): boolean {
  return mode === "pose";
}

const DEG = 180 / Math.PI;

/** Display strings; the numeric HudState stays in SI units and radians. */
export function formatHud(h: HudState): Record<string, string> {
  let deg = (h.compass * DEG) % 360;
  if (deg < 0) deg += 360;
  return {
    compass: `${deg.toFixed(0)}°`,
    roll: `${(h.horizonRoll * DEG).toFixed(1)}°`,
    pitch: `${(h.horizonPitch * DEG).toFixed(1)}°`,
    height: `${h.height.toFixed(2)} m`,
    speed: `${h.speed.toFixed(2)} m/s`,
    mode: h.mode,
    state: h.halted ? "HALTED" : h.armed ? "armed" : "disarmed",
    tick: String(h.tick),
  };
}
