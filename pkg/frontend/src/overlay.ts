/** Pose-feedback overlay: control zones plus the filtered hand markers.
 *
 * Geometry comes exclusively from the server's config document, so the
 * overlay can never disagree with the control law; nothing here hard-codes
 * a rect. The self-view is mirrored at draw time only: model coordinates
 * stay in the server's image frame (x right, y down, un-mirrored).
 */

import type { ConfigDoc, Rect } from "./protocol.js";

export interface ZoneGeometry {
  zone1: { outer: Rect; dead: Rect };
  zone2: { outer: Rect; dead: Rect };
}

function copyRect(r: Rect): Rect {
  return [r[0], r[1], r[2], r[3]];
}

export function zoneGeometry(config: ConfigDoc): ZoneGeometry {
  const z = config.zones;
  return {
    zone1: { outer: copyRect(z.zone1.outer), dead: copyRect(z.zone1.dead) },
    zone2: { outer: copyRect(z.zone2.outer), dead: copyRect(z.zone2.dead) },
  };
}

export interface OverlayViewport {
  width: number;
  height: number;
  mirrored: boolean; // true for webcam self-view
}

/** Normalized image point to canvas pixels, honoring the self-view mirror. */
export function toPixels(
  p: [number, number],
  vp: OverlayViewport,
): [number, number] {
  const x = vp.mirrored ? 1 - p[0] : p[0];
  return [x * vp.width, p[1] * vp.height];
}

export function rectToPixels(r: Rect, vp: OverlayViewport): Rect {
  const [x0, y0] = toPixels([r[0], r[1]], vp);
  const [x1, y1] = toPixels([r[2], r[3]], vp);
  return [Math.min(x0, x1), Math.min(y0, y1), Math.max(x0, x1), Math.max(y0, y1)];
}

export interface OverlayDrawing {
  zones: Array<{ outer: Rect; dead: Rect }>;   // pixel rects
  hands: Array<[number, number]> | null;       // pixel points, [left, right]
}

export function overlayDrawing(
  geometry: ZoneGeometry,
  hands: [[number, number], [number, number]] | null,
  vp: OverlayViewport,
): OverlayDrawing {
  return {
    zones: [
      { outer: rectToPixels(geometry.zone1.outer, vp), dead: rectToPixels(geometry.zone1.dead, vp) },
      { outer: rectToPixels(geometry.zone2.outer, vp), dead: rectToPixels(geometry.zone2.dead, vp) },
    ],
    hands: hands === null ? null : [toPixels(hands[0], vp), toPixels(hands[1], vp)],
  };
}

export function drawOverlay(
  ctx: CanvasRenderingContext2D,
  d: OverlayDrawing,
): void {
  ctx.save();
  ctx.lineWidth = 2;
  for (const zone of d.zones) {
    ctx.strokeStyle = "rgba(80, 220, 120, 0.9)";
    strokeRect(ctx, zone.outer);
    ctx.strokeStyle = "rgba(240, 200, 60, 0.9)";
    strokeRect(ctx, zone.dead);
  }
  if (d.hands) {
    ctx.fillStyle = "rgba(80, 160, 255, 0.95)";
    for (const [x, y] of d.hands) {
      ctx.beginPath();
      ctx.arc(x, y, 7, 0, 2 * Math.PI);
      ctx.fill();
    }
  }
  ctx.restore();
}

function strokeRect(ctx: CanvasRenderingContext2D, r: Rect): void {
  ctx.strokeRect(r[0], r[1], r[2] - r[0], r[3] - r[1]);
}
