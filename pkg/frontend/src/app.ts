/** Cockpit wiring: one gateway connection feeding the FPV canvas, HUD pane,
 * and pose overlay; gamepad and pose capture pipelines behind a modality
 * toggle. All control logic lives in the imported modules; this file only
 * connects them to the DOM.
 */

import { GatewayClient } from "./client.js";
import { drawFpv, type MazeView, type Pose2D } from "./fpv.js";
import { GamepadCapture } from "./gamepad.js";
import { formatHud, hudState, posePanelVisible, type HudState } from "./hud.js";
import { drawOverlay, overlayDrawing, zoneGeometry, type ZoneGeometry } from "./overlay.js";
import type { Modality, TelemetryObj } from "./protocol.js";
import { AnchorEstimator, PoseCapture } from "./pose/capture.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function quatYaw(q: [number, number, number, number]): number {
  const [w, x, y, z] = q;
  return Math.atan2(2 * (w * z + x * y), 1 - 2 * (y * y + z * z));
}

export function startCockpit(): void {
  const fpvCanvas = el<HTMLCanvasElement>("fpv");
  const overlayCanvas = el<HTMLCanvasElement>("overlay");
  const posePanel = el<HTMLDivElement>("pose-panel");
  const hudPane = el<HTMLDivElement>("hud");
  const linkBadge = el<HTMLSpanElement>("link");
  const notice = el<HTMLSpanElement>("notice");
  const urlInput = el<HTMLInputElement>("url");

  let maze: MazeView | null = null;
  let zones: ZoneGeometry | null = null;
  let lastSnap: TelemetryObj | null = null;
  let mode: Modality = "joystick";

  const client = new GatewayClient({
    onHello: (ack, digestOk) => {
      maze = { cellSize: ack.maze.cell_size, wallHeight: ack.maze.wall_height, grid: ack.maze.grid };
      zones = zoneGeometry(ack.config);
      mode = ack.modality;
      applyMode();
      linkBadge.textContent = digestOk ? "link up" : "link up (DIGEST MISMATCH)";
      linkBadge.className = digestOk ? "ok" : "bad";
    },
    onTelemetry: (snap) => {
      lastSnap = snap;
      if (snap.mode !== mode) {
        mode = snap.mode;
        applyMode();
      }
    },
    onProtocolError: (code, detail) => {
      console.warn("server rejected a message:", code, detail);
    },
    onLink: (up) => {
      if (!up) {
        linkBadge.textContent = "LINK LOST";
        linkBadge.className = "bad";
      }
    },
  });

  const estimator = new AnchorEstimator();
  const poseCapture = new PoseCapture(client, estimator);
  const gamepad = new GamepadCapture(client);

  function applyMode(): void {
    posePanel.style.display = posePanelVisible(mode) ? "" : "none";
    if (mode === "pose") {
      gamepad.stop();
      poseCapture.start(30);
    } else {
      poseCapture.stop();
      gamepad.start(60);
    }
  }

  // demo pose source: drag inside the panel to place a hand, shift for left
  overlayCanvas.addEventListener("pointermove", (ev) => {
    if (mode !== "pose" || ev.buttons === 0) return;
    const r = overlayCanvas.getBoundingClientRect();
    const p: [number, number] = [(ev.clientX - r.left) / r.width, (ev.clientY - r.top) / r.height];
    // panel space is already self-view space; undo the capture-side flip
    const unmirrored: [number, number] = [1 - p[0], p[1]];
    if (ev.shiftKey) estimator.leftWrist = unmirrored;
    else estimator.rightWrist = unmirrored;
  });

  el<HTMLButtonElement>("connect").addEventListener("click", () => {
    client.connect(urlInput.value, "cockpit");
  });
  el<HTMLButtonElement>("mode-pose").addEventListener("click", () => client.setMode("pose"));
  el<HTMLButtonElement>("mode-joy").addEventListener("click", () => client.setMode("joystick"));
  for (const action of ["start", "reset", "pause", "resume"] as const) {
    el<HTMLButtonElement>(`run-${action}`).addEventListener("click", () => client.runControl(action));
  }

  function renderHud(h: HudState): void {
    const rows = Object.entries(formatHud(h))
      .map(([k, v]) => `<div class="row"><span>${k}</span><b>${v}</b></div>`)
      .join("");
    hudPane.innerHTML = rows;
  }

  function frame(): void {
    const stale = client.isStale();
    if (stale && client.helloAck) {
      linkBadge.textContent = "LINK STALE";
      linkBadge.className = "bad";
    }
    if (mode === "joystick" && !gamepad.connected) {
      notice.textContent = "no gamepad detected";
    } else if (mode === "pose" && poseCapture.lastFrameValidCount === 0) {
      notice.textContent = "no person in view";
    } else {
      notice.textContent = "";
    }
    if (lastSnap && maze) {
      const snap = lastSnap;
      const pose: Pose2D = {
        x: snap.pos[0],
        y: snap.pos[1],
        yaw: quatYaw(snap.quat),
        height: snap.pos[2],
      };
      const ctx = fpvCanvas.getContext("2d");
      if (ctx) {
        drawFpv(ctx, maze, pose, fpvCanvas.width, fpvCanvas.height);
        drawHorizon(ctx, snap, fpvCanvas.width, fpvCanvas.height);
      }
      renderHud(hudState(snap));
      if (zones && posePanelVisible(mode)) {
        const octx = overlayCanvas.getContext("2d");
        if (octx) {
          octx.clearRect(0, 0, overlayCanvas.width, overlayCanvas.height);
          // capture already flipped into self-view space: draw un-mirrored
          const vp = { width: overlayCanvas.width, height: overlayCanvas.height, mirrored: false };
          drawOverlay(octx, overlayDrawing(zones, snap.hands, vp));
        }
      }
    }
    requestAnimationFrame(frame);
  }
  requestAnimationFrame(frame);
}

function drawHorizon(
  ctx: CanvasRenderingContext2D,
  snap: TelemetryObj,
  w: number,
  h: number,
): void {
  const cx = w / 2;
  const cy = h / 2;
  const pitchPx = snap.hud.horizon_pitch * h; // ~1 rad spans the view
  ctx.save();
  ctx.translate(cx, cy + pitchPx);
  ctx.rotate(-snap.hud.horizon_roll);
  ctx.strokeStyle = "rgba(255, 255, 255, 0.85)";
  ctx.lineWidth = 2;
  ctx.beginPath();
  ctx.moveTo(-w * 0.3, 0);
  ctx.lineTo(-w * 0.08, 0);
  ctx.moveTo(w * 0.08, 0);
  ctx.lineTo(w * 0.3, 0);
  ctx.stroke();
  ctx.restore();
  // fixed aircraft symbol
  ctx.strokeStyle = "rgba(255, 210, 80, 0.95)";
  ctx.beginPath();
  ctx.moveTo(cx - 30, cy);
  ctx.lineTo(cx - 8, cy);
  ctx.moveTo(cx + 8, cy);
  ctx.lineTo(cx + 30, cy);
  ctx.moveTo(cx, cy - 6);
  ctx.lineTo(cx, cy);
  ctx.stroke();
}
