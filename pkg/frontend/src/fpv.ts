/** First-person maze view: a grid DDA raycaster over the map received at
 * session start. No video pipeline; the world is drawn locally from
 * telemetry pose. Start/finish gate cells render as translucent curtains
 * so the operator can find them.
 */

export interface MazeView {
  cellSize: number;
  wallHeight: number;
  grid: string[]; // row 0 = far (+y) edge, same convention as the server
}

export interface Pose2D {
  x: number;
  y: number;
  yaw: number;    // rad; forward is (cos yaw, sin yaw)
  height: number; // camera z, m
}

function cellAt(m: MazeView, col: number, rowFromBottom: number): string {
  const rows = m.grid.length;
  const textRow = rows - 1 - rowFromBottom;
  if (textRow < 0 || textRow >= rows) return " ";
  const line = m.grid[textRow]!;
  if (col < 0 || col >= line.length) return " ";
  return line[col]!;
}

export interface RayHit {
  dist: number;           // to the first wall, or maxDist if none
  side: 0 | 1;            // 0: crossed a vertical grid line, 1: horizontal
  gates: Array<{ cell: "S" | "F"; dist: number }>; // gate cells crossed before the wall
}

/** Classic DDA over the cell grid. Distances are perpendicular-corrected
 * by the caller; this returns true euclidean distance along the ray. */
export function castRay(
  m: MazeView,
  ox: number,
  oy: number,
  angle: number,
  maxDist: number,
): RayHit {
  const dx = Math.cos(angle);
  const dy = Math.sin(angle);
  const cs = m.cellSize;
  let col = Math.floor(ox / cs);
  let row = Math.floor(oy / cs);
  const stepX = dx >= 0 ? 1 : -1;
  const stepY = dy >= 0 ? 1 : -1;
  // distance along the ray to the next vertical / horizontal cell border
  const tDeltaX = dx !== 0 ? Math.abs(cs / dx) : Infinity;
  const tDeltaY = dy !== 0 ? Math.abs(cs / dy) : Infinity;
  const nextX = (dx >= 0 ? (col + 1) * cs - ox : ox - col * cs);
  const nextY = (dy >= 0 ? (row + 1) * cs - oy : oy - row * cs);
  let tMaxX = dx !== 0 ? nextX / Math.abs(dx) : Infinity;
  let tMaxY = dy !== 0 ? nextY / Math.abs(dy) : Infinity;

  const gates: RayHit["gates"] = [];
  const seen = new Set<string>();
  let side: 0 | 1 = 0;
  let t = 0;
  for (let guard = 0; guard < 4096; guard++) {
    if (tMaxX < tMaxY) {
      t = tMaxX;
      tMaxX += tDeltaX;
      col += stepX;
      side = 0;
    } else {
      t = tMaxY;
      tMaxY += tDeltaY;
      row += stepY;
      side = 1;
    }
    if (t > maxDist) break;
    const c = cellAt(m, col, row);
    if (c === "#") return { dist: t, side, gates };
    if (c === "S" || c === "F") {
      const key = `${col},${row}`;
      if (!seen.has(key)) {
        seen.add(key);
        gates.push({ cell: c, dist: t });
      }
    }
  }
  return { dist: maxDist, side, gates };
}

export interface ColumnSample {
  dist: number; // perpendicular distance (fisheye-corrected)
  side: 0 | 1;
  gates: Array<{ cell: "S" | "F"; dist: number }>;
}

export function renderColumns(
  m: MazeView,
  pose: Pose2D,
  columns: number,
  fov: number = (70 * Math.PI) / 180,
  maxDist = 60,
): ColumnSample[] {
  const out: ColumnSample[] = [];
  for (let i = 0; i < columns; i++) {
    // screen column to camera-plane offset, keeps vertical lines straight
    const camX = (2 * (i + 0.5)) / columns - 1;
    const rel = Math.atan(camX * Math.tan(fov / 2));
    const hit = castRay(m, pose.x, pose.y, pose.yaw + rel, maxDist);
    const corr = Math.cos(rel);
    out.push({
      dist: hit.dist * corr,
      side: hit.side,
      gates: hit.gates.map((g) => ({ cell: g.cell, dist: g.dist * corr })),
    });
  }
  return out;
}

const GATE_FILL: Record<"S" | "F", string> = {
  S: "rgba(90, 140, 255, 0.35)",
  F: "rgba(60, 230, 120, 0.45)",
};

export function drawFpv(
  ctx: CanvasRenderingContext2D,
  m: MazeView,
  pose: Pose2D,
  width: number,
  height: number,
): void {
  ctx.fillStyle = "#10141c";
  ctx.fillRect(0, 0, width, height / 2);
  ctx.fillStyle = "#1d2127";
  ctx.fillRect(0, height / 2, width, height / 2);

  const cols = renderColumns(m, pose, width);
  const focal = height; // ~1 rad vertical fov
  for (let i = 0; i < cols.length; i++) {
    const c = cols[i]!;
    // gates behind the wall are cut by the wall hit itself
    for (const g of c.gates) {
      const h = (focal * m.wallHeight) / Math.max(g.dist, 0.05);
      const top = height / 2 - (focal * (m.wallHeight - pose.height)) / Math.max(g.dist, 0.05);
      ctx.fillStyle = GATE_FILL[g.cell];
      ctx.fillRect(i, top, 1, h);
    }
    if (c.dist >= 59.5) continue;
    const d = Math.max(c.dist, 0.05);
    const h = (focal * m.wallHeight) / d;
    const top = height / 2 - (focal * (m.wallHeight - pose.height)) / d;
    const shade = Math.max(40, 200 - c.dist * 6) - (c.side === 1 ? 25 : 0);
    ctx.fillStyle = `rgb(${shade}, ${shade + 8}, ${shade + 18})`;
    ctx.fillRect(i, top, 1, h);
  }
}
