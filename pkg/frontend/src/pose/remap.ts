/** Remap an off-the-shelf pose model's named keypoints to the 16-row frame
 * the server expects.
 *
 * Browser pose models (MoveNet, BlazePose and friends) emit COCO-style
 * named joints; the server's frame is a 16-row layout with the wrists at
 * configured rows. The table below is data, not code, so swapping the
 * model means swapping the table. Rows the model cannot provide are
 * derived from joint midpoints where that is anatomically honest and
 * marked invalid otherwise; the server skips invalid rows by contract.
 *
 * Left/right are the subject's own, straight from the model. In self-view
 * the capture flips x so that the coordinates the server sees live in the
 * same space the operator sees on the mirrored display; the zone overlay
 * then needs no mirroring of its own.
 */

export interface NamedKeypoint {
  name: string;
  x: number; // normalized [0,1], image frame (x right, y down)
  y: number;
  score: number;
}

export type RowSource =
  | { from: string }                 // copy one named joint
  | { mid: [string, string] }        // midpoint of two joints
  | null;                            // model cannot provide this row

/** Row index -> source, for COCO-17 style models. */
export const COCO_REMAP: RowSource[] = [
  { from: "right_ankle" },                    // 0
  { from: "right_knee" },                     // 1
  { from: "right_hip" },                      // 2
  { from: "left_hip" },                       // 3
  { from: "left_knee" },                      // 4
  { from: "left_ankle" },                     // 5
  { mid: ["left_hip", "right_hip"] },         // 6 pelvis
  { mid: ["left_shoulder", "right_shoulder"] }, // 7 thorax
  { mid: ["left_ear", "right_ear"] },         // 8 upper neck
  null,                                       // 9 head top: not in COCO
  { from: "right_wrist" },                    // 10
  { from: "right_elbow" },                    // 11
  { from: "right_shoulder" },                 // 12
  { from: "left_shoulder" },                  // 13
  { from: "left_elbow" },                     // 14
  { from: "left_wrist" },                     // 15
];

export const N_ROWS = 16;
export const MIN_SCORE = 0.3;

export interface RemapOptions {
  table?: RowSource[];
  minScore?: number;
  /** Flip x (self-view): on by default, see module docstring. */
  mirror?: boolean;
}

export interface Frame16 {
  points: Array<[number, number]>;
  valid: boolean[];
}

const clamp01 = (v: number) => Math.max(0, Math.min(1, v));

export function remapEstimate(
  keypoints: NamedKeypoint[],
  opts: RemapOptions = {},
): Frame16 {
  const table = opts.table ?? COCO_REMAP;
  const minScore = opts.minScore ?? MIN_SCORE;
  const mirror = opts.mirror ?? true;
  if (table.length !== N_ROWS) {
    throw new Error(`remap table must have ${N_ROWS} rows, got ${table.length}`);
  }
  const byName = new Map<string, NamedKeypoint>();
  for (const kp of keypoints) byName.set(kp.name, kp);

  const ok = (kp: NamedKeypoint | undefined): kp is NamedKeypoint =>
    kp !== undefined && kp.score >= minScore &&
    Number.isFinite(kp.x) && Number.isFinite(kp.y);

  const points: Array<[number, number]> = [];
  const valid: boolean[] = [];
  for (const src of table) {
    let x = 0;
    let y = 0;
    let good = false;
    if (src && "from" in src) {
      const kp = byName.get(src.from);
      if (ok(kp)) {
        x = kp.x;
        y = kp.y;
        good = true;
      }
    } else if (src && "mid" in src) {
      const a = byName.get(src.mid[0]);
      const b = byName.get(src.mid[1]);
      if (ok(a) && ok(b)) {
        x = (a.x + b.x) / 2;
        y = (a.y + b.y) / 2;
        good = true;
      }
    }
    if (good && mirror) x = 1 - x;
    points.push(good ? [clamp01(x), clamp01(y)] : [0, 0]);
    valid.push(good);
  }
  return { points, valid };
}
