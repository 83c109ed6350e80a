import { describe, expect, it } from "vitest";

import { castRay, renderColumns, type MazeView } from "../src/fpv.js";

// Text row 0 is the far (+y) edge; with cell size 2 the bottom wall row
// spans y in [0,2) and the open interior is y in [2,6).
const BOX: MazeView = {
  cellSize: 2,
  wallHeight: 1.5,
  grid: [
    "#####",
    "#   #",
    "#S F#",
    "#####",
  ],
};

const SQ2 = Math.SQRT2;

describe("castRay", () => {
  it("measures the distance to the facing wall", () => {
    // from the middle of the open cell at (5,5), +x wall face is at x=8
    const hit = castRay(BOX, 5, 5, 0, 60);
    expect(hit.dist).toBeCloseTo(3, 12);
    expect(hit.side).toBe(0);
    expect(hit.gates).toEqual([]);
  });

  it("reports side 1 when the ray crosses a horizontal border", () => {
    const hit = castRay(BOX, 5, 5, Math.PI / 2, 60);
    expect(hit.dist).toBeCloseTo(1, 12);
    expect(hit.side).toBe(1);
  });

  it("collects gate cells crossed before the wall", () => {
    // diagonal toward the start-gate cell centered at (3,3)
    const hit = castRay(BOX, 5, 5, Math.atan2(-2, -2), 60);
    expect(hit.gates).toHaveLength(1);
    expect(hit.gates[0]!.cell).toBe("S");
    expect(hit.gates[0]!.dist).toBeCloseTo(SQ2, 12);
    expect(hit.dist).toBeCloseTo(3 * SQ2, 12);

    const other = castRay(BOX, 5, 5, Math.atan2(-2, 2), 60);
    expect(other.gates).toHaveLength(1);
    expect(other.gates[0]!.cell).toBe("F");
    expect(other.gates[0]!.dist).toBeCloseTo(SQ2, 12);
  });

  it("clips at maxDist when no wall is reached first", () => {
    const hit = castRay(BOX, 5, 5, 0, 2.5);
    expect(hit.dist).toBe(2.5);
  });

  it("runs to maxDist through an open grid edge", () => {
    const open: MazeView = {
      cellSize: 2,
      wallHeight: 1.5,
      grid: ["####", "#   ", "####"],
    };
    const hit = castRay(open, 3, 3, 0, 10);
    expect(hit.dist).toBe(10);
    expect(hit.gates).toEqual([]);
  });
});

describe("renderColumns", () => {
  it("the center column of an odd fan equals the straight-ahead ray", () => {
    const straight = castRay(BOX, 5, 5, 0, 60);
    const cols = renderColumns(BOX, { x: 5, y: 5, yaw: 0, height: 1 }, 3);
    expect(cols[1]!.dist).toBe(straight.dist);
    expect(cols[1]!.side).toBe(straight.side);
  });

  it("perpendicular correction flattens a wall parallel to the camera plane", () => {
    // with a narrow fov every ray lands on the x=8 face, so the corrected
    // distance must be the same for all columns: that is the point of the
    // correction (no fisheye bulge)
    const fov = (20 * Math.PI) / 180;
    const cols = renderColumns(BOX, { x: 5, y: 5, yaw: 0, height: 1 }, 32, fov);
    for (const c of cols) {
      expect(c.dist).toBeCloseTo(3, 9);
      expect(c.side).toBe(0);
    }
  });

  it("scales gate distances by the same correction as the wall", () => {
    // single centered column: correction factor is exactly 1
    const pose = { x: 5, y: 3, yaw: Math.PI, height: 1 };
    const cols = renderColumns(BOX, pose, 1, (20 * Math.PI) / 180);
    expect(cols).toHaveLength(1);
    expect(cols[0]!.gates).toHaveLength(1);
    expect(cols[0]!.gates[0]!.cell).toBe("S");
    expect(cols[0]!.gates[0]!.dist).toBeCloseTo(1, 12);
    expect(cols[0]!.dist).toBeCloseTo(3, 12);
  });
});
