import { describe, expect, it } from "vitest";

import { COCO_REMAP, remapEstimate, type NamedKeypoint } from "../src/pose/remap.js";

function kp(name: string, x: number, y: number, score = 0.9): NamedKeypoint {
  return { name, x, y, score };
}

const FULL_BODY: NamedKeypoint[] = [
  kp("nose", 0.5, 0.1),
  kp("left_ear", 0.55, 0.1),
  kp("right_ear", 0.45, 0.1),
  kp("left_shoulder", 0.6, 0.25),
  kp("right_shoulder", 0.4, 0.25),
  kp("left_elbow", 0.65, 0.4),
  kp("right_elbow", 0.35, 0.4),
  kp("left_wrist", 0.7, 0.5),
  kp("right_wrist", 0.3, 0.5),
  kp("left_hip", 0.57, 0.55),
  kp("right_hip", 0.43, 0.55),
  kp("left_knee", 0.56, 0.75),
  kp("right_knee", 0.44, 0.75),
  kp("left_ankle", 0.55, 0.95),
  kp("right_ankle", 0.45, 0.95),
];

describe("remapEstimate", () => {
  it("places the subject's wrists at rows 10 and 15", () => {
    const f = remapEstimate(FULL_BODY, { mirror: false });
    expect(f.valid[10]).toBe(true);
    expect(f.valid[15]).toBe(true);
    expect(f.points[10]).toEqual([0.3, 0.5]); // right wrist
    expect(f.points[15]).toEqual([0.7, 0.5]); // left wrist
  });

  it("self-view mirror flips x so the left hand lands in the left half", () => {
    const f = remapEstimate(FULL_BODY); // mirror defaults on
    expect(f.points[15]![0]).toBeCloseTo(0.3, 12); // subject's left, screen left
    expect(f.points[10]![0]).toBeCloseTo(0.7, 12);
    expect(f.points[15]![1]).toBe(0.5); // y untouched
  });

  it("derives pelvis, thorax and neck from midpoints", () => {
    const f = remapEstimate(FULL_BODY, { mirror: false });
    expect(f.points[6]).toEqual([0.5, 0.55]);  // hips midpoint
    expect(f.points[7]).toEqual([0.5, 0.25]);  // shoulders midpoint
    expect(f.points[8]).toEqual([0.5, 0.1]);   // ears midpoint
  });

  it("marks the head-top row invalid: the model has no such joint", () => {
    const f = remapEstimate(FULL_BODY);
    expect(f.valid[9]).toBe(false);
    expect(f.points[9]).toEqual([0, 0]);
  });

  it("drops joints under the score threshold and absent joints", () => {
    const partial = [kp("left_wrist", 0.7, 0.5), kp("right_wrist", 0.3, 0.5, 0.1)];
    const f = remapEstimate(partial, { mirror: false });
    expect(f.valid[15]).toBe(true);
    expect(f.valid[10]).toBe(false); // low score
    expect(f.valid[12]).toBe(false); // absent
    expect(f.valid[6]).toBe(false);  // midpoint needs both hips
  });

  it("clamps coordinates into [0, 1] after mirroring", () => {
    const f = remapEstimate([kp("left_wrist", -0.05, 1.2)], { mirror: false });
    expect(f.points[15]).toEqual([0, 1]);
  });

  it("rejects a malformed remap table", () => {
    expect(() => remapEstimate(FULL_BODY, { table: COCO_REMAP.slice(0, 4) })).toThrow("16");
  });
});
