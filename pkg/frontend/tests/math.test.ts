import { describe, expect, it } from "vitest";

import { applyDeltas, deltaRotation, matMul, maxOrthonormalityError } from "../src/math.js";
import { SensorCalibration, ZERO_DELTAS } from "../src/types.js";

const SENSOR: SensorCalibration = {
  fx: 220,
  fy: 220,
  cx: 79.5,
  cy: 79.5,
  dist: [0, 0, 0, 0, 0],
  R: [
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
  ],
  t: [0.025, 0.015, 0],
  width: 160,
  height: 160,
};

describe("delta rotation", () => {
  it("is exactly the identity for zero deltas", () => {
    const r = deltaRotation(ZERO_DELTAS);
    expect(r).toEqual([
      [1, 0, 0],
      [0, 1, 0],
      [0, 0, 1],
    ]);
  });

  it("stays orthonormal across the slider range", () => {
    for (const d of [
      { rx: 5, ry: 0, rz: 0, tx: 0, ty: 0, tz: 0 },
      { rx: -3.2, ry: 4.9, rz: 1.1, tx: 0, ty: 0, tz: 0 },
      { rx: 0.1, ry: -0.1, rz: 5, tx: 0, ty: 0, tz: 0 },
    ]) {
      expect(maxOrthonormalityError(deltaRotation(d))).toBeLessThan(1e-12);
    }
  });

  it("matMul against a known product", () => {
    const a = [
      [0, -1, 0],
      [1, 0, 0],
      [0, 0, 1],
    ];
    expect(matMul(a, a)).toEqual([
      [-1, 0, 0],
      [0, -1, 0],
      [0, 0, 1],
    ]);
  });
});

describe("applyDeltas", () => {
  it("zero deltas leave the sensor numerically untouched", () => {
    const out = applyDeltas(SENSOR, ZERO_DELTAS);
    expect(out.R).toEqual(SENSOR.R);
    expect(out.t).toEqual(SENSOR.t);
  });

  it("translation sliders act in millimeters", () => {
    const out = applyDeltas(SENSOR, { ...ZERO_DELTAS, tx: 10 });
    expect(out.t[0]).toBeCloseTo(SENSOR.t[0] + 0.01, 12);
    expect(out.t[1]).toBeCloseTo(SENSOR.t[1], 12);
  });

  it("does not mutate its input", () => {
    const before = JSON.stringify(SENSOR);
    applyDeltas(SENSOR, { ...ZERO_DELTAS, rx: 2, tx: -4 });
    expect(JSON.stringify(SENSOR)).toBe(before);
  });
});
