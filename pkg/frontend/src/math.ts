/** Small rotation helpers mirroring the service's delta semantics:
 *  X' = Rz(rz) Ry(ry) Rx(rx) (R X + t) + dt, angles in degrees, dt in mm.
 */

import { Deltas, SensorCalibration } from "./types.js";

export type Mat3 = number[][];

const DEG = Math.PI / 180;

export function matMul(a: Mat3, b: Mat3): Mat3 {
  const out: Mat3 = [
    [0, 0, 0],
    [0, 0, 0],
    [0, 0, 0],
  ];
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      out[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
    }
  }
  return out;
}

export function matVec(a: Mat3, v: number[]): number[] {
  return [
    a[0][0] * v[0] + a[0][1] * v[1] + a[0][2] * v[2],
    a[1][0] * v[0] + a[1][1] * v[1] + a[1][2] * v[2],
    a[2][0] * v[0] + a[2][1] * v[1] + a[2][2] * v[2],
  ];
}

export function rotX(deg: number): Mat3 {
  const c = Math.cos(deg * DEG);
  const s = Math.sin(deg * DEG);
  return [
    [1, 0, 0],
    [0, c, -s],
    [0, s, c],
  ];
}

export function rotY(deg: number): Mat3 {
  const c = Math.cos(deg * DEG);
  const s = Math.sin(deg * DEG);
  return [
    [c, 0, s],
    [0, 1, 0],
    [-s, 0, c],
  ];
}

export function rotZ(deg: number): Mat3 {
  const c = Math.cos(deg * DEG);
  const s = Math.sin(deg * DEG);
  return [
    [c, -s, 0],
    [s, c, 0],
    [0, 0, 1],
  ];
}

export function deltaRotation(d: Deltas): Mat3 {
  return matMul(rotZ(d.rz), matMul(rotY(d.ry), rotX(d.rx)));
}

/** Apply slider deltas to one sensor's extrinsics; pure, input untouched. */
export function applyDeltas(sensor: SensorCalibration, d: Deltas): SensorCalibration {
  const rd = deltaRotation(d);
  const rotation = matMul(rd, sensor.R);
  const rotated = matVec(rd, sensor.t);
  const translation = [
    rotated[0] + d.tx / 1000,
    rotated[1] + d.ty / 1000,
    rotated[2] + d.tz / 1000,
  ];
  return { ...sensor, R: rotation, t: translation };
}

export function maxOrthonormalityError(r: Mat3): number {
  let worst = 0;
  for (let i = 0; i < 3; i++) {
    for (let j = 0; j < 3; j++) {
      let dot = 0;
      for (let k = 0; k < 3; k++) dot += r[k][i] * r[k][j];
      worst = Math.max(worst, Math.abs(dot - (i === j ? 1 : 0)));
    }
  }
  return worst;
}
