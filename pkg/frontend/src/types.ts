/** Shared types for the calibration inspector client. */

export interface Deltas {
  rx: number; // degrees
  ry: number;
  rz: number;
  tx: number; // millimeters
  ty: number;
  tz: number;
}

export const ZERO_DELTAS: Deltas = { rx: 0, ry: 0, rz: 0, tx: 0, ty: 0, tz: 0 };

export const DELTA_LIMITS = {
  rotationDeg: 5,
  translationMm: 50,
};

export interface SensorCalibration {
  fx: number;
  fy: number;
  cx: number;
  cy: number;
  dist: number[];
  R: number[][];
  t: number[];
  width: number;
  height: number;
}

/** Calibration JSON: per-sensor blocks plus reference_id / baseline_m. */
export interface RigJson {
  reference_id: string;
  baseline_m: number;
  [sensorId: string]: SensorCalibration | string | number;
}

export function sensorIds(rig: RigJson): string[] {
  return Object.keys(rig)
    .filter((k) => k !== "reference_id" && k !== "baseline_m")
    .sort();
}

export function sensorOf(rig: RigJson, id: string): SensorCalibration {
  const block = rig[id];
  if (typeof block !== "object" || block === null) {
    throw new Error(`no sensor ${id} in calibration`);
  }
  return block as SensorCalibration;
}

export interface OverlayRequest {
  frame_id: string;
  ref_channel: string;
  target_channel: string;
  deltas: Deltas;
  blend: number;
}
