/** Inspector session state: a pure function of the loaded calibration and
 *  the current slider values. Setting every slider back to zero always
 *  reproduces the baseline overlay payload; there is no hidden accumulation.
 */

import { applyDeltas } from "./math.js";
import {
  DELTA_LIMITS,
  Deltas,
  OverlayRequest,
  RigJson,
  ZERO_DELTAS,
  sensorIds,
  sensorOf,
} from "./types.js";

export interface InspectorSession {
  rig: RigJson;
  frames: string[];
  channels: string[];
  frameId: string | null;
  refChannel: string;
  targetChannel: string;
  deltas: Deltas;
  blend: number;
}

export function createSession(rig: RigJson, frames: string[]): InspectorSession {
  const channels = sensorIds(rig);
  const ref = rig.reference_id;
  const target = channels.find((c) => c !== ref) ?? ref;
  return {
    rig,
    frames,
    channels,
    frameId: frames.length ? frames[0] : null,
    refChannel: ref,
    targetChannel: target,
    deltas: { ...ZERO_DELTAS },
    blend: 0.5,
  };
}

export function isDirty(session: InspectorSession): boolean {
  const d = session.deltas;
  return d.rx !== 0 || d.ry !== 0 || d.rz !== 0 || d.tx !== 0 || d.ty !== 0 || d.tz !== 0;
}

export function hasFrames(session: InspectorSession): boolean {
  return session.frameId !== null;
}

function clampDelta(key: keyof Deltas, value: number): number {
  const limit = key.startsWith("r") ? DELTA_LIMITS.rotationDeg : DELTA_LIMITS.translationMm;
  return Math.min(limit, Math.max(-limit, value));
}

export function setDelta(session: InspectorSession, key: keyof Deltas, value: number): InspectorSession {
  return { ...session, deltas: { ...session.deltas, [key]: clampDelta(key, value) } };
}

export function resetDeltas(session: InspectorSession): InspectorSession {
  return { ...session, deltas: { ...ZERO_DELTAS } };
}

export function setBlend(session: InspectorSession, blend: number): InspectorSession {
  return { ...session, blend: Math.min(1, Math.max(0, blend)) };
}

export function selectFrame(session: InspectorSession, frameId: string): InspectorSession {
  if (!session.frames.includes(frameId)) throw new Error(`unknown frame ${frameId}`);
  return { ...session, frameId };
}

export function selectChannels(
  session: InspectorSession,
  refChannel: string,
  targetChannel: string,
): InspectorSession {
  for (const c of [refChannel, targetChannel]) {
    if (!session.channels.includes(c)) throw new Error(`unknown channel ${c}`);
  }
  return { ...session, refChannel, targetChannel };
}

export function overlayPayload(session: InspectorSession): OverlayRequest {
  if (session.frameId === null) throw new Error("no frame selected");
  return {
    frame_id: session.frameId,
    ref_channel: session.refChannel,
    target_channel: session.targetChannel,
    deltas: { ...session.deltas },
    blend: session.blend,
  };
}

/** The rig the commit posts: stored rig with the current deltas applied to
 *  the target channel. Zero deltas reproduce the stored rig exactly. */
export function composeRig(session: InspectorSession): RigJson {
  const composed: RigJson = { ...session.rig };
  composed[session.targetChannel] = applyDeltas(
    sensorOf(session.rig, session.targetChannel),
    session.deltas,
  );
  return composed;
}

/** After a successful accept: the committed rig is the new baseline. */
export function afterCommit(session: InspectorSession, rig: RigJson): InspectorSession {
  return resetDeltas({ ...session, rig });
}
