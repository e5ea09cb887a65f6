/**
 * Scene state and the activation-to-phase rule.
 *
 * This is the same rule the pipeline's render sink applies:
 *
 *     phase' = min(1, phase + baseRate * (1 - activation) * dtSeconds)
 *
 * with dt taken from consecutive packet sensor timestamps. Both
 * implementations are cross-checked against one committed golden trajectory,
 * so any drift between them fails a test rather than quietly diverging.
 */
import { RmsPacket } from "./wire";

export const DEFAULT_PHASE_RATE_PER_S = 1 / 300; // relaxed dawn->dusk in 5 min

export interface Calibration {
  rmsRestMv: number;
  rmsMaxMv: number;
}

export interface SceneState {
  activation: number;
  scenePhase: number;
  lastSeq: number | null;
  lastTSensorMs: number | null;
}

export function initialScene(): SceneState {
  return { activation: 0, scenePhase: 0, lastSeq: null, lastTSensorMs: null };
}

export function normalizeActivation(rmsMv: number, cal: Calibration): number {
  const span = cal.rmsMaxMv - cal.rmsRestMv;
  const x = (rmsMv - cal.rmsRestMv) / span;
  return Math.min(1, Math.max(0, x));
}

export function advanceScene(
  state: SceneState,
  packet: RmsPacket,
  cal: Calibration,
  baseRatePerS: number = DEFAULT_PHASE_RATE_PER_S,
): SceneState {
  const activation = normalizeActivation(packet.rmsMv, cal);
  const dtS =
    state.lastTSensorMs === null
      ? 0
      : Math.max(0, packet.tSensorMs - state.lastTSensorMs) / 1000;
  const scenePhase = Math.min(
    1,
    state.scenePhase + baseRatePerS * (1 - activation) * dtS,
  );
  return {
    activation,
    scenePhase,
    lastSeq: packet.seq,
    lastTSensorMs: packet.tSensorMs,
  };
}

// -- visual interpolation ----------------------------------------------------

export type Rgb = [number, number, number];

export const DAWN_SKY: Rgb = [140, 190, 235];
export const DUSK_SKY: Rgb = [30, 30, 70];
export const DAWN_SUN_ELEVATION = 0.85; // fraction of sky height at dawn
export const DUSK_SUN_ELEVATION = 0.05; // touching the horizon at dusk

function lerp(a: number, b: number, t: number): number {
  // endpoint-exact form: t = 0 and t = 1 return a and b precisely
  return a * (1 - t) + b * t;
}

/** Sky colour interpolates linearly from the dawn to the dusk palette. */
export function skyColor(phase: number): Rgb {
  return [
    lerp(DAWN_SKY[0], DUSK_SKY[0], phase),
    lerp(DAWN_SKY[1], DUSK_SKY[1], phase),
    lerp(DAWN_SKY[2], DUSK_SKY[2], phase),
  ];
}

/** Sun elevation (0 = horizon, 1 = top of sky) interpolates linearly. */
export function sunElevation(phase: number): number {
  return lerp(DAWN_SUN_ELEVATION, DUSK_SUN_ELEVATION, phase);
}
