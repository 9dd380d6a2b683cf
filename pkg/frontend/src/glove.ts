/**
 * Virtual glove state: the model behind the five finger sliders, the palm
 * orientation toggle, and the motion-preset buttons.
 *
 * The UI never quantizes anything itself — it converts slider fractions to
 * raw ADC counts through a client-side sensor profile of the same shape the
 * simulator uses, and the server does all calibration and recognition. That
 * keeps a single source of truth for what a bend "means".
 */

import { ADC_MAX, type RawFrame, type Triplet } from "./protocol.js";

export type Orientation = "vertical" | "horizontal";
export type Connection = "disconnected" | "configuring" | "running";

export const FINGER_NAMES = [
  "thumb",
  "index",
  "middle",
  "ring",
  "little",
] as const;

export interface SensorProfile {
  /** ADC count per finger with the finger straight (bend 0). */
  straightAdc: readonly [number, number, number, number, number];
  /** ADC count per finger fully bent (bend 1). */
  fullbendAdc: readonly [number, number, number, number, number];
}

/** Matches the simulator's default noise-free response curve. */
export const DEFAULT_PROFILE: SensorProfile = {
  straightAdc: [180, 170, 175, 185, 190],
  fullbendAdc: [780, 760, 770, 800, 810],
};

/** Gravity vector (in g) for a perfectly still hand in each orientation. */
export const ACCEL_BASE: Record<Orientation, Triplet> = {
  vertical: [0, -1, 0],
  horizontal: [0, 0, -1],
};

function clamp01(value: number): number {
  if (Number.isNaN(value)) {
    return 0;
  }
  return Math.min(1, Math.max(0, value));
}

/** Linear bend→ADC map, rounded to an integer count and clamped to range. */
export function bendToAdc(bend: number, straight: number, full: number): number {
  const raw = straight + clamp01(bend) * (full - straight);
  return Math.min(ADC_MAX, Math.max(0, Math.round(raw)));
}

export class VirtualGloveState {
  private bends: [number, number, number, number, number] = [0, 0, 0, 0, 0];
  orientation: Orientation = "vertical";
  /** Preset id currently replaying, or null; at most one at a time. */
  activeMotion: string | null = null;
  connection: Connection = "disconnected";

  get bendFractions(): readonly [number, number, number, number, number] {
    return this.bends;
  }

  setBend(finger: number, value: number): void {
    if (!Number.isInteger(finger) || finger < 0 || finger > 4) {
      throw new RangeError(`finger index out of range: ${finger}`);
    }
    this.bends[finger] = clamp01(value);
  }

  setBends(values: readonly number[]): void {
    if (values.length !== 5) {
      throw new RangeError(`expected 5 bend values, got ${values.length}`);
    }
    values.forEach((v, i) => this.setBend(i, v));
  }
}

/**
 * Build the raw frame for a still hand at the current sliders/orientation.
 * Motion presets override this per-tick in the client.
 */
export function frameFromState(
  state: VirtualGloveState,
  profile: SensorProfile,
  seq: number,
): RawFrame {
  const flex = state.bendFractions.map((bend, i) =>
    bendToAdc(bend, profile.straightAdc[i]!, profile.fullbendAdc[i]!),
  ) as [number, number, number, number, number];
  return {
    seq,
    flex,
    accel: ACCEL_BASE[state.orientation],
    gyro: [0, 0, 0],
  };
}
