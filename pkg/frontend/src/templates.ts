/**
 * Motion-preset templates, consumed from the JSON document produced by
 * `signglove export-templates`.
 *
 * The UI replays these with the same sampling rules the simulator uses, so
 * a preset button produces the very trace the recognizer was trained on:
 *
 *  - bends interpolate linearly between keyframes;
 *  - orientation and gyro parameters step at keyframes (a duplicate
 *    keyframe time is an instantaneous step);
 *  - each gyro axis is amplitude * sin(2*pi*frequency*t + phase) with t the
 *    absolute time since the motion started, in seconds.
 */

import type { Orientation } from "./glove.js";
import type { Triplet } from "./protocol.js";

/** One (amplitude_dps, frequency_hz, phase_rad) sinusoid per gyro axis. */
export type GyroProfile = readonly [
  readonly [number, number, number],
  readonly [number, number, number],
  readonly [number, number, number],
];

export interface TemplateKeyframe {
  tMs: number;
  bends: readonly [number, number, number, number, number];
  orientation: Orientation;
  gyro: GyroProfile;
}

export interface MotionTemplate {
  durationMs: number;
  keyframes: readonly TemplateKeyframe[];
}

export interface TemplateDocument {
  rateHz: number;
  presets: ReadonlyMap<string, MotionTemplate>;
}

export class MalformedTemplates extends Error {}

function fail(message: string): never {
  throw new MalformedTemplates(message);
}

function asNumber(value: unknown, what: string): number {
  if (typeof value !== "number" || !Number.isFinite(value)) {
    fail(`${what} must be a finite number, got ${JSON.stringify(value)}`);
  }
  return value;
}

function asKeyframe(value: unknown, what: string): TemplateKeyframe {
  if (typeof value !== "object" || value === null) {
    fail(`${what} must be an object`);
  }
  const kf = value as Record<string, unknown>;
  const tMs = asNumber(kf.t_ms, `${what}.t_ms`);
  const bends = kf.bends;
  if (!Array.isArray(bends) || bends.length !== 5) {
    fail(`${what}.bends must be a 5-element array`);
  }
  const bendValues = bends.map((b, i) => {
    const v = asNumber(b, `${what}.bends[${i}]`);
    if (v < 0 || v > 1) {
      fail(`${what}.bends[${i}] out of [0,1]: ${v}`);
    }
    return v;
  }) as unknown as TemplateKeyframe["bends"];
  const orientation = kf.orientation;
  if (orientation !== "vertical" && orientation !== "horizontal") {
    fail(`${what}.orientation must be vertical|horizontal`);
  }
  const gyro = kf.gyro;
  if (!Array.isArray(gyro) || gyro.length !== 3) {
    fail(`${what}.gyro must be a 3-element array of [amp, freq, phase]`);
  }
  const gyroProfile = gyro.map((axis, i) => {
    if (!Array.isArray(axis) || axis.length !== 3) {
      fail(`${what}.gyro[${i}] must be [amp, freq, phase]`);
    }
    return axis.map((v, j) =>
      asNumber(v, `${what}.gyro[${i}][${j}]`),
    ) as unknown as readonly [number, number, number];
  }) as unknown as GyroProfile;
  return { tMs, bends: bendValues, orientation, gyro: gyroProfile };
}

/** Validate and convert the exported JSON document. */
export function parseTemplateDocument(doc: unknown): TemplateDocument {
  if (typeof doc !== "object" || doc === null) {
    fail("template document must be a JSON object");
  }
  const root = doc as Record<string, unknown>;
  if (root.version !== 1) {
    fail(`unsupported template document version: ${JSON.stringify(root.version)}`);
  }
  const rateHz = asNumber(root.rate_hz, "rate_hz");
  if (typeof root.presets !== "object" || root.presets === null) {
    fail("presets must be an object");
  }
  const presets = new Map<string, MotionTemplate>();
  for (const [name, raw] of Object.entries(root.presets)) {
    if (typeof raw !== "object" || raw === null) {
      fail(`preset ${name} must be an object`);
    }
    const preset = raw as Record<string, unknown>;
    const durationMs = asNumber(preset.duration_ms, `${name}.duration_ms`);
    if (durationMs <= 0) {
      fail(`${name}.duration_ms must be positive`);
    }
    const rawKeyframes = preset.keyframes;
    if (!Array.isArray(rawKeyframes) || rawKeyframes.length === 0) {
      fail(`${name}.keyframes must be a non-empty array`);
    }
    const keyframes = rawKeyframes.map((kf, i) =>
      asKeyframe(kf, `${name}.keyframes[${i}]`),
    );
    for (let i = 1; i < keyframes.length; i++) {
      if (keyframes[i]!.tMs < keyframes[i - 1]!.tMs) {
        fail(`${name}.keyframes times must be non-decreasing`);
      }
    }
    presets.set(name, { durationMs, keyframes });
  }
  return { rateHz, presets };
}

/** Instantaneous pose of a template at time t (milliseconds from start). */
export interface TemplateSample {
  bends: readonly [number, number, number, number, number];
  orientation: Orientation;
  gyro: Triplet;
}

/** Last keyframe index whose time is <= t (duplicates resolve to the later). */
function segmentIndex(keyframes: readonly TemplateKeyframe[], tMs: number): number {
  let lo = 0;
  let hi = keyframes.length; // first index with time > t, once converged
  while (lo < hi) {
    const mid = (lo + hi) >> 1;
    if (keyframes[mid]!.tMs <= tMs) {
      lo = mid + 1;
    } else {
      hi = mid;
    }
  }
  return Math.max(0, lo - 1);
}

export function sampleTemplate(template: MotionTemplate, tMs: number): TemplateSample {
  const kfs = template.keyframes;
  const idx = segmentIndex(kfs, tMs);
  const cur = kfs[idx]!;
  const nxt = kfs[Math.min(idx + 1, kfs.length - 1)]!;
  const span = nxt.tMs - cur.tMs;
  let frac = span > 0 ? (tMs - cur.tMs) / span : 0;
  frac = Math.min(1, Math.max(0, frac));
  const bends = cur.bends.map(
    (b, i) => b + frac * (nxt.bends[i]! - b),
  ) as unknown as TemplateSample["bends"];
  const tSeconds = tMs / 1000;
  const gyro = cur.gyro.map(
    ([amp, freq, phase]) => amp * Math.sin(2 * Math.PI * freq * tSeconds + phase),
  ) as unknown as Triplet;
  return { bends, orientation: cur.orientation, gyro };
}
