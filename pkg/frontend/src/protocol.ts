/**
 * Line protocol spoken with the glove server.
 *
 * The UI only ever *sends* raw frames and commands:
 *
 *     R;<seq>;<f1>,<f2>,<f3>,<f4>,<f5>;<ax>,<ay>,<az>;<gx>,<gy>,<gz>\n
 *     CMD;calibrate\n
 *
 * and *receives* recognition output, calibration verdicts, and errors:
 *
 *     OUT;<kind>;<text>;<at_seq>
 *     CAL;ok | CAL;err;<detail>
 *     ERR;<reason>
 *
 * Reals are printed with exactly three decimals; flex values are integer
 * ADC counts; sequence numbers wrap at one million. Anything the parser
 * does not recognise is surfaced as `unknown` so callers can log it
 * without ever mistaking it for a recognition result.
 */

export const SEQ_MOD = 1_000_000;
export const ADC_MAX = 1023;
export const ACCEL_RANGE_G = 2.0;
export const GYRO_RANGE_DPS = 500.0;

export type Triplet = readonly [number, number, number];

export interface RawFrame {
  seq: number;
  flex: readonly [number, number, number, number, number];
  accel: Triplet;
  gyro: Triplet;
}

function clamp(value: number, lo: number, hi: number): number {
  return Math.min(hi, Math.max(lo, value));
}

function real3(value: number): string {
  if (!Number.isFinite(value)) {
    throw new Error(`non-finite value on the wire: ${value}`);
  }
  return value.toFixed(3);
}

function triplet(values: Triplet, range: number): string {
  return values.map((v) => real3(clamp(v, -range, range))).join(",");
}

/** Serialize a raw frame, clamping every channel to its legal range. */
export function formatRawFrame(frame: RawFrame): string {
  const seq = ((frame.seq % SEQ_MOD) + SEQ_MOD) % SEQ_MOD;
  const flex = frame.flex
    .map((v) => clamp(Math.round(v), 0, ADC_MAX).toString())
    .join(",");
  const accel = triplet(frame.accel, ACCEL_RANGE_G);
  const gyro = triplet(frame.gyro, GYRO_RANGE_DPS);
  return `R;${seq};${flex};${accel};${gyro}\n`;
}

export function formatCalibrateCommand(): string {
  return "CMD;calibrate\n";
}

/** A recognition result; the only line kind that may enter the transcript. */
export interface OutLine {
  type: "out";
  kind: "alphabet" | "word";
  text: string;
  atSeq: number;
}

export interface CalLine {
  type: "cal";
  ok: boolean;
  /** Finger name or "short" when ok is false. */
  detail?: string;
}

export interface ErrLine {
  type: "err";
  reason: string;
}

export interface BannerLine {
  type: "banner";
  host: string;
  port: number;
}

export interface UnknownLine {
  type: "unknown";
  raw: string;
}

export type ServerLine = OutLine | CalLine | ErrLine | BannerLine | UnknownLine;

/**
 * Classify one server line. Never throws: a malformed or unexpected line
 * becomes `unknown`, which the client logs and drops.
 */
export function parseServerLine(raw: string): ServerLine {
  const line = raw.replace(/\r?\n$/, "");
  const parts = line.split(";");
  if (parts[0] === "OUT" && parts.length === 4) {
    const [, kind, text, atSeqText] = parts;
    const atSeq = Number(atSeqText);
    if (
      (kind === "alphabet" || kind === "word") &&
      text !== undefined &&
      text.length > 0 &&
      Number.isInteger(atSeq) &&
      atSeq >= 0
    ) {
      return { type: "out", kind, text, atSeq };
    }
  } else if (parts[0] === "CAL") {
    if (parts.length === 2 && parts[1] === "ok") {
      return { type: "cal", ok: true };
    }
    if (parts.length === 3 && parts[1] === "err" && parts[2]) {
      return { type: "cal", ok: false, detail: parts[2] };
    }
  } else if (parts[0] === "ERR" && parts.length >= 2 && parts[1]) {
    return { type: "err", reason: parts.slice(1).join(";") };
  } else if (parts[0] === "SERVE" && parts.length === 3) {
    const host = parts[1]?.match(/^host=(.+)$/)?.[1];
    const portText = parts[2]?.match(/^port=(\d+)$/)?.[1];
    if (host && portText) {
      return { type: "banner", host, port: Number(portText) };
    }
  }
  return { type: "unknown", raw: line };
}
