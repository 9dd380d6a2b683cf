import { describe, expect, test } from "vitest";

import {
  formatCalibrateCommand,
  formatRawFrame,
  parseServerLine,
} from "../src/protocol.js";
import {
  ACCEL_BASE,
  DEFAULT_PROFILE,
  VirtualGloveState,
  bendToAdc,
  frameFromState,
} from "../src/glove.js";
import {
  MalformedTemplates,
  parseTemplateDocument,
  sampleTemplate,
} from "../src/templates.js";

const STILL_GYRO = [
  [0, 0, 0],
  [0, 0, 0],
  [0, 0, 0],
];

describe("raw frame serialization", () => {
  test("straight hand at seq 0 formats exactly", () => {
    const line = formatRawFrame({
      seq: 0,
      flex: [180, 170, 175, 185, 190],
      accel: [0, -1, 0],
      gyro: [0, 0, 0],
    });
    expect(line).toBe("R;0;180,170,175,185,190;0.000,-1.000,0.000;0.000,0.000,0.000\n");
  });

  test("reals print with exactly three decimals", () => {
    const line = formatRawFrame({
      seq: 42,
      flex: [0, 1, 2, 3, 4],
      accel: [0.1234, -0.9876, 1.5],
      gyro: [123.4567, -0.0004, 499.999],
    });
    expect(line).toBe("R;42;0,1,2,3,4;0.123,-0.988,1.500;123.457,-0.000,499.999\n");
  });

  test("channels clamp to their legal ranges", () => {
    const line = formatRawFrame({
      seq: 7,
      flex: [2000, -5, 1023.4, 511.5, 0],
      accel: [3, -3, 0],
      gyro: [800, -800, 0],
    });
    expect(line).toBe("R;7;1023,0,1023,512,0;2.000,-2.000,0.000;500.000,-500.000,0.000\n");
  });

  test("sequence numbers wrap at one million", () => {
    const line = formatRawFrame({
      seq: 1_000_001,
      flex: [0, 0, 0, 0, 0],
      accel: [0, 0, 0],
      gyro: [0, 0, 0],
    });
    expect(line.startsWith("R;1;")).toBe(true);
  });

  test("non-finite values are rejected", () => {
    expect(() =>
      formatRawFrame({
        seq: 0,
        flex: [0, 0, 0, 0, 0],
        accel: [Number.NaN, 0, 0],
        gyro: [0, 0, 0],
      }),
    ).toThrow(/non-finite/);
  });

  test("calibrate command is a single fixed line", () => {
    expect(formatCalibrateCommand()).toBe("CMD;calibrate\n");
  });
});

describe("server line parsing", () => {
  test("recognition output", () => {
    expect(parseServerLine("OUT;alphabet;A;29\n")).toEqual({
      type: "out",
      kind: "alphabet",
      text: "A",
      atSeq: 29,
    });
    expect(parseServerLine("OUT;word;hello;120")).toEqual({
      type: "out",
      kind: "word",
      text: "hello",
      atSeq: 120,
    });
  });

  test("calibration verdicts", () => {
    expect(parseServerLine("CAL;ok\n")).toEqual({ type: "cal", ok: true });
    expect(parseServerLine("CAL;err;ring")).toEqual({
      type: "cal",
      ok: false,
      detail: "ring",
    });
    expect(parseServerLine("CAL;err;short")).toEqual({
      type: "cal",
      ok: false,
      detail: "short",
    });
  });

  test("server errors and banner", () => {
    expect(parseServerLine("ERR;not-calibrated\n")).toEqual({
      type: "err",
      reason: "not-calibrated",
    });
    expect(parseServerLine("SERVE;host=127.0.0.1;port=7600")).toEqual({
      type: "banner",
      host: "127.0.0.1",
      port: 7600,
    });
  });

  test.each([
    "OUT;alphabet;A", // missing at_seq
    "OUT;gesture;A;3", // unknown kind
    "OUT;alphabet;;3", // empty text
    "OUT;word;hi;x", // non-numeric at_seq
    "CAL;maybe",
    "CAL;err;",
    "ERR;",
    "",
    "garbage",
  ])("%j is classified unknown, never a result", (raw) => {
    expect(parseServerLine(raw).type).toBe("unknown");
  });
});

describe("virtual glove state", () => {
  test("bend fractions clamp to [0, 1]", () => {
    const state = new VirtualGloveState();
    state.setBend(0, 1.7);
    state.setBend(1, -0.4);
    state.setBend(2, 0.25);
    state.setBend(3, Number.NaN);
    expect(state.bendFractions).toEqual([1, 0, 0.25, 0, 0]);
    expect(() => state.setBend(5, 0)).toThrow(RangeError);
    expect(() => state.setBends([0, 0])).toThrow(RangeError);
  });

  test("bend-to-ADC map is linear between profile endpoints", () => {
    expect(bendToAdc(0, 180, 780)).toBe(180);
    expect(bendToAdc(1, 180, 780)).toBe(780);
    expect(bendToAdc(0.5, 180, 780)).toBe(480);
    expect(bendToAdc(2, 180, 780)).toBe(780); // clamped bend
    expect(bendToAdc(1, 1000, 2000)).toBe(1023); // clamped count
  });

  test("still frame reflects sliders and orientation", () => {
    const state = new VirtualGloveState();
    state.setBends([0.5, 1, 1, 1, 1]);
    state.orientation = "horizontal";
    const frame = frameFromState(state, DEFAULT_PROFILE, 9);
    expect(frame.seq).toBe(9);
    expect(frame.flex).toEqual([480, 760, 770, 800, 810]);
    expect(frame.accel).toEqual(ACCEL_BASE.horizontal);
    expect(frame.gyro).toEqual([0, 0, 0]);
  });
});

describe("motion templates", () => {
  const doc = parseTemplateDocument({
    version: 1,
    rate_hz: 20,
    presets: {
      test: {
        duration_ms: 400,
        keyframes: [
          {
            t_ms: 0,
            bends: [0, 0, 0, 0, 0],
            orientation: "vertical",
            gyro: [[100, 1, 0], [0, 0, 0], [50, 2, Math.PI / 2]],
          },
          {
            t_ms: 200,
            bends: [1, 0.5, 0, 1, 0],
            orientation: "vertical",
            gyro: [[100, 1, 0], [0, 0, 0], [50, 2, Math.PI / 2]],
          },
          {
            t_ms: 200,
            bends: [1, 0.5, 0, 1, 0],
            orientation: "horizontal",
            gyro: STILL_GYRO,
          },
          {
            t_ms: 400,
            bends: [0, 0, 0, 0, 0],
            orientation: "horizontal",
            gyro: STILL_GYRO,
          },
        ],
      },
    },
  });
  const template = doc.presets.get("test")!;

  test("bends interpolate linearly between keyframes", () => {
    const mid = sampleTemplate(template, 100);
    expect(mid.bends).toEqual([0.5, 0.25, 0, 0.5, 0]);
    expect(mid.orientation).toBe("vertical");
  });

  test("duplicate keyframe times step instantaneously", () => {
    expect(sampleTemplate(template, 199).orientation).toBe("vertical");
    const at = sampleTemplate(template, 200);
    expect(at.orientation).toBe("horizontal");
    expect(at.gyro).toEqual([0, 0, 0]);
  });

  test("gyro sinusoids run on absolute time with phase offsets", () => {
    const start = sampleTemplate(template, 0);
    expect(start.gyro[0]).toBeCloseTo(0, 9);
    expect(start.gyro[2]).toBeCloseTo(50, 9); // 50*sin(pi/2)
    const quarter = sampleTemplate(template, 250 - 200);
    // axis 0 at t=50ms: 100*sin(2*pi*0.05)
    expect(quarter.gyro[0]).toBeCloseTo(100 * Math.sin(0.1 * Math.PI), 9);
  });

  test("sampling beyond the last keyframe holds the final pose", () => {
    const end = sampleTemplate(template, 10_000);
    expect(end.bends).toEqual([0, 0, 0, 0, 0]);
    expect(end.orientation).toBe("horizontal");
  });

  test.each([
    [{ version: 2, rate_hz: 20, presets: {} }, /version/],
    [{ version: 1, rate_hz: 20 }, /presets/],
    [
      {
        version: 1,
        rate_hz: 20,
        presets: { bad: { duration_ms: 0, keyframes: [] } },
      },
      /duration_ms/,
    ],
    [
      {
        version: 1,
        rate_hz: 20,
        presets: {
          bad: {
            duration_ms: 100,
            keyframes: [
              {
                t_ms: 0,
                bends: [0, 0, 0, 0, 1.5],
                orientation: "vertical",
                gyro: STILL_GYRO,
              },
            ],
          },
        },
      },
      /bends/,
    ],
    [
      {
        version: 1,
        rate_hz: 20,
        presets: {
          bad: {
            duration_ms: 100,
            keyframes: [
              { t_ms: 50, bends: [0, 0, 0, 0, 0], orientation: "vertical", gyro: STILL_GYRO },
              { t_ms: 0, bends: [0, 0, 0, 0, 0], orientation: "vertical", gyro: STILL_GYRO },
            ],
          },
        },
      },
      /non-decreasing/,
    ],
  ])("malformed documents are rejected (%#)", (raw, message) => {
    expect(() => parseTemplateDocument(raw)).toThrow(MalformedTemplates);
    expect(() => parseTemplateDocument(raw)).toThrow(message);
  });
});
