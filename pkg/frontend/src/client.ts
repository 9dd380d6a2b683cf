/**
 * Glove client: owns the virtual glove state, streams raw frames to the
 * server on a 20 Hz clock, replays motion presets, runs the calibration
 * wizard, and maintains the transcript.
 *
 * Two hard rules live here:
 *
 *  - The transcript is populated *only* from received `OUT;` lines. The
 *    client never infers or fabricates a recognition result.
 *  - Frames carry raw ADC counts; all quantization happens server-side.
 *
 * Send and receive are decoupled: outgoing lines go through a queue that
 * is drained on a microtask, so a slow consumer never re-enters the frame
 * clock, and everything runs on the single UI event loop.
 */

import {
  SEQ_MOD,
  formatCalibrateCommand,
  formatRawFrame,
  parseServerLine,
  type OutLine,
  type RawFrame,
} from "./protocol.js";
import {
  ACCEL_BASE,
  DEFAULT_PROFILE,
  FINGER_NAMES,
  VirtualGloveState,
  bendToAdc,
  frameFromState,
  type Connection,
  type SensorProfile,
} from "./glove.js";
import {
  sampleTemplate,
  type MotionTemplate,
  type TemplateDocument,
} from "./templates.js";

export interface Transport {
  send(text: string): void;
  close(): void;
  onLine: ((line: string) => void) | null;
  onClose: (() => void) | null;
}

export interface GloveClientEvents {
  /** A recognition result arrived (already appended to the transcript). */
  onEmission?: (out: OutLine) => void;
  onPhase?: (phase: Connection) => void;
  /** The server rejected something (`ERR;<reason>`). */
  onServerError?: (reason: string) => void;
  /** A motion preset finished replaying (or was stopped). */
  onMotionEnd?: (name: string) => void;
  /** Wizard guidance text for the UI ("hold fingers open", ...). */
  onWizardPrompt?: (text: string) => void;
}

export interface GloveClientOptions {
  transport: Transport;
  rateHz?: number;
  profile?: SensorProfile;
  templates?: TemplateDocument | null;
  events?: GloveClientEvents;
  /** Server phase at connect time: "running" when it preloaded a calibration. */
  initialPhase?: "configuring" | "running";
}

export interface WizardResult {
  ok: boolean;
  /** Finger name, "short", "cancelled", or "timeout" when ok is false. */
  detail?: string;
}

export interface WizardOptions {
  durationMs?: number;
  /** Finger indices the guided sweep animates (default: all five). */
  fingers?: readonly number[];
}

const WIZARD_LEVELS = [0, 0.5, 1, 0, 0.5, 1, 0, 0.5, 1] as const;
const WIZARD_PROMPTS = ["open", "half bent", "closed"] as const;
const CAL_REPLY_TIMEOUT_MS = 15_000;

function sleep(ms: number): Promise<void> {
  return new Promise((resolve) => setTimeout(resolve, ms));
}

interface ActiveMotion {
  name: string;
  template: MotionTemplate;
  elapsedMs: number;
}

export class GloveClient {
  readonly state = new VirtualGloveState();
  /** Every entry mirrors one received OUT line, in arrival order. */
  readonly transcript: string[] = [];

  private readonly transport: Transport;
  private readonly rateHz: number;
  private readonly periodMs: number;
  private readonly profile: SensorProfile;
  private readonly templates: TemplateDocument | null;
  private readonly events: GloveClientEvents;

  private seq = 0;
  private timer: ReturnType<typeof setInterval> | null = null;
  private outbound: string[] = [];
  private flushScheduled = false;
  private motion: ActiveMotion | null = null;
  private calWaiters: Array<(result: WizardResult) => void> = [];
  private wizardRunning = false;
  private wizardCancelRequested = false;

  constructor(options: GloveClientOptions) {
    this.transport = options.transport;
    this.rateHz = options.rateHz ?? 20;
    if (!(this.rateHz > 0 && this.rateHz <= 1000)) {
      throw new RangeError(`rateHz out of range: ${this.rateHz}`);
    }
    this.periodMs = 1000 / this.rateHz;
    this.profile = options.profile ?? DEFAULT_PROFILE;
    this.templates = options.templates ?? null;
    this.events = options.events ?? {};
    this.state.connection = options.initialPhase ?? "configuring";
    this.transport.onLine = (line) => this.handleLine(line);
    this.transport.onClose = () => this.handleClose();
  }

  get phase(): Connection {
    return this.state.connection;
  }

  /** Begin the frame clock. Idempotent while running. */
  start(): void {
    if (this.state.connection === "disconnected") {
      throw new Error("cannot stream: disconnected");
    }
    if (this.timer === null) {
      this.timer = setInterval(() => this.tick(), this.periodMs);
    }
  }

  stop(): void {
    if (this.timer !== null) {
      clearInterval(this.timer);
      this.timer = null;
    }
  }

  get streaming(): boolean {
    return this.timer !== null;
  }

  dispose(): void {
    this.stop();
    this.transport.close();
  }

  setBend(finger: number, value: number): void {
    this.state.setBend(finger, value);
  }

  setBends(values: readonly number[]): void {
    this.state.setBends(values);
  }

  setOrientation(orientation: "vertical" | "horizontal"): void {
    this.state.orientation = orientation;
  }

  /** Replace any running preset with the named one, starting at t=0. */
  startMotion(name: string): void {
    if (this.templates === null) {
      throw new Error("no motion templates loaded");
    }
    const template = this.templates.presets.get(name);
    if (template === undefined) {
      throw new Error(`unknown motion preset: ${name}`);
    }
    if (this.motion !== null) {
      this.stopMotion();
    }
    this.motion = { name, template, elapsedMs: 0 };
    this.state.activeMotion = name;
  }

  stopMotion(): void {
    if (this.motion === null) {
      return;
    }
    const name = this.motion.name;
    this.motion = null;
    this.state.activeMotion = null;
    this.events.onMotionEnd?.(name);
  }

  /**
   * Guided calibration sweep: animate the (chosen) fingers through
   * open/half/closed three times over `durationMs`, then ask the server to
   * calibrate and report its verdict. The stream must already be running.
   * Cancelling mid-sweep leaves the session configuring and sends no
   * calibrate command.
   */
  async runWizard(options: WizardOptions = {}): Promise<WizardResult> {
    if (this.wizardRunning) {
      throw new Error("wizard already running");
    }
    if (this.state.connection !== "configuring") {
      throw new Error(`wizard requires the configuring phase, not ${this.state.connection}`);
    }
    if (!this.streaming) {
      throw new Error("start() the frame stream before running the wizard");
    }
    const durationMs = options.durationMs ?? 10_000;
    const fingers = options.fingers ?? [0, 1, 2, 3, 4];
    for (const f of fingers) {
      if (!Number.isInteger(f) || f < 0 || f > 4) {
        throw new RangeError(`finger index out of range: ${f}`);
      }
    }
    this.wizardRunning = true;
    this.wizardCancelRequested = false;
    const restore = [...this.state.bendFractions];
    try {
      const segmentMs = durationMs / WIZARD_LEVELS.length;
      for (let i = 0; i < WIZARD_LEVELS.length; i++) {
        if (this.wizardCancelRequested) {
          return { ok: false, detail: "cancelled" };
        }
        if (this.phase === "disconnected") {
          return { ok: false, detail: "disconnected" };
        }
        const level = WIZARD_LEVELS[i]!;
        for (const f of fingers) {
          this.state.setBend(f, level);
        }
        this.events.onWizardPrompt?.(
          `hold fingers ${WIZARD_PROMPTS[i % 3]!} (${i + 1}/${WIZARD_LEVELS.length})`,
        );
        await sleep(segmentMs);
      }
      if (this.wizardCancelRequested) {
        return { ok: false, detail: "cancelled" };
      }
      const result = await this.requestCalibration();
      if (result.ok) {
        this.setPhase("running");
      }
      return result;
    } finally {
      this.state.setBends(restore);
      this.wizardRunning = false;
      this.wizardCancelRequested = false;
    }
  }

  /** Ask the wizard to stop at the next step; no calibrate command is sent. */
  cancelWizard(): void {
    if (this.wizardRunning) {
      this.wizardCancelRequested = true;
    }
  }

  private requestCalibration(): Promise<WizardResult> {
    return new Promise((resolve) => {
      let settled = false;
      const timer = setTimeout(() => {
        if (!settled) {
          settled = true;
          resolve({ ok: false, detail: "timeout" });
        }
      }, CAL_REPLY_TIMEOUT_MS);
      this.calWaiters.push((result) => {
        if (!settled) {
          settled = true;
          clearTimeout(timer);
          resolve(result);
        }
      });
      this.enqueue(formatCalibrateCommand());
    });
  }

  private tick(): void {
    const frame = this.nextFrame();
    this.enqueue(formatRawFrame(frame));
    this.seq = (this.seq + 1) % SEQ_MOD;
  }

  private nextFrame(): RawFrame {
    if (this.motion !== null) {
      const { template, elapsedMs } = this.motion;
      if (elapsedMs >= template.durationMs) {
        this.stopMotion();
      } else {
        const sample = sampleTemplate(template, Math.floor(elapsedMs));
        this.motion.elapsedMs = elapsedMs + this.periodMs;
        const flex = sample.bends.map((bend, i) =>
          bendToAdc(bend, this.profile.straightAdc[i]!, this.profile.fullbendAdc[i]!),
        ) as [number, number, number, number, number];
        return {
          seq: this.seq,
          flex,
          accel: ACCEL_BASE[sample.orientation],
          gyro: sample.gyro,
        };
      }
    }
    return frameFromState(this.state, this.profile, this.seq);
  }

  private enqueue(line: string): void {
    this.outbound.push(line);
    if (!this.flushScheduled) {
      this.flushScheduled = true;
      queueMicrotask(() => this.flush());
    }
  }

  private flush(): void {
    this.flushScheduled = false;
    while (this.outbound.length > 0) {
      const line = this.outbound.shift()!;
      try {
        this.transport.send(line);
      } catch {
        this.outbound.length = 0;
        this.handleClose();
        return;
      }
    }
  }

  private handleLine(raw: string): void {
    const line = parseServerLine(raw);
    switch (line.type) {
      case "out":
        // The server only emits OUT while running, so it doubles as phase
        // evidence when the calibration was preloaded server-side.
        this.setPhase("running");
        this.transcript.push(line.text);
        this.events.onEmission?.(line);
        break;
      case "cal": {
        const waiters = this.calWaiters;
        this.calWaiters = [];
        for (const waiter of waiters) {
          waiter({ ok: line.ok, detail: line.detail });
        }
        break;
      }
      case "err":
        this.events.onServerError?.(line.reason);
        break;
      default:
        // Banners and unknown lines carry no recognition content; drop them.
        break;
    }
  }

  private handleClose(): void {
    this.stop();
    this.setPhase("disconnected");
    const waiters = this.calWaiters;
    this.calWaiters = [];
    for (const waiter of waiters) {
      waiter({ ok: false, detail: "disconnected" });
    }
  }

  private setPhase(phase: Connection): void {
    if (this.state.connection !== phase) {
      this.state.connection = phase;
      this.events.onPhase?.(phase);
    }
  }
}

export { FINGER_NAMES };
