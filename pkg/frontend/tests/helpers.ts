/**
 * Shared machinery for the end-to-end tests: spawning the glove server,
 * building calibration/model fixtures through the CLI, and awaiting client
 * events with timeouts.
 */

import { spawn, type ChildProcess } from "node:child_process";
import fs from "node:fs";
import os from "node:os";
import path from "node:path";
import type { GloveClientEvents } from "../src/client.js";
import type { Connection } from "../src/glove.js";
import type { OutLine } from "../src/protocol.js";
import { parseTemplateDocument, type TemplateDocument } from "../src/templates.js";

export const PYTHON = process.env.PYTHON ?? "python3";

export interface RunResult {
  stdout: string;
  stderr: string;
}

/** Run a signglove CLI command to completion, failing loudly on error. */
export function runCli(args: readonly string[]): Promise<RunResult> {
  return new Promise((resolve, reject) => {
    const proc = spawn(PYTHON, ["-m", "signglove.cli", ...args], {
      stdio: ["ignore", "pipe", "pipe"],
    });
    let stdout = "";
    let stderr = "";
    proc.stdout.on("data", (chunk: Buffer) => (stdout += chunk.toString()));
    proc.stderr.on("data", (chunk: Buffer) => (stderr += chunk.toString()));
    proc.on("error", reject);
    proc.on("exit", (code) => {
      if (code === 0) {
        resolve({ stdout, stderr });
      } else {
        reject(
          new Error(`signglove ${args.join(" ")} exited ${code}:\n${stderr || stdout}`),
        );
      }
    });
  });
}

export interface ServerHandle {
  proc: ChildProcess;
  host: string;
  port: number;
  stop(): Promise<void>;
}

/**
 * Start `signglove serve` on an ephemeral port and resolve once its banner
 * announces the address. Always serves one session (--once) unless told
 * otherwise.
 */
export function startServer(
  extraArgs: readonly string[] = [],
  { once = true }: { once?: boolean } = {},
): Promise<ServerHandle> {
  return new Promise((resolve, reject) => {
    const args = [
      "-m",
      "signglove.cli",
      "serve",
      "--host",
      "127.0.0.1",
      "--port",
      "0",
      ...(once ? ["--once"] : []),
      ...extraArgs,
    ];
    const proc = spawn(PYTHON, args, { stdio: ["ignore", "pipe", "pipe"] });
    let stderr = "";
    proc.stderr.on("data", (chunk: Buffer) => (stderr += chunk.toString()));
    let banner = "";
    const onData = (chunk: Buffer) => {
      banner += chunk.toString();
      const match = banner.match(/SERVE;host=([^;]+);port=(\d+)/);
      if (match) {
        proc.stdout!.off("data", onData);
        const handle: ServerHandle = {
          proc,
          host: match[1]!,
          port: Number(match[2]!),
          stop: () =>
            new Promise<void>((done) => {
              if (proc.exitCode !== null) {
                done();
                return;
              }
              proc.once("exit", () => done());
              proc.kill("SIGINT");
              setTimeout(() => proc.kill("SIGKILL"), 5000).unref();
            }),
        };
        resolve(handle);
      }
    };
    proc.stdout!.on("data", onData);
    proc.on("error", reject);
    proc.on("exit", (code) => {
      if (!banner.includes("SERVE;")) {
        reject(new Error(`serve exited ${code} before its banner:\n${stderr}`));
      }
    });
  });
}

export interface Fixtures {
  dir: string;
  calPath: string;
  modelPath: string;
  templates: TemplateDocument;
}

/**
 * Build the shared on-disk fixtures once per test run: a calibration from a
 * simulated configuration sweep, a word model trained on a small synthetic
 * corpus, and the exported motion templates.
 */
export async function buildFixtures(): Promise<Fixtures> {
  const dir = fs.mkdtempSync(path.join(os.tmpdir(), "signglove-ui-"));
  const tracePath = path.join(dir, "config.trace");
  const calPath = path.join(dir, "glove.cal");
  const modelPath = path.join(dir, "words.dtree");
  const corpusDir = path.join(dir, "corpus");
  const templatesPath = path.join(dir, "presets.json");

  await runCli(["simulate", "config", "--seed", "7", "--out", tracePath]);
  await runCli(["calibrate", "--trace", tracePath, "--out", calPath]);
  await runCli([
    "train",
    "--corpus",
    corpusDir,
    "--calibration",
    calPath,
    "--out",
    modelPath,
    "--synthesize",
    "--windows-per-class",
    "60",
    "--seed",
    "11",
  ]);
  await runCli(["export-templates", "--out", templatesPath]);

  const templates = parseTemplateDocument(
    JSON.parse(fs.readFileSync(templatesPath, "utf8")),
  );
  return { dir, calPath, modelPath, templates };
}

export interface TimedEmission {
  out: OutLine;
  /** Wall-clock ms (Date.now()) when the line arrived. */
  atMs: number;
}

/**
 * Event recorder to pass as a GloveClient's `events`: keeps everything the
 * client reported and lets tests await specific emissions or motion ends.
 */
export class EventRecorder implements GloveClientEvents {
  emissions: TimedEmission[] = [];
  phases: Connection[] = [];
  serverErrors: string[] = [];
  motionEnds: Array<{ name: string; atMs: number }> = [];
  prompts: string[] = [];

  private emissionWatchers: Array<(e: TimedEmission) => void> = [];
  private motionEndWatchers: Array<(name: string, atMs: number) => void> = [];

  onEmission = (out: OutLine): void => {
    const timed = { out, atMs: Date.now() };
    this.emissions.push(timed);
    for (const watch of [...this.emissionWatchers]) {
      watch(timed);
    }
  };

  onPhase = (phase: Connection): void => {
    this.phases.push(phase);
  };

  onServerError = (reason: string): void => {
    this.serverErrors.push(reason);
  };

  onMotionEnd = (name: string): void => {
    const atMs = Date.now();
    this.motionEnds.push({ name, atMs });
    for (const watch of [...this.motionEndWatchers]) {
      watch(name, atMs);
    }
  };

  onWizardPrompt = (text: string): void => {
    this.prompts.push(text);
  };

  waitForEmission(
    predicate: (out: OutLine) => boolean,
    timeoutMs: number,
  ): Promise<TimedEmission> {
    return new Promise((resolve, reject) => {
      const existing = this.emissions.find((e) => predicate(e.out));
      if (existing) {
        resolve(existing);
        return;
      }
      const timer = setTimeout(() => {
        this.emissionWatchers = this.emissionWatchers.filter((w) => w !== watcher);
        reject(new Error(`no matching emission within ${timeoutMs} ms`));
      }, timeoutMs);
      const watcher = (e: TimedEmission) => {
        if (predicate(e.out)) {
          clearTimeout(timer);
          this.emissionWatchers = this.emissionWatchers.filter((w) => w !== watcher);
          resolve(e);
        }
      };
      this.emissionWatchers.push(watcher);
    });
  }

  waitForMotionEnd(name: string, timeoutMs: number): Promise<number> {
    return new Promise((resolve, reject) => {
      const existing = this.motionEnds.find((m) => m.name === name);
      if (existing) {
        resolve(existing.atMs);
        return;
      }
      const timer = setTimeout(() => {
        this.motionEndWatchers = this.motionEndWatchers.filter((w) => w !== watcher);
        reject(new Error(`motion ${name} did not end within ${timeoutMs} ms`));
      }, timeoutMs);
      const watcher = (ended: string, atMs: number) => {
        if (ended === name) {
          clearTimeout(timer);
          this.motionEndWatchers = this.motionEndWatchers.filter((w) => w !== watcher);
          resolve(atMs);
        }
      };
      this.motionEndWatchers.push(watcher);
    });
  }
}

/** Simple waiter: resolves when check() first returns true, polling. */
export function waitFor(
  check: () => boolean,
  timeoutMs: number,
  what: string,
): Promise<void> {
  return new Promise((resolve, reject) => {
    const startedAt = Date.now();
    const poll = () => {
      if (check()) {
        resolve();
      } else if (Date.now() - startedAt > timeoutMs) {
        reject(new Error(`timed out after ${timeoutMs} ms waiting for ${what}`));
      } else {
        setTimeout(poll, 25);
      }
    };
    poll();
  });
}
