/**
 * Browser entry point: wires the DOM controls in index.html to a
 * GloveClient over a WebSocket transport (via the bundled bridge).
 *
 * Server address comes from the URL query (?host=127.0.0.1&port=8787),
 * falling back to the bridge defaults. Presets load from ./presets.json,
 * generated with `signglove export-templates --out presets.json`.
 */

import { GloveClient } from "./client.js";
import { WsTransport } from "./transports.js";
import { parseTemplateDocument, type TemplateDocument } from "./templates.js";
import { FINGER_NAMES } from "./glove.js";

function byId<T extends HTMLElement>(id: string): T {
  const el = document.getElementById(id);
  if (el === null) {
    throw new Error(`missing element #${id}`);
  }
  return el as T;
}

async function loadTemplates(log: (text: string) => void): Promise<TemplateDocument | null> {
  try {
    const response = await fetch("./presets.json");
    if (!response.ok) {
      throw new Error(`HTTP ${response.status}`);
    }
    return parseTemplateDocument(await response.json());
  } catch (err) {
    log(
      "presets unavailable (generate with: signglove export-templates --out presets.json): " +
        String(err),
    );
    return null;
  }
}

function setupUi(): void {
  const status = byId<HTMLElement>("status");
  const transcriptBox = byId<HTMLElement>("transcript");
  const logBox = byId<HTMLElement>("log");
  const wizardPrompt = byId<HTMLElement>("wizard-prompt");
  const sliderBox = byId<HTMLElement>("sliders");
  const presetBox = byId<HTMLElement>("presets");
  const connectButton = byId<HTMLButtonElement>("connect");
  const wizardButton = byId<HTMLButtonElement>("wizard");
  const wizardCancelButton = byId<HTMLButtonElement>("wizard-cancel");
  const orientationToggle = byId<HTMLInputElement>("orientation");

  const log = (text: string) => {
    const line = document.createElement("div");
    line.textContent = text;
    logBox.prepend(line);
  };

  const params = new URLSearchParams(window.location.search);
  const host = params.get("host") ?? "127.0.0.1";
  const port = Number(params.get("port") ?? "8787");

  let client: GloveClient | null = null;

  const sliders: HTMLInputElement[] = FINGER_NAMES.map((name, i) => {
    const label = document.createElement("label");
    label.textContent = name;
    const slider = document.createElement("input");
    slider.type = "range";
    slider.min = "0";
    slider.max = "1";
    slider.step = "0.01";
    slider.value = "0";
    slider.addEventListener("input", () => {
      client?.setBend(i, Number(slider.value));
    });
    label.appendChild(slider);
    sliderBox.appendChild(label);
    return slider;
  });

  connectButton.addEventListener("click", async () => {
    if (client !== null) {
      return;
    }
    connectButton.disabled = true;
    status.textContent = `connecting to ws://${host}:${port} ...`;
    try {
      const transport = await WsTransport.connect(`ws://${host}:${port}/`);
      const templates = await loadTemplates(log);
      client = new GloveClient({
        transport,
        templates,
        events: {
          onEmission: (out) => {
            transcriptBox.textContent = client!.transcript.join(" ");
            log(`OUT ${out.kind}: ${out.text} (at_seq ${out.atSeq})`);
          },
          onPhase: (phase) => {
            status.textContent = phase;
            if (phase === "disconnected") {
              log("connection lost");
              connectButton.disabled = false;
              client = null;
            }
          },
          onServerError: (reason) => log(`server error: ${reason}`),
          onWizardPrompt: (text) => {
            wizardPrompt.textContent = text;
          },
          onMotionEnd: () => {
            status.textContent = client?.phase ?? "disconnected";
          },
        },
      });
      for (const [i, slider] of sliders.entries()) {
        client.setBend(i, Number(slider.value));
      }
      client.setOrientation(orientationToggle.checked ? "horizontal" : "vertical");
      client.start();
      status.textContent = client.phase;
      if (templates !== null) {
        presetBox.replaceChildren();
        for (const name of templates.presets.keys()) {
          const button = document.createElement("button");
          button.textContent = name;
          button.addEventListener("click", () => {
            client?.startMotion(name);
            status.textContent = `replaying ${name} ...`;
          });
          presetBox.appendChild(button);
        }
      }
    } catch (err) {
      status.textContent = "disconnected";
      log(`connect failed: ${String(err)}`);
      connectButton.disabled = false;
    }
  });

  orientationToggle.addEventListener("change", () => {
    client?.setOrientation(orientationToggle.checked ? "horizontal" : "vertical");
  });

  wizardButton.addEventListener("click", async () => {
    if (client === null) {
      log("connect first");
      return;
    }
    wizardButton.disabled = true;
    try {
      const result = await client.runWizard();
      wizardPrompt.textContent = result.ok
        ? "calibrated"
        : `calibration failed: ${result.detail ?? "unknown"}`;
      if (!result.ok && result.detail && FINGER_NAMES.includes(result.detail as never)) {
        log(`move the ${result.detail} finger through its full range and retry`);
      }
    } catch (err) {
      wizardPrompt.textContent = String(err);
    } finally {
      wizardButton.disabled = false;
    }
  });

  wizardCancelButton.addEventListener("click", () => client?.cancelWizard());
}

if (typeof document !== "undefined") {
  if (document.readyState === "loading") {
    document.addEventListener("DOMContentLoaded", setupUi);
  } else {
    setupUi();
  }
}
