import recordingJson from "./fixtures/payment-recording.json";
import type { Recording } from "./fake-server.js";
import type { AppElements } from "../src/app.js";

export const recording = recordingJson as unknown as Recording;

export const GOOD_PATH = recording.good.map((f) => f.transition);

export async function until(
  check: () => boolean,
  timeoutMs = 2000,
): Promise<void> {
  const deadline = Date.now() + timeoutMs;
  while (!check()) {
    if (Date.now() > deadline) throw new Error("condition never became true");
    await new Promise((resolve) => setTimeout(resolve, 5));
  }
}

export function mountAppDom(): AppElements {
  document.body.innerHTML = `
    <div id="net"></div>
    <div id="panel"></div>
    <div id="banner"></div>
    <div id="status"></div>
    <div id="debug"></div>
  `;
  return {
    net: document.getElementById("net")!,
    panel: document.getElementById("panel")!,
    banner: document.getElementById("banner")!,
    status: document.getElementById("status")!,
    debug: document.getElementById("debug")!,
  };
}
