// Browser wiring: spectator canvas with a projected-bbox overlay, class
// name form, progress bar and status line, all driven by TeachClient.

import { TeachClient } from "./client.js";
import { decodeSnapshot, projectBoxOutline, type Snapshot } from "./geometry.js";
import type { ViewState } from "./client.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const STATE_LABELS: Record<string, string> = {
  idle: "idle",
  gaze_tracking: "look at an object (click it)",
  object_proposed: "object proposed: click Select to confirm",
  naming: "type the class name",
  recording: "recording...",
  done: "done! look at the next object",
  failed: "failed",
};

async function main(): Promise<void> {
  const params = new URLSearchParams(window.location.search);
  const server = params.get("server") ?? "http://127.0.0.1:8765";
  const base = server.replace(/^ws/, "http");
  const wsUrl = base.replace(/^http/, "ws") + "/ws";

  const canvas = el<HTMLCanvasElement>("spectator");
  const overlay = el<HTMLDivElement>("bbox-overlay");
  const status = el<HTMLDivElement>("status");
  const hint = el<HTMLDivElement>("hint");
  const nameForm = el<HTMLFormElement>("name-form");
  const nameInput = el<HTMLInputElement>("name-input");
  const selectButton = el<HTMLButtonElement>("select-button");
  const cancelButton = el<HTMLButtonElement>("cancel-button");
  const progress = el<HTMLProgressElement>("progress");
  const banner = el<HTMLDivElement>("banner");
  const jitterToggle = el<HTMLInputElement>("jitter-toggle");

  status.textContent = `fetching snapshot from ${base} ...`;
  const response = await fetch(`${base}/snapshot`);
  const snapshot: Snapshot = decodeSnapshot(await response.json());
  canvas.width = snapshot.intrinsics.width;
  canvas.height = snapshot.intrinsics.height;

  const image = new Image();
  image.src = `data:image/png;base64,${snapshot.rgbPngB64}`;
  await image.decode();
  canvas.getContext("2d")!.drawImage(image, 0, 0);

  function gauss(sigma: number): number {
    const u = Math.random() || 1e-12;
    return sigma * Math.sqrt(-2 * Math.log(u)) * Math.cos(2 * Math.PI * Math.random());
  }

  const socket = new WebSocket(wsUrl);
  const client = new TeachClient(
    { send: (data) => socket.send(data) },
    snapshot,
    {
      jitter: () =>
        jitterToggle.checked ? [gauss(0.004), gauss(0.004), gauss(0.004)] : [0, 0, 0],
      onChange: render,
    },
  );
  socket.addEventListener("open", () => client.handleOpen());
  socket.addEventListener("message", (event) => client.handleRaw(String(event.data)));
  socket.addEventListener("close", () => client.handleClose());

  canvas.addEventListener("click", (event) => {
    const rect = canvas.getBoundingClientRect();
    const u = ((event.clientX - rect.left) / rect.width) * canvas.width;
    const v = ((event.clientY - rect.top) / rect.height) * canvas.height;
    client.clickToGaze(u, v);
  });
  selectButton.addEventListener("click", () => client.select());
  cancelButton.addEventListener("click", () => client.cancel());
  nameForm.addEventListener("submit", (event) => {
    event.preventDefault();
    if (client.submitClass(nameInput.value)) nameInput.value = "";
  });

  function render(view: ViewState): void {
    status.textContent =
      view.connection === "open"
        ? STATE_LABELS[view.session] ?? view.session
        : `connection ${view.connection}`;
    hint.textContent = view.hint ?? view.lastError?.message ?? "";

    if (view.bbox) {
      const rect = projectBoxOutline(view.bbox.min, view.bbox.max, snapshot.intrinsics, snapshot.pose);
      if (rect) {
        const sx = canvas.clientWidth / canvas.width;
        const sy = canvas.clientHeight / canvas.height;
        overlay.style.display = "block";
        overlay.style.left = `${rect.u0 * sx}px`;
        overlay.style.top = `${rect.v0 * sy}px`;
        overlay.style.width = `${(rect.u1 - rect.u0) * sx}px`;
        overlay.style.height = `${(rect.v1 - rect.v0) * sy}px`;
      }
    } else {
      overlay.style.display = "none";
    }

    nameInput.disabled = view.session !== "naming";
    selectButton.disabled = view.session !== "object_proposed";
    cancelButton.disabled = view.session !== "recording";
    progress.value = view.progress;
    banner.textContent =
      view.completedFrames !== null
        ? `recorded ${view.completedFrames} labeled frames`
        : view.failureReason
          ? `stopped: ${view.failureReason}`
          : "";
  }

  render({ ...client.view });
}

main().catch((err) => {
  const status = document.getElementById("status");
  if (status) status.textContent = `startup failed: ${err}`;
  console.error(err);
});
