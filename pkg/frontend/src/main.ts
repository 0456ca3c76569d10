// Browser bootstrap: websocket wiring, render loop, input, HUD, dialogs.
// Configuration via URL query: ?host=localhost:8732&session=<id>

import { applyDrawCommands } from "./canvas.js";
import { CitywalkClient } from "./client.js";
import { handleInputTick } from "./input.js";
import { renderFrame, type Viewport } from "./render.js";

const INPUT_HZ = 20;

function start(): void {
  const params = new URLSearchParams(window.location.search);
  const host = params.get("host") ?? window.location.host;
  const sessionParam = params.get("session");
  const url = `ws://${host}/ws${sessionParam ? `?session=${sessionParam}` : ""}`;

  const canvas = document.getElementById("view") as HTMLCanvasElement;
  const ctx = canvas.getContext("2d")!;
  const hudEl = document.getElementById("hud")!;
  const dialogEl = document.getElementById("decision")!;
  const statusEl = document.getElementById("status")!;

  const ws = new WebSocket(url);
  const client = new CitywalkClient((text) => ws.send(text));
  ws.onopen = () => client.onOpen();
  ws.onmessage = (ev) => client.onMessage(String(ev.data));
  ws.onclose = () => { statusEl.textContent = "disconnected"; };

  const keysDown = new Set<string>();
  window.addEventListener("keydown", (e) => keysDown.add(e.key.toLowerCase()));
  window.addEventListener("keyup", (e) => keysDown.delete(e.key.toLowerCase()));
  let showRays = false;
  window.addEventListener("keydown", (e) => {
    if (e.key.toLowerCase() === "f") showRays = !showRays;
  });

  window.setInterval(() => {
    if (client.interventionActive || client.pendingDecision !== null) {
      handleInputTick(client, keysDown);
    }
  }, 1000 / INPUT_HZ);

  function viewport(): Viewport {
    const snap = client.latestState();
    const cx = snap?.state.robot.x ?? (client.scene?.extent_m[0] ?? 10) / 2;
    const cy = snap?.state.robot.y ?? (client.scene?.extent_m[1] ?? 10) / 2;
    return {
      canvasW: canvas.width,
      canvasH: canvas.height,
      centerX: cx,
      centerY: cy,
      pixelsPerMeter: 36,
    };
  }

  function renderDialog(): void {
    const pending = client.pendingDecision;
    if (pending === null) {
      dialogEl.style.display = "none";
      return;
    }
    dialogEl.style.display = "block";
    dialogEl.innerHTML = "";
    const title = document.createElement("div");
    title.textContent = `decision point #${pending.id}`;
    dialogEl.appendChild(title);
    for (const option of pending.options) {
      const btn = document.createElement("button");
      btn.textContent = (option as { takeover?: boolean }).takeover
        ? "take over" : `AI: ${JSON.stringify(option)}`;
      btn.onclick = () => client.respondDecision(option as Record<string, unknown>);
      dialogEl.appendChild(btn);
    }
  }

  function renderHud(): void {
    const hud = client.hud;
    const report = client.finalReport ?? client.lastMetrics;
    statusEl.textContent = client.status;
    hudEl.textContent =
      `labor ${hud.laborCostS.toFixed(2)} s | interventions ${hud.interventionTimes}` +
      (report !== null
        ? ` | server: labor ${Number(report["LaborCost_s"]).toFixed(2)} s,` +
          ` resets ${report["AttemptsToSuccess"]}, collisions ${report["CollisionTimes"]}`
        : "");
  }

  function frame(): void {
    const commands = renderFrame(client.scene, client.latestState(), viewport(),
      { showDepthRays: showRays });
    applyDrawCommands(ctx, commands, viewport());
    renderDialog();
    renderHud();
    window.requestAnimationFrame(frame);
  }
  window.requestAnimationFrame(frame);
}

start();
