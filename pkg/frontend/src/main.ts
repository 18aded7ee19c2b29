// Browser entry point. Two stacked canvases (patches below, agents above),
// a menu column with live vote tallies, a steering pad for participants,
// and facilitator controls. Configuration comes from the URL query:
//   index.html?server=ws://host:port&session=s1&name=alice

import { connect, type Connection } from "./client.js";
import { paintAgents, paintPatches, type Surface } from "./raster.js";
import { SteeringThrottle, actionForKey, headingFromAxes } from "./steering.js";
import type { ViewModel } from "./viewmodel.js";

const query = new URLSearchParams(location.search);
const serverUrl = query.get("server") ?? `ws://${location.hostname}:8787`;
const sessionId = query.get("session") ?? "s1";
const userName = query.get("name") ?? `guest${Math.floor(Math.random() * 1000)}`;

const app = document.getElementById("app")!;
app.innerHTML = `
  <div id="banner" class="banner hidden"></div>
  <div class="columns">
    <div>
      <div class="stage">
        <canvas id="patches"></canvas>
        <canvas id="agents"></canvas>
      </div>
      <div id="status" class="status"></div>
      <div id="pad" class="pad hidden">
        <button data-key="ArrowUp">&#8593;</button>
        <div>
          <button data-key="ArrowLeft">&#8592;</button>
          <button data-key="ArrowDown">&#8595;</button>
          <button data-key="ArrowRight">&#8594;</button>
        </div>
        <div>
          <button data-key=" ">stop</button>
          <button data-key="Enter">go</button>
        </div>
      </div>
    </div>
    <div class="side">
      <div id="controls" class="hidden">
        <button id="pause">pause</button>
        <button id="resume">resume</button>
      </div>
      <div id="menus"></div>
      <details id="configPanel"><summary>parameters</summary><pre id="config"></pre></details>
    </div>
  </div>`;

const banner = document.getElementById("banner")!;
const statusLine = document.getElementById("status")!;
const menusBox = document.getElementById("menus")!;
const configBox = document.getElementById("config")!;
const pad = document.getElementById("pad")!;
const controls = document.getElementById("controls")!;
const patchCanvas = document.getElementById("patches") as HTMLCanvasElement;
const agentCanvas = document.getElementById("agents") as HTMLCanvasElement;

const CELL = 4;

function surfaceFor(canvas: HTMLCanvasElement): Surface {
  const ctx = canvas.getContext("2d")!;
  return {
    fillCell(x, y, color) {
      ctx.fillStyle = color;
      ctx.fillRect(x * CELL, y * CELL, CELL, CELL);
    },
  };
}

let patchSurface = surfaceFor(patchCanvas);
let agentSurface = surfaceFor(agentCanvas);
let throttle = new SteeringThrottle(100);
let conn: Connection;

function resizeCanvases(vm: ViewModel) {
  const w = vm.width * CELL;
  const h = vm.height * CELL;
  if (patchCanvas.width !== w || patchCanvas.height !== h) {
    for (const canvas of [patchCanvas, agentCanvas]) {
      canvas.width = w;
      canvas.height = h;
    }
    patchSurface = surfaceFor(patchCanvas);
    agentSurface = surfaceFor(agentCanvas);
  }
}

function renderMenus(vm: ViewModel) {
  menusBox.innerHTML = "";
  for (const menu of vm.menus.values()) {
    const box = document.createElement("div");
    box.className = "menu";
    const title = document.createElement("h3");
    title.textContent = menu.label;
    box.appendChild(title);
    for (const option of menu.options) {
      const row = document.createElement("button");
      row.className = "option";
      const votes = menu.tally[option.id] ?? 0;
      row.textContent = votes > 0 ? `${option.label}  (${votes})` : option.label;
      row.addEventListener("click", () => {
        conn.send(vm.choiceFrame(menu.id, option.id));
      });
      box.appendChild(row);
    }
    menusBox.appendChild(box);
  }
}

let lastMenuRender = "";

function render(vm: ViewModel) {
  resizeCanvases(vm);
  if (vm.connection === "closed") {
    banner.classList.remove("hidden");
    banner.innerHTML = `connection lost <button id="retry">retry</button>`;
    document.getElementById("retry")?.addEventListener("click", () => location.reload());
  }
  const metrics = Object.entries(vm.metrics)
    .map(([k, v]) => `${k}=${Number.isInteger(v) ? v : v.toFixed(3)}`)
    .join("  ");
  const pendingNote = vm.pending.length > 0 ? `  [${vm.pending.length} pending]` : "";
  statusLine.textContent =
    `${vm.session} tick ${vm.modelTick}  ${metrics}` +
    `  you: ${vm.role ?? "?"}${vm.agentId !== null ? ` (agent ${vm.agentId})` : ""}` +
    pendingNote + (vm.finished ? "  [finished]" : "");
  pad.classList.toggle("hidden", vm.agentId === null);
  controls.classList.toggle("hidden", vm.role !== "facilitator");
  configBox.textContent = JSON.stringify(vm.config, null, 2);
  const menuKey = JSON.stringify([...vm.menus.values()].map((m) => [m.id, m.tally]));
  if (menuKey !== lastMenuRender) {
    lastMenuRender = menuKey;
    renderMenus(vm);
  }
}

// rendering is pull-based: one repaint per animation frame at most
let scheduled = false;
function scheduleRender(vm: ViewModel) {
  if (scheduled) {
    return;
  }
  scheduled = true;
  requestAnimationFrame(() => {
    scheduled = false;
    paintPatches(vm, patchSurface);
    if (vm.agentsDirty) {
      const ctx = agentCanvas.getContext("2d")!;
      ctx.clearRect(0, 0, agentCanvas.width, agentCanvas.height);
      paintAgents(vm, agentSurface);
    }
    render(vm);
  });
}

conn = connect(serverUrl, sessionId, userName, scheduleRender, () => {});

function steer(key: string) {
  const action = actionForKey(key);
  if (!action || conn.vm.agentId === null) {
    return;
  }
  const allowed = throttle.offer(action);
  if (allowed) {
    const frame = conn.vm.steerFrame(allowed);
    if (frame) {
      conn.send(frame);
    }
  }
}

document.addEventListener("keydown", (event) => {
  if (actionForKey(event.key)) {
    event.preventDefault();
    steer(event.key);
  }
});
pad.querySelectorAll("button").forEach((button) => {
  button.addEventListener("click", () => steer(button.dataset.key!));
});
document.getElementById("pause")!.addEventListener("click", () => conn.send({ t: "pause" }));
document.getElementById("resume")!.addEventListener("click", () => conn.send({ t: "resume" }));

// gamepad polling: the stick maps to set_heading in the shared convention
function pollGamepad() {
  const gp = navigator.getGamepads?.()[0];
  if (gp) {
    const heading = headingFromAxes(gp.axes[0] ?? 0, -(gp.axes[1] ?? 0));
    if (heading !== null && conn.vm.agentId !== null) {
      const allowed = throttle.offer({ kind: "set_heading", degrees: heading });
      if (allowed) {
        const frame = conn.vm.steerFrame(allowed);
        if (frame) {
          conn.send(frame);
        }
      }
    }
  }
  requestAnimationFrame(pollGamepad);
}
pollGamepad();

// keep the throttle aligned with the session tick rate once config arrives
const tickRateWatch = setInterval(() => {
  const cfg = conn.vm.config as { tick_rate_hz?: number } | null;
  if (cfg?.tick_rate_hz) {
    throttle = new SteeringThrottle(1000 / cfg.tick_rate_hz);
    clearInterval(tickRateWatch);
  }
}, 500);
