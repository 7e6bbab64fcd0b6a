// DOM wiring: sliders and angle controls on the left, the slice canvas with
// annotation overlay in the middle, pick/highlight and the command box
// below. All anatomy pixels come from server frames.

import { layoutAnnotations } from "./annotations.js";
import { SessionClient } from "./client.js";
import { RateLimiter } from "./debounce.js";
import { pickRay } from "./math.js";
import type { ClientMessage, PlaneGeometry } from "./protocol.js";
import {
  controlsToSetPlane,
  formatScaleBadge,
  initialState,
  reduce,
  ViewerState,
} from "./state.js";

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

const CANVAS_SIZE = 512;

export function startApp(): void {
  const params = new URLSearchParams(location.search);
  const volume = params.get("volume") ?? "demo";
  const server = params.get("server") ?? `ws://${location.host}/session`;

  let state: ViewerState = initialState();

  const canvas = el<HTMLCanvasElement>("slice-canvas");
  canvas.width = CANVAS_SIZE;
  canvas.height = CANVAS_SIZE;
  const ctx = canvas.getContext("2d")!;
  const banner = el<HTMLDivElement>("banner");
  const badge = el<HTMLSpanElement>("scale-badge");
  const pickLabel = el<HTMLDivElement>("pick-label");
  const structures = el<HTMLUListElement>("structures");
  const historyBox = el<HTMLPreElement>("history");
  const commandInput = el<HTMLInputElement>("command-input");

  const sliders: Record<string, HTMLInputElement> = {};
  for (const k of ["cx", "cy", "cz", "yaw", "pitch", "hu", "hv"]) {
    sliders[k] = el<HTMLInputElement>(`ctl-${k}`);
  }

  const client = new SessionClient(server, volume, {
    onMessage: (msg) => {
      state = reduce(state, msg);
      if (msg.type === "hello") {
        syncControls();
        renderStructureList();
      }
      render();
    },
    onStatus: (status) => {
      state = { ...state, status };
      render();
    },
  });

  const limiter = new RateLimiter<ClientMessage>((m) => client.send(m), 30);

  function syncControls(): void {
    const c = state.controls;
    const meta = state.meta;
    if (meta) {
      sliders.cx.max = String(meta.nx * meta.sx);
      sliders.cy.max = String(meta.ny * meta.sy);
      sliders.cz.min = String(meta.z_table[0]);
      sliders.cz.max = String(meta.z_table[meta.z_table.length - 1]);
      sliders.cz.step = "0.5";
    }
    sliders.cx.value = String(c.cx);
    sliders.cy.value = String(c.cy);
    sliders.cz.value = String(c.cz);
    sliders.yaw.value = String(c.yaw);
    sliders.pitch.value = String(c.pitch);
    sliders.hu.value = String(c.hu);
    sliders.hv.value = String(c.hv);
  }

  function onControlInput(): void {
    state = {
      ...state,
      controls: {
        ...state.controls,
        cx: Number(sliders.cx.value),
        cy: Number(sliders.cy.value),
        cz: Number(sliders.cz.value),
        yaw: Number(sliders.yaw.value),
        pitch: Number(sliders.pitch.value),
        hu: Number(sliders.hu.value),
        hv: Number(sliders.hv.value),
      },
    };
    limiter.submit(controlsToSetPlane(state.controls));
  }
  for (const s of Object.values(sliders)) {
    s.addEventListener("input", onControlInput);
  }

  function renderStructureList(): void {
    structures.innerHTML = "";
    for (const p of state.meta?.palette ?? []) {
      const li = document.createElement("li");
      const swatch = document.createElement("span");
      swatch.className = "swatch";
      swatch.style.background = `rgb(${p.color.join(",")})`;
      li.appendChild(swatch);
      li.appendChild(document.createTextNode(p.name));
      const btn = document.createElement("button");
      btn.textContent = "highlight";
      btn.addEventListener("click", () => {
        client.send({ type: "command", text: `highlight ${p.name}` });
      });
      li.appendChild(btn);
      structures.appendChild(li);
    }
  }

  function frameGeometry(): PlaneGeometry | null {
    const f = state.lastFrame;
    if (!f || f.mode !== "plane") return null;
    return f.geometry as PlaneGeometry;
  }

  function render(): void {
    banner.textContent =
      state.banner ?? (state.status === "connected" ? "" : state.status);
    banner.style.display = banner.textContent ? "block" : "none";

    const f = state.lastFrame;
    badge.textContent = f ? formatScaleBadge(f.scale) : "";
    historyBox.textContent = state.history.slice(-12).join("\n");
    pickLabel.textContent =
      state.pickedName === null
        ? ""
        : state.pickedName || "no structure";

    if (!f || f.mode !== "plane") return;
    const im = new Image();
    const { w, h, png_b64 } = f.images[0];
    im.onload = () => {
      ctx.clearRect(0, 0, CANVAS_SIZE, CANVAS_SIZE);
      ctx.imageSmoothingEnabled = false;
      ctx.drawImage(im, 0, 0, CANVAS_SIZE, CANVAS_SIZE);
      const zoom = CANVAS_SIZE / w;
      ctx.strokeStyle = "#ffd24d";
      ctx.fillStyle = "#ffd24d";
      ctx.font = "12px sans-serif";
      for (const line of layoutAnnotations(state.annotations, w, h, zoom)) {
        ctx.beginPath();
        ctx.moveTo(line.x1, line.y1);
        ctx.lineTo(line.x2, line.y2);
        ctx.stroke();
        ctx.textAlign = line.align;
        ctx.fillText(line.text, line.textX, line.textY);
      }
    };
    im.src = `data:image/png;base64,${png_b64}`;
  }

  canvas.addEventListener("click", (ev) => {
    const g = frameGeometry();
    const f = state.lastFrame;
    if (!g || !f) return;
    const rect = canvas.getBoundingClientRect();
    const { w, h } = f.images[0];
    const i = Math.floor(((ev.clientX - rect.left) / rect.width) * w);
    const j = Math.floor(((ev.clientY - rect.top) / rect.height) * h);
    const ray = pickRay(g, i, j, w, h);
    client.send({ type: "pick", origin: ray.origin, dir: ray.dir });
  });

  el<HTMLFormElement>("command-form").addEventListener("submit", (ev) => {
    ev.preventDefault();
    const text = commandInput.value.trim();
    if (!text) return;
    client.send({ type: "command", text });
    commandInput.value = "";
  });

  client.connect();
}

startApp();
