/** Page wiring: builds the five panels from GET /defaults, hooks up the
 * geometry chat, job submission with live polling, and the field views.
 * All solver interaction goes through ApiClient; this file is DOM glue.
 */

import { ApiClient, ApiError } from "./api.js";
import { ChatController } from "./chat.js";
import { contourModel, pointCloudSlice } from "./fieldView.js";
import { LossSeries } from "./lossChart.js";
import { drawMesh } from "./meshView.js";
import { PanelState } from "./panels.js";
import { JobPoller } from "./poller.js";
import type { FieldPayload, JobState, PanelName } from "./types.js";

const api = new ApiClient("");
const chat = new ChatController(api);

const el = <T extends HTMLElement>(id: string): T => {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing #${id}`);
  return node as T;
};

function canvas2d(id: string): [HTMLCanvasElement, CanvasRenderingContext2D] {
  const c = el<HTMLCanvasElement>(id);
  const ctx = c.getContext("2d");
  if (!ctx) throw new Error("no 2d context");
  return [c, ctx];
}

// ---- configuration panels ------------------------------------------------

let panels: PanelState;

function renderPanels(): void {
  const host = el<HTMLDivElement>("panels");
  host.textContent = "";
  for (const name of Object.keys(panels.config) as PanelName[]) {
    const box = document.createElement("fieldset");
    const legend = document.createElement("legend");
    legend.textContent = name;
    box.appendChild(legend);
    for (const [key, value] of Object.entries(panels.config[name])) {
      const label = document.createElement("label");
      label.textContent = `${key} `;
      const input = document.createElement("input");
      input.value = value === null ? "" : JSON.stringify(value);
      input.dataset.path = `${name}.${key}`;
      input.addEventListener("change", () => {
        let parsed: unknown = input.value;
        try {
          parsed = input.value === "" ? null : JSON.parse(input.value);
        } catch {
          /* leave it a string (paths, expressions) */
        }
        panels.set(input.dataset.path!, parsed);
        refreshValidation();
      });
      label.appendChild(input);
      box.appendChild(label);
    }
    host.appendChild(box);
  }
  refreshValidation();
}

function refreshValidation(): void {
  const issues = panels.validate();
  el<HTMLButtonElement>("submit").disabled = issues.length > 0;
  el<HTMLDivElement>("issues").textContent = issues
    .map((i) => `${i.path}: ${i.message}`)
    .join("\n");
}

// ---- geometry chat ---------------------------------------------------------

async function onChatSend(): Promise<void> {
  const input = el<HTMLInputElement>("chat-input");
  const text = input.value.trim();
  if (!text) return;
  input.value = "";
  await chat.sendTurn(text, panels.config.geometry.dim, panels.config.geometry.lc);
  el<HTMLDivElement>("chat-banner").textContent = chat.banner ?? "";
  el<HTMLDivElement>("transcript").textContent = chat.transcript
    .filter((m) => m.role !== "system")
    .map((m) => `${m.role}: ${m.content}`)
    .join("\n\n");
  if (chat.preview) {
    const [c, ctx] = canvas2d("mesh-canvas");
    ctx.clearRect(0, 0, c.width, c.height);
    drawMesh(ctx, chat.preview, c.width, c.height);
  }
}

// ---- job dashboard ---------------------------------------------------------

let poller: JobPoller | null = null;
let jobId: string | null = null;

function drawLoss(series: LossSeries): void {
  const [c, ctx] = canvas2d("loss-canvas");
  ctx.clearRect(0, 0, c.width, c.height);
  ctx.strokeStyle = "#1f77b4";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  const pts = series.toPolyline(c.width, c.height);
  pts.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
  ctx.stroke();
}

function showState(state: JobState): void {
  el<HTMLSpanElement>("job-state").textContent =
    `${state.state}` +
    (state.epoch !== null ? ` @ epoch ${state.epoch}` : "") +
    (state.error ? ` — ${state.error}` : "");
}

function drawField(field: FieldPayload): void {
  const [c, ctx] = canvas2d("field-canvas");
  ctx.clearRect(0, 0, c.width, c.height);
  const pad = 10;
  const scale = Math.min(c.width, c.height) - 2 * pad;
  const dim = field.mesh.dim;
  const xy = (i: number): [number, number] => [
    pad + field.mesh.nodes[i * dim] * scale,
    c.height - pad - field.mesh.nodes[i * dim + 1] * scale,
  ];
  if (dim === 2) {
    const model = contourModel(field);
    for (const tri of model.triangles) {
      ctx.fillStyle = tri.color;
      ctx.beginPath();
      const [x0, y0] = xy(tri.conn[0]);
      ctx.moveTo(x0, y0);
      for (const i of tri.conn.slice(1)) ctx.lineTo(...xy(i));
      ctx.closePath();
      ctx.fill();
    }
    el<HTMLSpanElement>("legend").textContent =
      `min ${model.legend.min.toPrecision(4)}  max ${model.legend.max.toPrecision(4)}`;
  } else {
    const pos = Number(el<HTMLInputElement>("slice-pos").value);
    const model = pointCloudSlice(field, { axis: 2, position: pos, thickness: 0.1 });
    model.indices.forEach((i, k) => {
      ctx.fillStyle = model.colors[k];
      const [x, y] = xy(i);
      ctx.fillRect(x - 2, y - 2, 4, 4);
    });
    el<HTMLSpanElement>("legend").textContent =
      `slice z=${pos}  min ${model.legend.min.toPrecision(4)}  max ${model.legend.max.toPrecision(4)}`;
  }
}

async function onSubmit(): Promise<void> {
  try {
    jobId = (await api.submitJob(panels.config)).id;
  } catch (err) {
    el<HTMLDivElement>("issues").textContent =
      err instanceof ApiError ? err.detail : String(err);
    return;
  }
  poller?.stop();
  poller = new JobPoller(api, jobId, {
    onState: showState,
    onHistory: drawLoss,
    onFinished: async (state, names) => {
      if (state.state === "done" && names.length) {
        const select = el<HTMLSelectElement>("field-select");
        select.textContent = "";
        for (const n of names) {
          const opt = document.createElement("option");
          opt.value = opt.textContent = n;
          select.appendChild(opt);
        }
        const pick = names.includes("dem_magnitude") ? "dem_magnitude" : names[0];
        select.value = pick;
        drawField(await api.jobField(jobId!, pick));
      }
    },
    onError: (err) => showState({ id: jobId!, state: "failed", epoch: null, loss: null, error: String(err) }),
  });
  poller.start();
}

async function onAbort(): Promise<void> {
  if (!jobId) return;
  try {
    const res = await api.abortJob(jobId);
    el<HTMLSpanElement>("job-state").textContent = res.state;
  } catch (err) {
    showState({ id: jobId, state: "failed", epoch: null, loss: null, error: String(err) });
  }
}

// ---- boot -------------------------------------------------------------------

async function boot(): Promise<void> {
  panels = new PanelState(await api.defaults());
  renderPanels();
  el<HTMLButtonElement>("chat-send").addEventListener("click", () => void onChatSend());
  el<HTMLButtonElement>("submit").addEventListener("click", () => void onSubmit());
  el<HTMLButtonElement>("abort").addEventListener("click", () => void onAbort());
  el<HTMLSelectElement>("field-select").addEventListener("change", async (ev) => {
    if (jobId) drawField(await api.jobField(jobId, (ev.target as HTMLSelectElement).value));
  });
}

void boot();
