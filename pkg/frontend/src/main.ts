import { analyzeClip, ApiError, fetchModelInfo, synthesizeClip } from "./api.js";
import type { SynthesizeRequest } from "./api.js";
import { drawCurvePreview, drawSpectrogram, drawTimeline } from "./plots.js";
import { RenderQueue } from "./queue.js";
import { GuidingClip, ResultHistory } from "./state.js";
import { buildRequest, clampZ, describeZ, resampleCurve, ZControl, Z_LIMIT } from "./zcontrol.js";
import { decodeWav } from "./wav.js";

const MAX_UPLOAD_BYTES = 8 * 1024 * 1024;

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function toBase64(buf: ArrayBuffer): string {
  const bytes = new Uint8Array(buf);
  let bin = "";
  for (let i = 0; i < bytes.length; i += 0x8000) {
    bin += String.fromCharCode(...bytes.subarray(i, i + 0x8000));
  }
  return btoa(bin);
}

let frameCount = 400;
let clip: GuidingClip | null = null;
const control: ZControl = { mode: "encoded", slider: 0, breakpoints: [], seed: 0 };
const queue = new RenderQueue();
const history = new ResultHistory<{ url: string }>();
const cardNodes = new Map<number, HTMLElement>();

function setStatus(text: string, kind: "ok" | "err" = "ok"): void {
  const status = el<HTMLDivElement>("status");
  status.textContent = text;
  status.className = kind;
}

function drawFeatures(): void {
  if (!clip) return;
  const f = clip.features;
  drawTimeline(el("plot-f0"), f.f0, { color: "#6fb3e0", label: "f0 (Hz)", min: 0 });
  drawTimeline(el("plot-loudness"), f.loudness, { color: "#7fd08a", label: "loudness" });
  drawTimeline(el("plot-onset"), f.onset, { color: "#e08a6f", label: "onsets", min: 0 });
  drawTimeline(el("plot-harmonic"), f.harmonic, { color: "#c49ae0", label: "H", min: 0, max: 1 });
}

async function handleUpload(file: File): Promise<void> {
  if (file.size > MAX_UPLOAD_BYTES) {
    setStatus(`file is ${(file.size / 1048576).toFixed(1)} MB, limit is 8 MB`, "err");
    return;
  }
  setStatus(`analyzing ${file.name} ...`);
  const buf = await file.arrayBuffer();
  try {
    const features = await analyzeClip(buf);
    clip = { name: file.name, wavBase64: toBase64(buf), features };
  } catch (err) {
    const detail = err instanceof ApiError ? err.message : String(err);
    setStatus(`could not analyze ${file.name}: ${detail}`, "err");
    return;
  }
  drawFeatures();
  el<HTMLButtonElement>("render").disabled = false;
  setStatus(`${file.name} analyzed, ${clip.features.f0.length} frames`);
}

function makeCard(id: number, zLabel: string, seed: number, wav: ArrayBuffer, url: string): HTMLElement {
  const card = document.createElement("div");
  card.className = "card";
  const title = document.createElement("div");
  title.className = "card-title";
  title.textContent = `#${id} ${zLabel}, seed ${seed}`;
  const audio = document.createElement("audio");
  audio.controls = true;
  audio.src = url;
  const thumb = document.createElement("canvas");
  thumb.width = 240;
  thumb.height = 80;
  try {
    drawSpectrogram(thumb, decodeWav(wav).samples);
  } catch {
    // thumbnail is best-effort; the player still works
  }
  card.append(title, audio, thumb);
  return card;
}

function makeErrorCard(zLabel: string, detail: string, req: SynthesizeRequest): HTMLElement {
  const card = document.createElement("div");
  card.className = "card card-error";
  const title = document.createElement("div");
  title.className = "card-title";
  title.textContent = `${zLabel} failed: ${detail}`;
  const retry = document.createElement("button");
  retry.textContent = "retry";
  const dismiss = document.createElement("button");
  dismiss.textContent = "dismiss";
  retry.addEventListener("click", () => {
    card.remove();
    queue.submit(() => renderRequest(req, zLabel));
  });
  dismiss.addEventListener("click", () => card.remove());
  card.append(title, retry, dismiss);
  return card;
}

async function renderRequest(req: SynthesizeRequest, zLabel: string): Promise<void> {
  const results = el<HTMLDivElement>("results");
  setStatus("rendering ...");
  try {
    const wav = await synthesizeClip(req);
    const url = URL.createObjectURL(new Blob([wav], { type: "audio/wav" }));
    const entry = history.add(zLabel, req.seed ?? 0, { url });
    const card = makeCard(entry.id, zLabel, entry.seed, wav, url);
    cardNodes.set(entry.id, card);
    results.prepend(card);
    setStatus(`rendered #${entry.id}`);
  } catch (err) {
    const detail = err instanceof ApiError ? err.message : String(err);
    results.prepend(makeErrorCard(zLabel, detail, req));
    setStatus("render failed", "err");
  }
}

function submitRender(): void {
  if (!clip) return;
  const source = { wavBase64: clip.wavBase64 };
  let req: SynthesizeRequest;
  try {
    req = buildRequest(control, source, frameCount);
  } catch (err) {
    setStatus(String(err), "err");
    return;
  }
  queue.submit(() => renderRequest(req, describeZ(control)));
}

function refreshCurvePreview(): void {
  drawCurvePreview(el("curve-preview"), resampleCurve(control.breakpoints, 200), Z_LIMIT);
}

function renderBreakpointRows(): void {
  const holder = el<HTMLDivElement>("breakpoints");
  holder.textContent = "";
  control.breakpoints.forEach((bp, idx) => {
    const row = document.createElement("div");
    row.className = "bp-row";
    const time = document.createElement("input");
    time.type = "number";
    time.min = "0";
    time.max = "1";
    time.step = "0.05";
    time.value = bp.time.toFixed(2);
    const value = document.createElement("input");
    value.type = "number";
    value.min = String(-Z_LIMIT);
    value.max = String(Z_LIMIT);
    value.step = "0.1";
    value.value = bp.value.toFixed(1);
    const remove = document.createElement("button");
    remove.textContent = "x";
    time.addEventListener("change", () => {
      bp.time = Math.min(1, Math.max(0, Number(time.value) || 0));
      time.value = bp.time.toFixed(2);
      refreshCurvePreview();
    });
    value.addEventListener("change", () => {
      bp.value = clampZ(Number(value.value));
      value.value = bp.value.toFixed(1);
      refreshCurvePreview();
    });
    remove.addEventListener("click", () => {
      control.breakpoints.splice(idx, 1);
      renderBreakpointRows();
      refreshCurvePreview();
    });
    row.append(time, value, remove);
    holder.append(row);
  });
}

function switchMode(): void {
  el("slider-box").hidden = control.mode !== "constant";
  el("curve-box").hidden = control.mode !== "curve";
}

function wire(): void {
  el<HTMLInputElement>("file").addEventListener("change", (ev) => {
    const input = ev.target as HTMLInputElement;
    const file = input.files?.[0];
    if (file) void handleUpload(file);
    input.value = "";
  });

  const mode = el<HTMLSelectElement>("mode");
  mode.addEventListener("change", () => {
    control.mode = mode.value as ZControl["mode"];
    switchMode();
  });

  const slider = el<HTMLInputElement>("slider");
  const readout = el<HTMLSpanElement>("slider-value");
  slider.addEventListener("input", () => {
    control.slider = clampZ(Number(slider.value));
    readout.textContent = control.slider.toFixed(2);
  });
  // releasing the slider mid-render parks one trailing request in the queue
  slider.addEventListener("change", () => submitRender());

  el<HTMLButtonElement>("add-bp").addEventListener("click", () => {
    const last = control.breakpoints[control.breakpoints.length - 1];
    control.breakpoints.push({ time: last ? Math.min(1, last.time + 0.25) : 0, value: 0 });
    renderBreakpointRows();
    refreshCurvePreview();
  });

  const seed = el<HTMLInputElement>("seed");
  seed.addEventListener("change", () => {
    control.seed = Math.max(0, Math.floor(Number(seed.value) || 0));
    seed.value = String(control.seed);
  });

  el<HTMLButtonElement>("render").addEventListener("click", () => submitRender());

  history.onEvict = (entry) => {
    URL.revokeObjectURL(entry.payload.url);
    cardNodes.get(entry.id)?.remove();
    cardNodes.delete(entry.id);
  };
}

async function init(): Promise<void> {
  wire();
  switchMode();
  refreshCurvePreview();
  try {
    const info = await fetchModelInfo();
    frameCount = info.frames.frame_count;
    el("model-info").textContent =
      `checkpoint step ${info.step}, ${info.frames.frame_count} frames of ` +
      `${info.frames.frame_size} samples at ${info.frames.sample_rate} Hz`;
  } catch {
    setStatus("service unreachable; is the server running?", "err");
  }
}

void init();
