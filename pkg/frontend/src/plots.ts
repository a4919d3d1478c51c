/** Canvas drawing for feature timelines and spectrogram thumbnails. */

import { magnitudeSpectrogram } from "./fft.js";

export interface TimelineOptions {
  color: string;
  label: string;
  min?: number;
  max?: number;
}

export function drawTimeline(
  canvas: HTMLCanvasElement,
  values: number[],
  opts: TimelineOptions,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  let lo = opts.min ?? Math.min(...values);
  let hi = opts.max ?? Math.max(...values);
  if (hi - lo < 1e-9) {
    // flat signal: pad the range so the line sits mid-plot instead of on an edge
    hi = lo + 1;
    lo -= 1;
  }
  ctx.strokeStyle = "#39424e";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  ctx.strokeStyle = opts.color;
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  for (let i = 0; i < values.length; i++) {
    const x = (i / Math.max(1, values.length - 1)) * (width - 2) + 1;
    const y = height - 2 - ((values[i] - lo) / (hi - lo)) * (height - 4);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
  ctx.fillStyle = "#9aa7b4";
  ctx.font = "11px system-ui, sans-serif";
  ctx.fillText(opts.label, 6, 13);
}

/** Dark-to-warm ramp; t in [0, 1]. */
function heat(t: number): [number, number, number] {
  const r = Math.min(255, Math.floor(40 + 500 * t));
  const g = Math.floor(20 + 180 * t * t);
  const b = Math.floor(50 + 80 * t * (1 - t) * 4);
  return [r, g, b];
}

export function drawSpectrogram(canvas: HTMLCanvasElement, samples: Float32Array): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const spec = magnitudeSpectrogram(samples);
  const { width, height } = canvas;
  const img = ctx.createImageData(width, height);
  let peak = 1e-9;
  for (let i = 0; i < spec.mags.length; i++) peak = Math.max(peak, spec.mags[i]);
  const floorDb = -70;
  for (let x = 0; x < width; x++) {
    const f = Math.min(spec.frames - 1, Math.floor((x / width) * spec.frames));
    for (let y = 0; y < height; y++) {
      // low bins at the bottom
      const k = Math.min(spec.bins - 1, Math.floor(((height - 1 - y) / height) * spec.bins));
      const mag = spec.mags[f * spec.bins + k];
      const db = 20 * Math.log10(mag / peak + 1e-9);
      const t = Math.min(1, Math.max(0, 1 - db / floorDb));
      const [r, g, b] = heat(t);
      const o = 4 * (y * width + x);
      img.data[o] = r;
      img.data[o + 1] = g;
      img.data[o + 2] = b;
      img.data[o + 3] = 255;
    }
  }
  ctx.putImageData(img, 0, 0);
}

/** Preview of a z curve with the +/- limit band marked. */
export function drawCurvePreview(
  canvas: HTMLCanvasElement,
  curve: number[],
  limit: number,
): void {
  const ctx = canvas.getContext("2d");
  if (!ctx) return;
  const { width, height } = canvas;
  ctx.clearRect(0, 0, width, height);
  ctx.strokeStyle = "#39424e";
  ctx.strokeRect(0.5, 0.5, width - 1, height - 1);
  ctx.strokeStyle = "#4a5560";
  ctx.setLineDash([3, 3]);
  ctx.beginPath();
  ctx.moveTo(0, height / 2);
  ctx.lineTo(width, height / 2);
  ctx.stroke();
  ctx.setLineDash([]);
  ctx.strokeStyle = "#e0b34c";
  ctx.lineWidth = 1.5;
  ctx.beginPath();
  for (let i = 0; i < curve.length; i++) {
    const x = (i / Math.max(1, curve.length - 1)) * width;
    const y = height / 2 - (curve[i] / limit) * (height / 2 - 3);
    if (i === 0) ctx.moveTo(x, y);
    else ctx.lineTo(x, y);
  }
  ctx.stroke();
}
