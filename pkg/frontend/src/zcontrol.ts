/**
 * Timbre-control state: a global slider value plus an optional breakpoint
 * curve, both clamped to the latent range the model was trained on. The
 * service accepts either a single constant or a per-frame curve, so the
 * breakpoints are resampled to one value per frame before a request goes
 * out.
 */

import type { ControlFeatures, SynthesizeRequest, ZMode } from "./api.js";

/** The model never sees |z| above this during training. */
export const Z_LIMIT = 3;

export interface Breakpoint {
  /** Normalized clip position in [0, 1]. */
  time: number;
  value: number;
}

export interface ZControl {
  mode: ZMode;
  slider: number;
  breakpoints: Breakpoint[];
  seed: number;
}

export function clampZ(value: number): number {
  if (Number.isNaN(value)) return 0;
  return Math.min(Z_LIMIT, Math.max(-Z_LIMIT, value));
}

/**
 * Render breakpoints to exactly `frames` values by linear interpolation.
 * Points may arrive unsorted; positions before the first or after the last
 * breakpoint hold the edge value. No breakpoints means a flat zero curve.
 */
export function resampleCurve(points: Breakpoint[], frames: number): number[] {
  if (frames <= 0) throw new RangeError(`frames must be positive, got ${frames}`);
  const curve = new Array<number>(frames);
  if (points.length === 0) {
    curve.fill(0);
    return curve;
  }
  const sorted = points
    .map((p) => ({ time: Math.min(1, Math.max(0, p.time)), value: clampZ(p.value) }))
    .sort((a, b) => a.time - b.time);
  let seg = 0;
  for (let i = 0; i < frames; i++) {
    const t = frames === 1 ? 0 : i / (frames - 1);
    while (seg + 1 < sorted.length && sorted[seg + 1].time <= t) seg++;
    const a = sorted[seg];
    const b = sorted[Math.min(seg + 1, sorted.length - 1)];
    if (t <= a.time || a.time === b.time) {
      curve[i] = t >= b.time ? b.value : a.value;
    } else {
      const w = (t - a.time) / (b.time - a.time);
      curve[i] = a.value + w * (b.value - a.value);
    }
  }
  return curve;
}

export interface RequestSource {
  wavBase64?: string;
  features?: ControlFeatures;
}

/**
 * Assemble the JSON body for /synthesize. Values pass through clampZ here
 * regardless of what the widgets held, so the request can never carry z
 * outside [-Z_LIMIT, Z_LIMIT].
 */
export function buildRequest(
  control: ZControl,
  source: RequestSource,
  frames: number,
): SynthesizeRequest {
  const req: SynthesizeRequest = {
    z_mode: control.mode,
    seed: control.seed,
  };
  if (source.wavBase64 !== undefined) {
    req.wav_base64 = source.wavBase64;
  } else if (source.features !== undefined) {
    req.features = source.features;
  } else {
    throw new Error("no guiding clip loaded");
  }
  if (control.mode === "constant") {
    req.z_value = clampZ(control.slider);
  } else if (control.mode === "curve") {
    req.z_curve = resampleCurve(control.breakpoints, frames);
  }
  return req;
}

/** Short human-readable summary for a result card, e.g. "z = 1.5". */
export function describeZ(control: ZControl): string {
  if (control.mode === "encoded") return "z encoded from clip";
  if (control.mode === "constant") return `z = ${clampZ(control.slider).toFixed(2)}`;
  if (control.breakpoints.length === 0) return "z curve (flat 0)";
  const vals = control.breakpoints.map((p) => clampZ(p.value));
  return `z curve ${Math.min(...vals).toFixed(1)} to ${Math.max(...vals).toFixed(1)}`;
}
