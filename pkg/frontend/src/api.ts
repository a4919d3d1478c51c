/**
 * Typed client for the synthesis service. The UI is served from the same
 * origin as the API, so all paths are root-relative.
 */

export interface ControlFeatures {
  f0: number[];
  loudness: number[];
  onset: number[];
  harmonic: number[];
}

export interface ModelInfo {
  step: number;
  seed: number;
  frames: {
    frame_size: number;
    frame_count: number;
    sample_rate: number;
    n_samples: number;
  };
  model: {
    hidden_units: number;
    n_harmonics: number;
    n_noise_bands: number;
    n_mel: number;
  };
}

export type ZMode = "encoded" | "constant" | "curve";

export interface SynthesizeRequest {
  features?: ControlFeatures;
  wav_base64?: string;
  z_mode: ZMode;
  z_value?: number;
  z_curve?: number[];
  seed?: number;
}

export class ApiError extends Error {
  status: number;

  constructor(status: number, detail: string) {
    super(detail);
    this.status = status;
  }
}

async function raiseForStatus(res: Response): Promise<void> {
  if (res.ok) return;
  let detail = res.statusText;
  try {
    const body = await res.json();
    if (typeof body.detail === "string") detail = body.detail;
  } catch {
    // non-JSON error body, keep the status text
  }
  throw new ApiError(res.status, detail);
}

export async function fetchModelInfo(): Promise<ModelInfo> {
  const res = await fetch("/model");
  await raiseForStatus(res);
  return res.json();
}

/** POST raw WAV bytes, get per-frame control features back. */
export async function analyzeClip(wav: ArrayBuffer): Promise<ControlFeatures> {
  const res = await fetch("/analyze", {
    method: "POST",
    headers: { "Content-Type": "application/octet-stream" },
    body: wav,
  });
  await raiseForStatus(res);
  return res.json();
}

/** POST a synthesis request, get rendered WAV bytes back. */
export async function synthesizeClip(req: SynthesizeRequest): Promise<ArrayBuffer> {
  const res = await fetch("/synthesize", {
    method: "POST",
    headers: { "Content-Type": "application/json" },
    body: JSON.stringify(req),
  });
  await raiseForStatus(res);
  return res.arrayBuffer();
}
