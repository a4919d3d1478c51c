/**
 * Just enough spectral machinery to draw thumbnails client-side: an
 * iterative radix-2 FFT and a Hann-windowed magnitude spectrogram.
 */

/** In-place complex FFT. Both arrays must share a power-of-two length. */
export function fft(re: Float64Array, im: Float64Array): void {
  const n = re.length;
  if (n !== im.length || (n & (n - 1)) !== 0 || n === 0) {
    throw new RangeError(`length must be a power of two, got ${n}`);
  }
  // bit-reversal permutation
  for (let i = 1, j = 0; i < n; i++) {
    let bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) {
      [re[i], re[j]] = [re[j], re[i]];
      [im[i], im[j]] = [im[j], im[i]];
    }
  }
  for (let len = 2; len <= n; len <<= 1) {
    const ang = (-2 * Math.PI) / len;
    const wRe = Math.cos(ang);
    const wIm = Math.sin(ang);
    for (let start = 0; start < n; start += len) {
      let curRe = 1;
      let curIm = 0;
      for (let k = 0; k < len / 2; k++) {
        const a = start + k;
        const b = a + len / 2;
        const tRe = re[b] * curRe - im[b] * curIm;
        const tIm = re[b] * curIm + im[b] * curRe;
        re[b] = re[a] - tRe;
        im[b] = im[a] - tIm;
        re[a] += tRe;
        im[a] += tIm;
        const nextRe = curRe * wRe - curIm * wIm;
        curIm = curRe * wIm + curIm * wRe;
        curRe = nextRe;
      }
    }
  }
}

export interface Spectrogram {
  /** Row-major [frame][bin] magnitudes. */
  mags: Float32Array;
  frames: number;
  bins: number;
}

export function magnitudeSpectrogram(
  samples: Float32Array,
  window = 256,
  hop = 128,
): Spectrogram {
  if ((window & (window - 1)) !== 0) throw new RangeError("window must be a power of two");
  const frames = Math.max(1, Math.floor((samples.length - window) / hop) + 1);
  const bins = window / 2 + 1;
  const mags = new Float32Array(frames * bins);
  const hann = new Float64Array(window);
  for (let i = 0; i < window; i++) {
    hann[i] = 0.5 - 0.5 * Math.cos((2 * Math.PI * i) / window);
  }
  const re = new Float64Array(window);
  const im = new Float64Array(window);
  for (let f = 0; f < frames; f++) {
    const start = f * hop;
    for (let i = 0; i < window; i++) {
      re[i] = (samples[start + i] ?? 0) * hann[i];
      im[i] = 0;
    }
    fft(re, im);
    for (let k = 0; k < bins; k++) {
      mags[f * bins + k] = Math.hypot(re[k], im[k]);
    }
  }
  return { mags, frames, bins };
}
