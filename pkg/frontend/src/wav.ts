/**
 * Minimal WAV reader for the service's own output: RIFF/WAVE, PCM 16-bit.
 * Walks the chunk list rather than assuming fixed offsets, since some
 * writers put LIST or fact chunks before the sample data.
 */

export interface DecodedWav {
  sampleRate: number;
  channels: number;
  samples: Float32Array;
}

const PCM_FORMAT = 1;

function tag(view: DataView, offset: number): string {
  return String.fromCharCode(
    view.getUint8(offset),
    view.getUint8(offset + 1),
    view.getUint8(offset + 2),
    view.getUint8(offset + 3),
  );
}

export function decodeWav(buf: ArrayBuffer): DecodedWav {
  const view = new DataView(buf);
  if (buf.byteLength < 44 || tag(view, 0) !== "RIFF" || tag(view, 8) !== "WAVE") {
    throw new Error("not a RIFF/WAVE file");
  }
  let sampleRate = 0;
  let channels = 0;
  let bits = 0;
  let format = 0;
  let dataOffset = -1;
  let dataLength = 0;
  let pos = 12;
  while (pos + 8 <= buf.byteLength) {
    const id = tag(view, pos);
    const size = view.getUint32(pos + 4, true);
    if (id === "fmt ") {
      format = view.getUint16(pos + 8, true);
      channels = view.getUint16(pos + 10, true);
      sampleRate = view.getUint32(pos + 12, true);
      bits = view.getUint16(pos + 22, true);
    } else if (id === "data") {
      dataOffset = pos + 8;
      dataLength = Math.min(size, buf.byteLength - dataOffset);
    }
    pos += 8 + size + (size % 2); // chunks are word-aligned
  }
  if (dataOffset < 0 || sampleRate === 0) throw new Error("missing fmt or data chunk");
  if (format !== PCM_FORMAT || bits !== 16) {
    throw new Error(`unsupported encoding: format ${format}, ${bits}-bit`);
  }
  const frames = Math.floor(dataLength / 2 / channels);
  const samples = new Float32Array(frames);
  for (let i = 0; i < frames; i++) {
    // average interleaved channels down to mono
    let acc = 0;
    for (let c = 0; c < channels; c++) {
      acc += view.getInt16(dataOffset + 2 * (i * channels + c), true);
    }
    samples[i] = acc / channels / 32768;
  }
  return { sampleRate, channels, samples };
}
