"""On-disk cache of per-clip conditioning features.

Each clip gets one record file: a single JSON header line naming the clip,
the content hash of its source audio, and an array table, followed by the
raw little-endian float32 bytes of every array in table order. The ingested
(mono, 16 kHz, fixed-length) waveform is stored as a plain WAV beside the
record so training can read its targets from the cache directory alone.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .errors import InputError
from .features import ControlFrames

RECORD_SCHEMA = 1
RECORD_SUFFIX = ".feat"
AUDIO_SUFFIX = ".wav"

# array table order is part of the format
ARRAY_ORDER = ("f0", "confidence", "harmonic", "loudness", "onset", "mel")


def content_hash(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def pack_features(ctrl: ControlFrames, mel: np.ndarray) -> dict[str, np.ndarray]:
    """Arrange one clip's features into the canonical array table."""
    if ctrl.confidence is None:
        raise InputError("record needs the raw pitch confidence track")
    mel = np.asarray(getattr(mel, "magnitudes", mel), dtype=np.float64)
    if mel.ndim != 2 or mel.shape[1] != len(ctrl.f0):
        raise InputError("mel must be [bands, frames] matching the control length")
    return {
        "f0": ctrl.f0,
        "confidence": ctrl.confidence,
        "harmonic": ctrl.harmonic,
        "loudness": ctrl.loudness,
        "onset": ctrl.onset,
        "mel": mel,
    }


def unpack_features(arrays: dict[str, np.ndarray]) -> tuple[ControlFrames, np.ndarray]:
    ctrl = ControlFrames(
        f0=arrays["f0"],
        loudness=arrays["loudness"],
        onset=arrays["onset"],
        harmonic=arrays["harmonic"],
        confidence=arrays["confidence"],
    )
    return ctrl, arrays["mel"]


def write_record(path, clip_id: str, source_hash: str, arrays: dict[str, np.ndarray]) -> None:
    missing = [k for k in ARRAY_ORDER if k not in arrays]
    if missing:
        raise InputError(f"record is missing arrays: {missing}")
    header = {
        "schema": RECORD_SCHEMA,
        "clip_id": clip_id,
        "content_hash": source_hash,
        "dtype": "<f4",
        "arrays": [
            {"name": k, "shape": list(np.asarray(arrays[k]).shape)} for k in ARRAY_ORDER
        ],
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header) + "\n").encode("utf-8"))
        for k in ARRAY_ORDER:
            fh.write(np.ascontiguousarray(arrays[k], dtype="<f4").tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        line = fh.readline()
    try:
        header = json.loads(line.decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise InputError(f"'{path}' is not a feature record: {exc}") from exc
    if header.get("schema") != RECORD_SCHEMA:
        raise InputError(f"'{path}' has unsupported schema {header.get('schema')!r}")
    return header


def read_record(path) -> tuple[dict, dict[str, np.ndarray]]:
    with open(path, "rb") as fh:
        line = fh.readline()
        try:
            header = json.loads(line.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise InputError(f"'{path}' is not a feature record: {exc}") from exc
        if header.get("schema") != RECORD_SCHEMA:
            raise InputError(f"'{path}' has unsupported schema {header.get('schema')!r}")
        arrays = {}
        for entry in header["arrays"]:
            shape = tuple(entry["shape"])
            count = int(np.prod(shape)) if shape else 1
            blob = fh.read(count * 4)
            if len(blob) != count * 4:
                raise InputError(f"'{path}' is truncated at array '{entry['name']}'")
            arrays[entry["name"]] = (
                np.frombuffer(blob, dtype="<f4").astype(np.float64).reshape(shape)
            )
    return header, arrays


def is_current(path, source_hash: str) -> bool:
    """True when the record exists and was built from the same source bytes."""
    if not Path(path).exists():
        return False
    try:
        return read_header(path).get("content_hash") == source_hash
    except InputError:
        return False
