"""Corpus management.

A dataset is the sorted list of WAV files in one directory plus a
deterministic 90/10 train/test assignment drawn from a seed. Preprocessing
ingests each clip to the canonical format, analyzes it, and fills a cache
directory with one feature record and one canonical WAV per clip plus a
manifest; reruns skip clips whose source bytes are unchanged.
"""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import featcache
from .audio_io import ingest, write_wav
from .config import FrameConfig
from .errors import DiffsfxError, InputError
from .features import analyze

log = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"
MANIFEST_SCHEMA = 1
_SPLIT_TAG = 0x5917  # keeps the split stream independent of other seeded draws


@dataclass
class ClipRecord:
    clip_id: str
    path: str
    split: str  # "train" or "test"


@dataclass
class Dataset:
    clips: list[ClipRecord]
    seed: int = 0

    def split(self, name: str) -> list[ClipRecord]:
        return [c for c in self.clips if c.split == name]


@dataclass
class PreprocessReport:
    written: int = 0
    skipped: int = 0
    failed: list = field(default_factory=list)  # {"id", "error"}

    @property
    def total(self) -> int:
        return self.written + self.skipped + len(self.failed)


def build_dataset(wav_dir, seed: int = 0) -> Dataset:
    """Scan a directory and assign every clip to train or test.

    The assignment permutes the sorted file list with a generator derived
    from the seed, so it is stable across runs and machines; the first 10%
    of the permutation (rounded down) becomes the test split.
    """
    wav_dir = Path(wav_dir)
    if not wav_dir.is_dir():
        raise InputError(f"'{wav_dir}' is not a directory")
    names = sorted(f for f in os.listdir(wav_dir) if f.lower().endswith(".wav"))
    if not names:
        raise InputError(f"no WAV files in '{wav_dir}'")
    stems = [Path(n).stem for n in names]
    if len(set(stems)) != len(stems):
        raise InputError("duplicate clip ids after dropping extensions")

    rng = np.random.default_rng(np.random.SeedSequence((seed, _SPLIT_TAG)))
    order = rng.permutation(len(names))
    n_test = int(0.1 * len(names))
    test_indices = set(order[:n_test].tolist())
    clips = [
        ClipRecord(
            clip_id=Path(name).stem,
            path=str(wav_dir / name),
            split="test" if i in test_indices else "train",
        )
        for i, name in enumerate(names)
    ]
    return Dataset(clips=clips, seed=seed)


def preprocess(dataset: Dataset, cache_dir, cfg: FrameConfig = FrameConfig()) -> PreprocessReport:
    """Fill the cache directory; per-clip failures are logged, not fatal."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    report = PreprocessReport()
    manifest_clips = []

    for clip in dataset.clips:
        feat_path = cache_dir / (clip.clip_id + featcache.RECORD_SUFFIX)
        wav_path = cache_dir / (clip.clip_id + featcache.AUDIO_SUFFIX)
        try:
            source = Path(clip.path).read_bytes()
            digest = featcache.content_hash(source)
            if featcache.is_current(feat_path, digest) and wav_path.exists():
                report.skipped += 1
            else:
                audio = ingest(source, cfg)
                ctrl, mel = analyze(audio, cfg)
                featcache.write_record(
                    feat_path, clip.clip_id, digest, featcache.pack_features(ctrl, mel)
                )
                write_wav(wav_path, audio.samples, cfg.sample_rate)
                report.written += 1
            manifest_clips.append(
                {
                    "id": clip.clip_id,
                    "source": clip.path,
                    "split": clip.split,
                    "content_hash": digest,
                }
            )
        except (DiffsfxError, OSError, ValueError) as exc:
            log.warning("skipping clip '%s': %s", clip.clip_id, exc)
            report.failed.append({"id": clip.clip_id, "error": str(exc)})

    manifest = {
        "schema": MANIFEST_SCHEMA,
        "seed": dataset.seed,
        "sample_rate": cfg.sample_rate,
        "n_samples": cfg.n_samples,
        "clips": manifest_clips,
    }
    (cache_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n")
    return report


def load_cache(cache_dir, split: str | None = None) -> list:
    """Read cached clips back as (samples, ControlFrames, mel) training records."""
    cache_dir = Path(cache_dir)
    manifest_path = cache_dir / MANIFEST_NAME
    if not manifest_path.exists():
        raise InputError(f"no manifest in '{cache_dir}'; run preprocess first")
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("schema") != MANIFEST_SCHEMA:
        raise InputError(f"unsupported manifest schema {manifest.get('schema')!r}")

    records = []
    for entry in manifest["clips"]:
        if split is not None and entry["split"] != split:
            continue
        feat_path = cache_dir / (entry["id"] + featcache.RECORD_SUFFIX)
        wav_path = cache_dir / (entry["id"] + featcache.AUDIO_SUFFIX)
        _, arrays = featcache.read_record(feat_path)
        ctrl, mel = featcache.unpack_features(arrays)
        clip = ingest(wav_path)
        records.append((clip.samples, ctrl, mel))
    return records
