"""Model checkpoints.

Layout: 4-byte magic, u32 little-endian header length, a UTF-8 JSON header
(schema, configs, step, seed, named tensor table), then every tensor's raw
little-endian float32 bytes in table order. Optimizer moments ride along
under ``adam_m.`` / ``adam_v.`` prefixes so training can resume exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass

import numpy as np

from .config import RunConfig
from .errors import CheckpointError
from .model import Model
from .optim import Adam

CKPT_MAGIC = b"DSFX"
CKPT_SCHEMA = 1


def save_checkpoint(path, model: Model, config: RunConfig, step: int, optimizer: Adam | None = None) -> None:
    tensors: dict[str, np.ndarray] = {name: p.data for name, p in model.params.items()}
    adam_t = None
    if optimizer is not None:
        tensors.update(optimizer.state_arrays())
        adam_t = optimizer.t
    header = {
        "schema": CKPT_SCHEMA,
        "config": config.to_dict(),
        "step": int(step),
        "seed": int(config.train.seed),
        "adam_t": adam_t,
        "tensors": [{"name": k, "shape": list(v.shape)} for k, v in tensors.items()],
    }
    blob = json.dumps(header).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(CKPT_MAGIC)
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        for v in tensors.values():
            fh.write(np.ascontiguousarray(v, dtype="<f4").tobytes())


@dataclass
class LoadedCheckpoint:
    model: Model
    config: RunConfig
    step: int
    seed: int
    optimizer: Adam | None


def load_checkpoint(path, with_optimizer: bool = False) -> LoadedCheckpoint:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint '{path}': {exc}") from exc
    if raw[:4] != CKPT_MAGIC:
        raise CheckpointError(f"'{path}' is not a checkpoint file")
    if len(raw) < 8:
        raise CheckpointError(f"'{path}' is truncated")
    (header_len,) = struct.unpack("<I", raw[4:8])
    try:
        header = json.loads(raw[8 : 8 + header_len].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"'{path}' has a corrupt header: {exc}") from exc
    if header.get("schema") != CKPT_SCHEMA:
        raise CheckpointError(f"unsupported checkpoint schema {header.get('schema')!r}")

    config = RunConfig.from_dict(header["config"])
    offset = 8 + header_len
    tensors: dict[str, np.ndarray] = {}
    for entry in header["tensors"]:
        shape = tuple(entry["shape"])
        count = int(np.prod(shape)) if shape else 1
        end = offset + count * 4
        if end > len(raw):
            raise CheckpointError(f"'{path}' is truncated at tensor '{entry['name']}'")
        tensors[entry["name"]] = (
            np.frombuffer(raw[offset:end], dtype="<f4").astype(np.float64).reshape(shape)
        )
        offset = end

    model = Model(config.model, seed=header["seed"])
    for name, p in model.params.items():
        if name not in tensors:
            raise CheckpointError(f"checkpoint is missing tensor '{name}'")
        if tensors[name].shape != p.data.shape:
            raise CheckpointError(
                f"tensor '{name}' has shape {tensors[name].shape}, expected {p.data.shape}"
            )
        p.data = tensors[name]

    optimizer = None
    if with_optimizer and header.get("adam_t") is not None:
        moments = {k: v for k, v in tensors.items() if k.startswith(("adam_m.", "adam_v."))}
        optimizer = Adam()
        optimizer.load_state(moments, int(header["adam_t"]))

    return LoadedCheckpoint(
        model=model,
        config=config,
        step=int(header["step"]),
        seed=int(header["seed"]),
        optimizer=optimizer,
    )
