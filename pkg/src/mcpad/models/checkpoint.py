"""Checkpoint container: JSON header + raw float32 weight blobs."""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch

from mcpad.models.config import ModelConfig, TrainConfig
from mcpad.models.net import PixBiSNet, build_model

CHECKPOINT_MAGIC = b"MCKP"
CHECKPOINT_VERSION = 1


@dataclass
class Checkpoint:
    model_cfg: ModelConfig
    train_cfg: TrainConfig
    combo: str
    weights: dict[str, np.ndarray]
    best_epoch: int | None = None
    curve: list[dict] = field(default_factory=list)

    @property
    def embedding_dim(self) -> int:
        return self.model_cfg.embedding_dim

    def to_model(self) -> PixBiSNet:
        model = build_model(self.model_cfg, seed=self.train_cfg.seed)
        state = {k: torch.from_numpy(v.copy()) for k, v in self.weights.items()}
        model.load_state_dict(state)
        model.eval()
        return model

    @classmethod
    def from_model(cls, model: PixBiSNet, train_cfg: TrainConfig, combo: str,
                   best_epoch: int | None = None, curve: list[dict] | None = None) -> "Checkpoint":
        weights = {k: v.detach().cpu().numpy().astype(np.float32)
                   for k, v in model.state_dict().items()}
        return cls(model_cfg=model.cfg, train_cfg=train_cfg, combo=combo,
                   weights=weights, best_epoch=best_epoch, curve=curve or [])


def save_checkpoint(ckpt: Checkpoint, path: str | Path) -> None:
    tensors = []
    blobs = []
    for name in sorted(ckpt.weights):
        arr = np.ascontiguousarray(ckpt.weights[name], dtype="<f4")
        tensors.append({"name": name, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = {
        "version": CHECKPOINT_VERSION,
        "model": ckpt.model_cfg.to_dict(),
        "train": ckpt.train_cfg.to_dict(),
        "combo": ckpt.combo,
        "best_epoch": ckpt.best_epoch,
        "curve": ckpt.curve,
        "tensors": tensors,
    }
    payload = json.dumps(header, sort_keys=True).encode()
    with open(path, "wb") as f:
        f.write(CHECKPOINT_MAGIC)
        f.write(struct.pack("<I", len(payload)))
        f.write(payload)
        for blob in blobs:
            f.write(blob)


def load_checkpoint(path: str | Path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if raw[:4] != CHECKPOINT_MAGIC:
        raise ValueError(f"{path}: not a checkpoint file")
    (hlen,) = struct.unpack("<I", raw[4:8])
    header = json.loads(raw[8 : 8 + hlen].decode())
    if header.get("version") != CHECKPOINT_VERSION:
        raise ValueError(f"{path}: unsupported checkpoint version {header.get('version')!r}")
    weights = {}
    off = 8 + hlen
    for spec in header["tensors"]:
        n = int(np.prod(spec["shape"])) if spec["shape"] else 1
        arr = np.frombuffer(raw, dtype="<f4", count=n, offset=off).reshape(spec["shape"])
        weights[spec["name"]] = arr.astype(np.float32)
        off += 4 * n
    return Checkpoint(
        model_cfg=ModelConfig.from_dict(header["model"]),
        train_cfg=TrainConfig.from_dict(header["train"]),
        combo=header["combo"],
        weights=weights,
        best_epoch=header["best_epoch"],
        curve=header["curve"],
    )
