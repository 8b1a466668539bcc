"""Deterministic training loop, scoring and feature extraction."""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np
import torch

from mcpad.dataset.records import SampleRecord
from mcpad.models.checkpoint import Checkpoint
from mcpad.models.config import ModelConfig, TrainConfig
from mcpad.models.loss import pixbis_loss
from mcpad.models.net import PixBiSNet, build_model
from mcpad.preprocess import ChannelCube, SubCube, combo_channel_names, select_channels
from mcpad.protocols import ProtocolDefinition


class TrainingError(RuntimeError):
    pass


class CubeSource(Protocol):
    def frames(self, sample_id: str) -> list[ChannelCube]: ...


class InMemoryCubeSource:
    def __init__(self, cubes: dict[str, list[ChannelCube]]):
        self._cubes = cubes

    def frames(self, sample_id: str) -> list[ChannelCube]:
        if sample_id not in self._cubes:
            raise KeyError(sample_id)
        return self._cubes[sample_id]


def _as_channels_first(cube, combo: str, in_channels: int) -> np.ndarray:
    """Select the combo channels and return (C, H, W) float32."""
    if isinstance(cube, (ChannelCube, SubCube)):
        wanted = combo_channel_names(combo)
        if isinstance(cube, SubCube) and cube.channel_names == wanted:
            data = cube.data
        else:
            data = select_channels(cube, combo).data
    else:
        data = np.asarray(cube)
        if data.ndim != 3 or data.shape[2] != in_channels:
            raise ValueError(
                f"expected an aligned cube with the {in_channels} channels of combo {combo!r}, "
                f"got array of shape {data.shape}"
            )
    return np.ascontiguousarray(data.transpose(2, 0, 1)).astype(np.float32)


def _load_fold(
    protocol: ProtocolDefinition,
    fold: str,
    cubes: CubeSource,
    combo: str,
    in_channels: int,
) -> list[tuple[str, np.ndarray]]:
    out = []
    for sid in protocol.folds[fold]:
        try:
            frames = cubes.frames(sid)
        except (KeyError, FileNotFoundError):
            raise TrainingError(f"missing cube files for sample {sid!r} ({fold} fold)") from None
        if not frames:
            raise TrainingError(f"missing cube files for sample {sid!r} ({fold} fold)")
        for frame in frames:
            # float16 keeps the epoch cache small; batches are cast back up.
            out.append((sid, _as_channels_first(frame, combo, in_channels).astype(np.float16)))
    return out


def _batch_tensor(entries, idx, flips=None) -> torch.Tensor:
    arrs = []
    for j, i in enumerate(idx):
        a = entries[i][1].astype(np.float32)
        if flips is not None and flips[j]:
            a = a[:, :, ::-1].copy()
        arrs.append(a)
    return torch.from_numpy(np.stack(arrs))


def _epoch_loss(model, entries, labels, batch_size) -> float:
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(entries), batch_size):
            idx = range(start, min(start + batch_size, len(entries)))
            x = _batch_tensor(entries, idx)
            y = torch.tensor([labels[entries[i][0]] for i in idx], dtype=torch.float32)
            score_map, binary_prob, _ = model(x)
            loss = pixbis_loss(score_map, binary_prob, y)
            total += float(loss) * len(x)
            count += len(x)
    return total / max(count, 1)


def train(
    protocol: ProtocolDefinition,
    combo: str,
    model_cfg: ModelConfig,
    train_cfg: TrainConfig,
    cubes: CubeSource,
    manifest: Sequence[SampleRecord],
) -> Checkpoint:
    """Train on the protocol's train fold, keep the lowest-dev-loss weights.

    Fully deterministic under train_cfg.seed: fixed init, shuffle and
    augmentation streams. epochs = 0 returns the initialisation untouched.
    """
    names = combo_channel_names(combo)
    if model_cfg.in_channels != len(names):
        raise TrainingError(
            f"model expects {model_cfg.in_channels} channels but combo {combo!r} has {len(names)}"
        )
    for fold in ("train", "dev"):
        if not protocol.folds[fold]:
            raise TrainingError(f"protocol {protocol.name!r} has an empty {fold} fold")

    labels = {r.sample_id: 1.0 if r.is_bonafide else 0.0 for r in manifest}
    train_entries = _load_fold(protocol, "train", cubes, combo, model_cfg.in_channels)
    dev_entries = _load_fold(protocol, "dev", cubes, combo, model_cfg.in_channels)

    model = build_model(model_cfg, seed=train_cfg.seed)
    optimiser = torch.optim.Adam(
        model.parameters(), lr=train_cfg.learning_rate, weight_decay=train_cfg.weight_decay
    )
    rng = np.random.default_rng(train_cfg.seed)

    best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}
    best_epoch: int | None = None
    best_dev = np.inf
    curve: list[dict] = []

    for epoch in range(train_cfg.epochs):
        model.train()
        perm = rng.permutation(len(train_entries))
        total, count = 0.0, 0
        for start in range(0, len(perm), train_cfg.batch_size):
            idx = perm[start : start + train_cfg.batch_size]
            flips = rng.random(len(idx)) < train_cfg.flip_probability
            x = _batch_tensor(train_entries, idx, flips)
            y = torch.tensor([labels[train_entries[i][0]] for i in idx], dtype=torch.float32)
            optimiser.zero_grad()
            score_map, binary_prob, _ = model(x)
            loss = pixbis_loss(score_map, binary_prob, y)
            loss.backward()
            optimiser.step()
            total += float(loss.detach()) * len(idx)
            count += len(idx)
        train_loss = total / max(count, 1)
        dev_loss = _epoch_loss(model, dev_entries, labels, train_cfg.batch_size)
        curve.append({"epoch": epoch, "train_loss": train_loss, "dev_loss": dev_loss})
        if dev_loss < best_dev:
            best_dev = dev_loss
            best_epoch = epoch
            best_state = {k: v.detach().clone() for k, v in model.state_dict().items()}

    model.load_state_dict(best_state)
    return Checkpoint.from_model(model, train_cfg, combo, best_epoch=best_epoch, curve=curve)


def _forward_cubes(ckpt: Checkpoint, cubes, model: PixBiSNet | None = None):
    if model is None:
        model = ckpt.to_model()
    xs = [_as_channels_first(c, ckpt.combo, ckpt.model_cfg.in_channels) for c in cubes]
    with torch.no_grad():
        return model(torch.from_numpy(np.stack(xs)))


def score_frames(ckpt: Checkpoint, cubes, model: PixBiSNet | None = None) -> np.ndarray:
    """PAD score per cube: mean of the 14x14 score map; higher = bonafide."""
    score_map, _, _ = _forward_cubes(ckpt, cubes, model)
    return score_map.mean(dim=(1, 2)).numpy().astype(np.float64)


def score(ckpt: Checkpoint, cube) -> float:
    return float(score_frames(ckpt, [cube])[0])


def extract_features(ckpt: Checkpoint, cube, model: PixBiSNet | None = None) -> np.ndarray:
    """Pooled pre-head feature vector; dimension = config embedding_dim."""
    _, _, embedding = _forward_cubes(ckpt, [cube], model)
    return embedding[0].numpy().astype(np.float64)
