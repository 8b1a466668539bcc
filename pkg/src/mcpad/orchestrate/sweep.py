"""Resumable protocol x combo x scale sweeps and embedding export."""

from __future__ import annotations

import csv
import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mcpad.dataset.records import SampleRecord
from mcpad.evaluation import (
    EmbeddingFile,
    EmbeddingRow,
    ScoreFile,
    ScoreRow,
    compute_metrics,
    save_embeddings,
    save_scores,
    select_threshold,
)
from mcpad.models import Checkpoint, ModelConfig, TrainConfig, save_checkpoint, train
from mcpad.models.train import extract_features, score_frames
from mcpad.orchestrate.workspace import DirectoryCubeSource, Workspace, preprocess_dataset
from mcpad.preprocess import parse_combo
from mcpad.protocols import ProtocolDefinition, load_protocol

SWEEP_CSV_FIELDS = ["protocol", "combo", "scale", "seed", "acer_pct", "apcer_pct",
                    "bpcer_pct", "threshold", "runtime_s", "cell"]


@dataclass
class SweepSpec:
    protocols: list[str]
    combos: list[str]
    scales: list[float] = field(default_factory=lambda: [1.0])
    seeds: list[int] = field(default_factory=lambda: [0])
    preset: str = "desk-scale"
    epochs: int = 30
    learning_rate: float = 1e-4
    batch_size: int = 32
    frames_per_video: int = 10
    bpcer_target: float = 0.01

    def __post_init__(self):
        if not (self.protocols and self.combos and self.scales and self.seeds):
            raise ValueError("sweep axes must be non-empty")
        for combo in self.combos:
            parse_combo(combo)  # fails fast, before any training starts

    def train_config(self, seed: int) -> TrainConfig:
        return TrainConfig(learning_rate=self.learning_rate, epochs=self.epochs,
                           batch_size=self.batch_size, seed=seed)

    def cells(self):
        for protocol in self.protocols:
            for combo in self.combos:
                for scale in self.scales:
                    for seed in self.seeds:
                        yield protocol, combo, scale, seed


def cell_key(protocol: str, combo: str, scale: float, seed: int, spec: SweepSpec) -> str:
    payload = json.dumps(
        {
            "protocol": protocol, "combo": combo, "scale": scale, "seed": seed,
            "preset": spec.preset, "epochs": spec.epochs, "lr": spec.learning_rate,
            "batch_size": spec.batch_size, "frames": spec.frames_per_video,
            "bpcer_target": spec.bpcer_target,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()[:16]


def _sample_scores(ckpt: Checkpoint, cubes: DirectoryCubeSource, protocol: ProtocolDefinition,
                   fold: str, manifest: list[SampleRecord], model=None) -> ScoreFile:
    by_id = {r.sample_id: r for r in manifest}
    rows = []
    for sid in protocol.folds[fold]:
        frames = cubes.frames(sid)
        s = float(np.mean(score_frames(ckpt, frames, model)))
        r = by_id[sid]
        rows.append(ScoreRow(sid, r.label, r.attack_type or "", s))
    return ScoreFile(rows=rows, fold=fold)


def score_fold(ws: Workspace, ckpt: Checkpoint, protocol: ProtocolDefinition, fold: str,
               scale: float = 1.0) -> ScoreFile:
    cubes = DirectoryCubeSource(ws, scale)
    return _sample_scores(ckpt, cubes, protocol, fold, ws.manifest(), model=ckpt.to_model())


def run_cell(ws: Workspace, protocol_name: str, combo: str, scale: float, seed: int,
             spec: SweepSpec) -> dict:
    t0 = time.monotonic()
    key = cell_key(protocol_name, combo, scale, seed, spec)
    manifest = ws.manifest()
    protocol = load_protocol(ws.protocols_dir / f"{protocol_name}.json")
    needed = sorted({sid for fold in protocol.folds.values() for sid in fold})
    preprocess_dataset(ws, scale=scale, frames_per_video=spec.frames_per_video, sample_ids=needed)
    cubes = DirectoryCubeSource(ws, scale)

    model_cfg = ModelConfig.from_preset(spec.preset, in_channels=len(parse_combo(combo)))
    ckpt = train(protocol, combo, model_cfg, spec.train_config(seed), cubes, manifest)
    ws.checkpoints_dir.mkdir(parents=True, exist_ok=True)
    save_checkpoint(ckpt, ws.checkpoints_dir / f"{key}.ckpt")

    model = ckpt.to_model()
    dev_scores = _sample_scores(ckpt, cubes, protocol, "dev", manifest, model)
    test_scores = _sample_scores(ckpt, cubes, protocol, "test", manifest, model)
    ws.scores_dir.mkdir(parents=True, exist_ok=True)
    save_scores(dev_scores, ws.scores_dir / f"{key}_dev.csv")
    save_scores(test_scores, ws.scores_dir / f"{key}_test.csv")

    tau = select_threshold(dev_scores, spec.bpcer_target)
    report = compute_metrics(test_scores, tau)
    return {
        "protocol": protocol_name,
        "combo": combo,
        "scale": scale,
        "seed": seed,
        "acer_pct": report.acer_pct,
        "apcer_pct": report.apcer_pct,
        "bpcer_pct": report.bpcer_pct,
        "threshold": tau,
        "runtime_s": round(time.monotonic() - t0, 3),
        "cell": key,
    }


def _write_results_csv(ws: Workspace, rows: list[dict]) -> Path:
    rows = sorted(rows, key=lambda r: (r["protocol"], r["combo"], r["scale"], r["seed"]))
    out = ws.results_dir / "sweep.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    with open(out, "w", newline="") as f:
        writer = csv.DictWriter(f, fieldnames=SWEEP_CSV_FIELDS)
        writer.writeheader()
        for row in rows:
            writer.writerow({k: row[k] for k in SWEEP_CSV_FIELDS})
    return out


def run_sweep(spec: SweepSpec, ws: Workspace) -> list[dict]:
    """One train+eval cycle per cell; completed cells are skipped by key.

    Cell results live under results/cells/{key}.json; the aggregated CSV is
    regenerated (sorted) on every call, so a completed rerun is a no-op that
    reproduces the identical file.
    """
    ws.cells_dir.mkdir(parents=True, exist_ok=True)
    rows = []
    for protocol, combo, scale, seed in spec.cells():
        key = cell_key(protocol, combo, scale, seed, spec)
        cell_path = ws.cells_dir / f"{key}.json"
        if cell_path.exists():
            rows.append(json.loads(cell_path.read_text()))
            continue
        row = run_cell(ws, protocol, combo, scale, seed, spec)
        cell_path.write_text(json.dumps(row, indent=2, sort_keys=True) + "\n")
        rows.append(row)
    _write_results_csv(ws, rows)
    return rows


def export_embeddings(ws: Workspace, ckpt: Checkpoint, protocol: ProtocolDefinition,
                      fold: str, out_path: str | Path, scale: float = 1.0) -> EmbeddingFile:
    """One embedding row per sample (frame embeddings averaged), as CSV."""
    cubes = DirectoryCubeSource(ws, scale)
    by_id = {r.sample_id: r for r in ws.manifest()}
    model = ckpt.to_model()
    rows = []
    for sid in protocol.folds[fold]:
        try:
            frames = cubes.frames(sid)
        except KeyError:
            raise FileNotFoundError(
                f"no cubes for sample {sid!r} at scale {scale}; run preprocessing first"
            ) from None
        vecs = [extract_features(ckpt, f, model) for f in frames]
        r = by_id[sid]
        rows.append(EmbeddingRow(sid, r.label, r.attack_type or "", np.mean(vecs, axis=0)))
    ef = EmbeddingFile(rows=rows, fold=fold)
    Path(out_path).parent.mkdir(parents=True, exist_ok=True)
    save_embeddings(ef, out_path)
    return ef
