"""On-disk workspace layout and cube preprocessing jobs."""

from __future__ import annotations

import hashlib
from pathlib import Path

from mcpad.dataset.records import SampleRecord, load_manifest, sample_frames
from mcpad.dataset.synth import load_raw_frame
from mcpad.preprocess import ChannelCube, FaceLandmarks, build_cube, load_cube, save_cube

FRAMES_PER_VIDEO = 10


def scale_tag(scale: float) -> str:
    return f"s{scale:g}"


class Workspace:
    """Fixed directory layout rooted at one experiment workspace."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def raw_dir(self) -> Path:
        return self.root / "raw"

    @property
    def calibration_path(self) -> Path:
        return self.root / "calibration.json"

    @property
    def captures_dir(self) -> Path:
        return self.root / "captures"

    def cubes_dir(self, scale: float = 1.0) -> Path:
        return self.root / "cubes" / scale_tag(scale)

    @property
    def protocols_dir(self) -> Path:
        return self.root / "protocols"

    @property
    def checkpoints_dir(self) -> Path:
        return self.root / "checkpoints"

    @property
    def scores_dir(self) -> Path:
        return self.root / "scores"

    @property
    def results_dir(self) -> Path:
        return self.root / "results"

    @property
    def cells_dir(self) -> Path:
        return self.results_dir / "cells"

    @property
    def embeddings_dir(self) -> Path:
        return self.root / "embeddings"

    def manifest(self) -> list[SampleRecord]:
        return load_manifest(self.raw_dir)

    def rig_hash(self) -> str | None:
        if not self.calibration_path.exists():
            return None
        return hashlib.sha256(self.calibration_path.read_bytes()).hexdigest()[:16]

    def cube_path(self, sample_id: str, frame: int, scale: float = 1.0) -> Path:
        return self.cubes_dir(scale) / sample_id / f"{frame:03d}.mccb"


def preprocess_dataset(
    ws: Workspace,
    scale: float = 1.0,
    frames_per_video: int = FRAMES_PER_VIDEO,
    sample_ids: list[str] | None = None,
) -> int:
    """Build aligned channel cubes for manifest samples; returns cube count.

    Existing cube files are kept (content is deterministic per input). The
    active calibration hash and scale are recorded in every cube sidecar.
    """
    records = ws.manifest()
    if sample_ids is not None:
        wanted = set(sample_ids)
        records = [r for r in records if r.sample_id in wanted]
    rig_hash = ws.rig_hash()
    written = 0
    for record in records:
        out_dir = ws.cubes_dir(scale) / record.sample_id
        out_dir.mkdir(parents=True, exist_ok=True)
        for frame in sample_frames(record.frames, frames_per_video):
            out_path = ws.cube_path(record.sample_id, frame, scale)
            if out_path.exists():
                continue
            planes = load_raw_frame(ws.raw_dir, record.sample_id, frame)
            lm_raw = record.landmarks[frame]
            lm = FaceLandmarks(left_eye=tuple(lm_raw["left_eye"]), right_eye=tuple(lm_raw["right_eye"]))
            cube = build_cube(planes, lm, sample_id=record.sample_id, frame_index=frame, scale=scale)
            save_cube(cube, out_path, sidecar={"rig_hash": rig_hash, "scale": scale})
            written += 1
    return written


class DirectoryCubeSource:
    """Cube provider backed by a workspace's cubes/ tree."""

    def __init__(self, ws: Workspace, scale: float = 1.0):
        self.ws = ws
        self.scale = scale

    def frames(self, sample_id: str) -> list[ChannelCube]:
        sdir = self.ws.cubes_dir(self.scale) / sample_id
        paths = sorted(sdir.glob("*.mccb"))
        if not paths:
            raise KeyError(sample_id)
        return [load_cube(p) for p in paths]
