"""Sample records, manifest IO and uniform frame sampling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

ATTACK_TYPES = (
    "Flexiblemask",
    "Glasses",
    "Makeup",
    "Mannequin",
    "Papermask",
    "Print",
    "Replay",
    "Rigidmask",
    "Tattoo",
)

IMPERSONATION_ATTACKS = ("Flexiblemask", "Mannequin", "Papermask", "Print", "Replay", "Rigidmask")
OBFUSCATION_ATTACKS = ("Glasses", "Makeup", "Tattoo")


class ManifestError(ValueError):
    """Raised when a manifest fails schema validation; message carries the field path."""


@dataclass
class SampleRecord:
    """One labeled video with per-frame landmark references."""

    sample_id: str
    subject_id: str
    session_id: str
    label: str  # "bonafide" | "attack"
    attack_type: str | None = None
    makeup_level: int | None = None
    wig: bool = False
    retro_glasses: bool = False
    frames: int = 10
    landmarks: list[dict] = field(default_factory=list)

    def __post_init__(self):
        if self.label not in ("bonafide", "attack"):
            raise ManifestError(f"{self.sample_id}: label must be bonafide|attack, got {self.label!r}")
        if self.label == "attack" and self.attack_type not in ATTACK_TYPES:
            raise ManifestError(f"{self.sample_id}: attack requires attack_type, got {self.attack_type!r}")
        if self.label == "bonafide" and self.attack_type is not None:
            raise ManifestError(f"{self.sample_id}: bonafide must not carry attack_type")
        if (self.attack_type == "Makeup") != (self.makeup_level is not None):
            raise ManifestError(f"{self.sample_id}: makeup_level present iff attack_type is Makeup")
        if self.makeup_level is not None and self.makeup_level not in (0, 1, 2):
            raise ManifestError(f"{self.sample_id}: makeup_level must be 0|1|2")

    @property
    def is_bonafide(self) -> bool:
        return self.label == "bonafide"

    def to_dict(self) -> dict:
        d = {
            "sample_id": self.sample_id,
            "subject_id": self.subject_id,
            "session_id": self.session_id,
            "label": self.label,
            "frames": self.frames,
            "landmarks": self.landmarks,
        }
        if self.attack_type is not None:
            d["attack_type"] = self.attack_type
        if self.makeup_level is not None:
            d["makeup_level"] = self.makeup_level
        if self.wig:
            d["wig"] = True
        if self.retro_glasses:
            d["retro_glasses"] = True
        return d


def _record_from_dict(d: dict, where: str) -> SampleRecord:
    for key in ("sample_id", "subject_id", "session_id", "label", "frames"):
        if key not in d:
            raise ManifestError(f"{where}.{key}: missing required field")
    lms = d.get("landmarks", [])
    if not isinstance(lms, list):
        raise ManifestError(f"{where}.landmarks: expected a list")
    for i, lm in enumerate(lms):
        if not isinstance(lm, dict) or "left_eye" not in lm or "right_eye" not in lm:
            raise ManifestError(f"{where}.landmarks[{i}]: needs left_eye and right_eye")
    try:
        return SampleRecord(
            sample_id=d["sample_id"],
            subject_id=d["subject_id"],
            session_id=d["session_id"],
            label=d["label"],
            attack_type=d.get("attack_type"),
            makeup_level=d.get("makeup_level"),
            wig=bool(d.get("wig", False)),
            retro_glasses=bool(d.get("retro_glasses", False)),
            frames=int(d["frames"]),
            landmarks=lms,
        )
    except ManifestError as e:
        raise ManifestError(f"{where}: {e}") from None


def load_manifest(path: str | Path) -> list[SampleRecord]:
    """Read and validate manifest.json; errors carry the offending field path."""
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ManifestError(f"{path}: invalid JSON ({e})") from None
    if not isinstance(raw, list):
        raise ManifestError(f"{path}: manifest must be a JSON array of records")
    records = [_record_from_dict(d, f"records[{i}]") for i, d in enumerate(raw)]
    ids = [r.sample_id for r in records]
    if len(set(ids)) != len(ids):
        dup = sorted({i for i in ids if ids.count(i) > 1})[0]
        raise ManifestError(f"duplicate sample_id {dup!r}")
    return records


def save_manifest(records: list[SampleRecord], path: str | Path) -> None:
    path = Path(path)
    if path.is_dir():
        path = path / "manifest.json"
    path.write_text(json.dumps([r.to_dict() for r in records], indent=2, sort_keys=True) + "\n")


def sample_frames(frame_count: int, n: int = 10) -> list[int]:
    """Uniformly spaced frame indices: round(i*(N-1)/(n-1)), half-up, deduplicated."""
    if frame_count < 1 or n < 1:
        raise ValueError(f"need frame_count >= 1 and n >= 1, got {frame_count}, {n}")
    if n == 1:
        return [0]
    if frame_count <= n:
        return list(range(frame_count))
    idx = [int((i * (frame_count - 1) / (n - 1)) + 0.5) for i in range(n)]
    return sorted(set(idx))
