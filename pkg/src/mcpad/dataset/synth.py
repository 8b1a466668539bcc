"""Seeded synthetic multi-channel face data.

Procedural faces (ellipsoidal depth, smooth albedo, per-channel reflectance
curves) with class signatures that mirror the physics the detector should
exploit: skin shows a deep SWIR reflectance dip near 1450 nm, prints and
replays are geometrically flat and cold, masks have plausible geometry but
no water absorption, and partial attacks alter only a sub-region. Every
signature is gated by a configurable strength so that zero-strength data is
class-indistinguishable. Output trees are byte-identical for a fixed seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from pathlib import Path

import cv2
import numpy as np

from mcpad.dataset.records import ATTACK_TYPES, SampleRecord, save_manifest
from mcpad.preprocess import REGISTRY

PARTIAL_ATTACKS = ("Glasses", "Makeup", "Tattoo")
FLAT_ATTACKS = ("Print", "Replay")

# Relative reflectance per band; skin subtracts the dip, PAIs stay flat.
SWIR_FLAT = np.array([0.50, 0.48, 0.46, 0.44, 0.43, 0.42, 0.41])
SWIR_SKIN_DIP = np.array([0.0, 0.0, 0.0, 0.0, 0.33, 0.12, 0.08])
NIR_FLAT = np.array([0.52, 0.50, 0.48, 0.46])
NIR_SKIN_DIP = np.array([0.06, 0.02, -0.02, -0.05])

SKIN_RGB = np.array([0.88, 0.64, 0.52])
ATTACK_TINT = np.array([0.90, 1.00, 1.10])

# Residual face warmth per class, applied on top of the thermal amplitude.
WARMTH = {"bonafide": 1.0, "Glasses": 1.0, "Makeup": 1.0, "Tattoo": 1.0,
          "Flexiblemask": 0.35, "Papermask": 0.35, "Rigidmask": 0.35,
          "Print": 0.2, "Replay": 0.2, "Mannequin": 0.1}

SPECTRA_GAIN = 3000.0
DEPTH_FACE_MM = 600.0
DEPTH_BG_MM = 1100.0
DEPTH_DOME_MM = 90.0
THERMAL_BG = 300.0
THERMAL_FACE_SPAN = 400.0


def default_counts() -> dict[str, tuple[int, int, int]]:
    counts: dict[str, tuple[int, int, int]] = {"bonafide": (8, 4, 5)}
    counts.update({a: (3, 2, 2) for a in ATTACK_TYPES})
    return counts


@dataclass
class SynthConfig:
    counts: dict[str, tuple[int, int, int]] = field(default_factory=default_counts)
    image_size: tuple[int, int] = (160, 160)  # (height, width)
    frames_per_sample: int = 2
    seed: int = 0
    swir_absorption_depth: float = 1.0
    depth_flatness: float = 1.0
    thermal_amplitude: float = 1.0
    partial_region_strength: float = 1.0
    rgb_tint_strength: float = 1.0

    def __post_init__(self):
        for cls, c in self.counts.items():
            if cls != "bonafide" and cls not in ATTACK_TYPES:
                raise ValueError(f"unknown class {cls!r} in counts")
            if min(c) < 0:
                raise ValueError(f"counts must be >= 0, got {cls}: {c}")

    def zeroed_signatures(self) -> "SynthConfig":
        return replace(self, swir_absorption_depth=0.0, depth_flatness=0.0,
                       thermal_amplitude=0.0, partial_region_strength=0.0,
                       rgb_tint_strength=0.0)


def _smooth_field(rng: np.random.Generator, h: int, w: int, amplitude: float, n_waves: int = 4) -> np.ndarray:
    y, x = np.mgrid[0:h, 0:w].astype(float)
    out = np.zeros((h, w))
    for _ in range(n_waves):
        fx, fy = rng.uniform(0.5, 3.0, 2)
        phase = rng.uniform(0, 2 * np.pi)
        out += rng.uniform(0.4, 1.0) * np.cos(2 * np.pi * (fx * x / w + fy * y / h) + phase)
    return amplitude * out / n_waves


class _FaceGeometry:
    def __init__(self, rng: np.random.Generator, h: int, w: int):
        self.cx = w / 2 + rng.uniform(-0.04, 0.04) * w
        self.cy = h / 2 + rng.uniform(-0.04, 0.04) * h
        self.rx = 0.30 * w * (1 + rng.uniform(-0.08, 0.08))
        self.ry = 0.38 * h * (1 + rng.uniform(-0.08, 0.08))
        y, x = np.mgrid[0:h, 0:w].astype(float)
        self.u = (x - self.cx) / self.rx
        self.v = (y - self.cy) / self.ry
        r2 = self.u**2 + self.v**2
        self.mask = r2 <= 1.0
        self.dome = np.sqrt(np.clip(1.0 - r2, 0.0, None))
        ey = self.cy - 0.25 * self.ry
        ex = 0.42 * self.rx
        self.left_eye = (self.cx - ex, ey)
        self.right_eye = (self.cx + ex, ey)
        self.x, self.y = x, y

    def region_mask(self, attack: str) -> np.ndarray:
        if attack == "Tattoo":
            dx = self.x - (self.cx + 0.45 * self.rx)
            dy = self.y - (self.cy + 0.35 * self.ry)
            return (dx**2 + dy**2 <= (0.28 * self.rx) ** 2) & self.mask
        if attack == "Glasses":
            ey = self.left_eye[1]
            return (np.abs(self.y - ey) < 0.16 * self.ry) & (np.abs(self.x - self.cx) < 0.8 * self.rx) & self.mask
        if attack == "Makeup":
            return (self.y > self.cy + 0.05 * self.ry) & self.mask
        raise ValueError(f"{attack} is not a partial attack")


def _render_sample_frame(cfg: SynthConfig, cls: str, geo: _FaceGeometry, albedo: np.ndarray,
                         tint_jitter: np.ndarray, rng: np.random.Generator) -> dict[str, np.ndarray]:
    h, w = cfg.image_size
    is_attack = cls != "bonafide"
    is_partial = cls in PARTIAL_ATTACKS
    illum = rng.uniform(0.96, 1.04)
    planes: dict[str, np.ndarray] = {}

    # Spectral mixing weight: 0 = skin curve, 1 = PAI curve, per pixel.
    if not is_attack:
        pai_weight = np.zeros((h, w))
    elif is_partial:
        pai_weight = np.where(geo.region_mask(cls), cfg.partial_region_strength, 0.0)
    else:
        pai_weight = np.ones((h, w))

    skin_swir = SWIR_FLAT - cfg.swir_absorption_depth * SWIR_SKIN_DIP
    skin_nir = NIR_FLAT - cfg.swir_absorption_depth * NIR_SKIN_DIP
    for group, skin_curve, flat_curve in (("SWIR", skin_swir, SWIR_FLAT), ("NIR", skin_nir, NIR_FLAT)):
        names = [c.name for c in REGISTRY.channels if c.group == group]
        for i, name in enumerate(names):
            curve = skin_curve[i] + pai_weight * (flat_curve[i] - skin_curve[i])
            val = SPECTRA_GAIN * albedo * curve * illum
            val = np.where(geo.mask, val, SPECTRA_GAIN * 0.06 * illum)
            val *= 1.0 + rng.normal(0.0, 0.04, (h, w))
            planes[name] = np.clip(val, 0, 65535)

    tint = np.ones(3)
    if is_attack:
        tint = 1.0 + cfg.rgb_tint_strength * (ATTACK_TINT - 1.0)
    for i, name in enumerate(("R", "G", "B")):
        face_tint = tint[i] if not is_partial else 1.0 + pai_weight * (tint[i] - 1.0)
        val = 255.0 * albedo * SKIN_RGB[i] * tint_jitter[i] * face_tint * illum
        val = np.where(geo.mask, val, 28.0 * illum)
        val += rng.normal(0.0, 6.0, (h, w))
        planes[name] = np.clip(val, 0, 255)

    dome_scale = 1.0
    if cls in FLAT_ATTACKS:
        dome_scale = 1.0 - cfg.depth_flatness
    depth = DEPTH_FACE_MM - DEPTH_DOME_MM * dome_scale * geo.dome
    depth = np.where(geo.mask, depth, DEPTH_BG_MM)
    depth += rng.normal(0.0, 1.5, (h, w))
    planes["D"] = np.clip(depth, 0, 65535)

    warmth = WARMTH[cls] if is_attack else WARMTH["bonafide"]
    t_face = THERMAL_FACE_SPAN * cfg.thermal_amplitude * warmth
    thermal = THERMAL_BG + t_face * geo.dome
    thermal += rng.normal(0.0, 4.0, (h, w))
    planes["T"] = np.clip(thermal, 0, 65535)

    return planes


def _sample_rng(seed: int, cls_idx: int, fold_idx: int, k: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(cls_idx, fold_idx, k)))


FOLDS = ("train", "dev", "test")


def _write_png(path: Path, img: np.ndarray) -> None:
    # cv2.imwrite signals failure by returning False, not by raising.
    if not cv2.imwrite(str(path), img):
        raise OSError(f"failed to write {path}")


def synth_generate(cfg: SynthConfig, out_dir: str | Path) -> list[SampleRecord]:
    """Write a synthetic dataset tree: manifest.json, fold map and 16-bit PNGs."""
    out = Path(out_dir)
    frames_dir = out / "frames"
    frames_dir.mkdir(parents=True, exist_ok=True)

    classes = ["bonafide"] + [a for a in ATTACK_TYPES if a in cfg.counts]
    records: list[SampleRecord] = []
    fold_assignment: dict[str, str] = {}
    h, w = cfg.image_size

    for fold_idx, fold in enumerate(FOLDS):
        serial = 0
        for cls_idx, cls in enumerate(classes):
            count = cfg.counts.get(cls, (0, 0, 0))[fold_idx]
            for k in range(count):
                rng = _sample_rng(cfg.seed, cls_idx, fold_idx, k)
                geo = _FaceGeometry(rng, h, w)
                albedo = np.clip(0.55 + _smooth_field(rng, h, w, 0.25), 0.25, 0.9)
                for eye in (geo.left_eye, geo.right_eye):
                    r2 = (geo.x - eye[0]) ** 2 + (geo.y - eye[1]) ** 2
                    albedo *= 1.0 - 0.35 * np.exp(-r2 / (2 * (0.06 * geo.rx) ** 2))
                tint_jitter = 1.0 + rng.normal(0.0, 0.05, 3)

                subject = f"{fold[:2]}s{serial // 3:03d}"
                fold_assignment[subject] = fold
                sample_id = f"{fold}_{cls.lower()}_{k:03d}"
                sdir = frames_dir / sample_id
                sdir.mkdir(parents=True, exist_ok=True)

                landmarks = []
                for f in range(cfg.frames_per_sample):
                    planes = _render_sample_frame(cfg, cls, geo, albedo, tint_jitter, rng)
                    for ch in REGISTRY.channels:
                        img = np.floor(planes[ch.name] + 0.5).astype(np.uint16)
                        _write_png(sdir / f"{f:03d}_{ch.file_token}.png", img)
                    landmarks.append({
                        "left_eye": [float(geo.left_eye[0]), float(geo.left_eye[1])],
                        "right_eye": [float(geo.right_eye[0]), float(geo.right_eye[1])],
                    })

                records.append(SampleRecord(
                    sample_id=sample_id,
                    subject_id=subject,
                    session_id="s1",
                    label="bonafide" if cls == "bonafide" else "attack",
                    attack_type=None if cls == "bonafide" else cls,
                    makeup_level=1 if cls == "Makeup" else None,
                    frames=cfg.frames_per_sample,
                    landmarks=landmarks,
                ))
                serial += 1

    save_manifest(records, out / "manifest.json")
    (out / "fold_assignment.json").write_text(
        json.dumps(fold_assignment, indent=2, sort_keys=True) + "\n"
    )
    return records


def load_raw_frame(dataset_dir: str | Path, sample_id: str, frame: int) -> dict[str, np.ndarray]:
    """Read one frame's 16 raw channel planes from the on-disk layout."""
    sdir = Path(dataset_dir) / "frames" / sample_id
    planes = {}
    for ch in REGISTRY.channels:
        path = sdir / f"{frame:03d}_{ch.file_token}.png"
        img = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
        if img is None:
            raise FileNotFoundError(f"missing frame file {path}")
        planes[ch.name] = img.astype(np.float64)
    return planes


def generate_captures(out_dir: str | Path, n_frames: int = 2, size: int = 320) -> None:
    """Emit an inspector workspace: calibration.json plus per-sensor captures.

    Every sensor of the demo rig images the same textured plane, so channel
    overlays align exactly under the stored calibration.
    """
    from mcpad.geometry.camera import save_calibration
    from mcpad.geometry.scene import make_demo_rig, render_plane

    out = Path(out_dir)
    rig = make_demo_rig(size=size, focal=size * 1.375, baseline=0.05)
    save_calibration(rig, out / "calibration.json")
    for i in range(n_frames):
        fdir = out / "captures" / f"frame_{i:03d}"
        fdir.mkdir(parents=True, exist_ok=True)
        plane_z = 0.8 + 0.06 * i
        for sensor_id in rig.cameras:
            img = render_plane(rig.camera(sensor_id), plane_z)
            _write_png(fdir / f"{sensor_id}.png", np.floor(img * 60000 + 0.5).astype(np.uint16))
