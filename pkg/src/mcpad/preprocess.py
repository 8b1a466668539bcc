"""Raw registered frames -> normalized, aligned, stacked channel cubes.

The 16-channel registry is fixed: RGB, stereo depth, thermal, four NIR and
seven SWIR wavelengths. Cubes are 224x224 float planes in [0, 1]; NIR/SWIR
pixels are unit spectral vectors, everything else is 8-bit range divided
by 255. All transforms are pure and deterministic per frame.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import cv2
import numpy as np

CROP_SIZE = 224
# Predefined eye positions inside the 224x224 crop.
LEFT_EYE_TARGET = (63.0, 87.0)
RIGHT_EYE_TARGET = (160.0, 87.0)

MAD_SIGMA_SCALE = 1.4826
MAD_SATURATION_SIGMAS = 4.0

CUBE_MAGIC = b"MCCB"


class PreprocessError(ValueError):
    """Raised for degenerate landmarks, missing channels or bad parameters."""


@dataclass(frozen=True)
class ChannelDescriptor:
    name: str
    group: str
    wavelength_nm: int | None = None

    @property
    def file_token(self) -> str:
        return self.name.lower()


NIR_WAVELENGTHS = (735, 850, 940, 1050)
SWIR_WAVELENGTHS = (940, 1050, 1200, 1300, 1450, 1550, 1650)


class ChannelRegistry:
    """Fixed ordering of the 16 cube channels."""

    def __init__(self):
        chans = [
            ChannelDescriptor("R", "RGB"),
            ChannelDescriptor("G", "RGB"),
            ChannelDescriptor("B", "RGB"),
            ChannelDescriptor("D", "D"),
            ChannelDescriptor("T", "T"),
        ]
        chans += [ChannelDescriptor(f"NIR_{w}nm", "NIR", w) for w in NIR_WAVELENGTHS]
        chans += [ChannelDescriptor(f"SWIR_{w}nm", "SWIR", w) for w in SWIR_WAVELENGTHS]
        self.channels: tuple[ChannelDescriptor, ...] = tuple(chans)
        assert len(self.channels) == 16
        self._by_name = {c.name: i for i, c in enumerate(self.channels)}

    def __len__(self):
        return len(self.channels)

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.channels]

    def index(self, name: str) -> int:
        return self._by_name[name]

    def group_indices(self, group: str) -> list[int]:
        return [i for i, c in enumerate(self.channels) if c.group == group]


REGISTRY = ChannelRegistry()

GROUPS = ("RGB", "D", "T", "NIR", "SWIR")


def parse_combo(combo: str) -> list[int]:
    """Resolve a channel-combination spec like "RGB-SWIR_1450nm" to indices.

    Tokens are registry groups or single wavelength channels, joined by "-".
    The result is de-duplicated and in registry order.
    """
    if not combo or not combo.strip():
        raise PreprocessError("empty channel combination")
    indices: set[int] = set()
    for token in combo.split("-"):
        token = token.strip()
        if token in GROUPS:
            indices.update(REGISTRY.group_indices(token))
        elif token in REGISTRY._by_name:
            indices.add(REGISTRY.index(token))
        else:
            raise PreprocessError(f"unknown channel token {token!r} in combo {combo!r}")
    return sorted(indices)


def combo_channel_names(combo: str) -> list[str]:
    return [REGISTRY.names[i] for i in parse_combo(combo)]


def combo_groups(combo: str) -> list[str]:
    """Distinct sensor groups a combo touches, in registry order."""
    seen = []
    for i in parse_combo(combo):
        g = REGISTRY.channels[i].group
        if g not in seen:
            seen.append(g)
    return seen


@dataclass(frozen=True)
class FaceLandmarks:
    left_eye: tuple[float, float]
    right_eye: tuple[float, float]
    nose: tuple[float, float] | None = None
    mouth_left: tuple[float, float] | None = None
    mouth_right: tuple[float, float] | None = None

    def __post_init__(self):
        if not self.left_eye[0] < self.right_eye[0]:
            raise PreprocessError(
                f"left eye x={self.left_eye[0]} must be left of right eye x={self.right_eye[0]}"
            )

    def scaled(self, factor: float) -> "FaceLandmarks":
        s = lambda p: (p[0] * factor, p[1] * factor)
        return FaceLandmarks(
            left_eye=s(self.left_eye),
            right_eye=s(self.right_eye),
            nose=s(self.nose) if self.nose else None,
            mouth_left=s(self.mouth_left) if self.mouth_left else None,
            mouth_right=s(self.mouth_right) if self.mouth_right else None,
        )


def eye_similarity_transform(lm: FaceLandmarks) -> np.ndarray:
    """2x3 similarity (rotation+scale+translation) sending the eyes to the
    predefined crop positions."""
    src = np.array([lm.left_eye, lm.right_eye], dtype=float)
    dst = np.array([LEFT_EYE_TARGET, RIGHT_EYE_TARGET], dtype=float)
    d_src = src[1] - src[0]
    if np.hypot(*d_src) < 1e-9:
        raise PreprocessError("degenerate landmarks: zero inter-eye distance")
    d_dst = dst[1] - dst[0]
    # Complex ratio gives scale and rotation in one shot.
    m = complex(d_dst[0], d_dst[1]) / complex(d_src[0], d_src[1])
    a, b = m.real, m.imag
    tx = dst[0, 0] - (a * src[0, 0] - b * src[0, 1])
    ty = dst[0, 1] - (b * src[0, 0] + a * src[0, 1])
    return np.array([[a, -b, tx], [b, a, ty]])


def align_face(image: np.ndarray, lm: FaceLandmarks) -> np.ndarray:
    """Warp a raw frame so the eyes land on the crop's predefined positions.

    Accepts single-channel or (H, W, 3) frames; returns a float 224x224 crop
    (or 224x224x3), bilinear, zeros outside the source frame.
    """
    h, w = image.shape[:2]
    for p in (lm.left_eye, lm.right_eye):
        if not (0 <= p[0] < w and 0 <= p[1] < h):
            raise PreprocessError(f"landmark {p} outside frame {w}x{h}")
    A = eye_similarity_transform(lm)
    # Invert the 2x3 affine to gather: src = Ainv @ dst.
    M = np.vstack([A, [0.0, 0.0, 1.0]])
    Minv = np.linalg.inv(M)
    u, v = np.meshgrid(np.arange(CROP_SIZE, dtype=float), np.arange(CROP_SIZE, dtype=float))
    src_x = Minv[0, 0] * u + Minv[0, 1] * v + Minv[0, 2]
    src_y = Minv[1, 0] * u + Minv[1, 1] * v + Minv[1, 2]
    from mcpad.geometry.interp import bilinear_sample

    out, _ = bilinear_sample(image, src_x, src_y)
    return out


def mad_normalize(image: np.ndarray) -> np.ndarray:
    """Median/MAD-based 8-bit range compression.

    v' = clip(127.5 + 127.5 * (v - median) / (4 * sigma), 0, 255), with
    sigma = 1.4826 * MAD, rounded half-up. A constant image (MAD = 0) falls
    back to mid-gray 128. Exactly invariant under v -> a*v + b (a > 0)
    because the ratio (v - median)/MAD is formed before any constants enter.
    """
    img = np.asarray(image, dtype=np.float64)
    if img.size == 0:
        raise PreprocessError("empty image")
    med = np.median(img)
    mad = np.median(np.abs(img - med))
    if mad == 0:
        return np.full(img.shape, 128, dtype=np.uint8)
    r = (img - med) / mad
    scaled = 127.5 + 127.5 * r / (MAD_SATURATION_SIGMAS * MAD_SIGMA_SCALE)
    return np.clip(np.floor(scaled + 0.5), 0, 255).astype(np.uint8)


def unit_spectral_normalize(spectra: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Scale each pixel's wavelength vector to unit Euclidean norm.

    Returns (normalized, zero_flags); all-zero pixels stay zero and are
    flagged instead of having spectra fabricated for them.
    """
    spectra = np.asarray(spectra, dtype=np.float64)
    if spectra.ndim != 3 or spectra.shape[2] not in (len(NIR_WAVELENGTHS), len(SWIR_WAVELENGTHS)):
        raise PreprocessError(f"expected HxWxC with C in {{4, 7}}, got {spectra.shape}")
    norms = np.linalg.norm(spectra, axis=2)
    zero = norms == 0
    out = spectra / np.where(zero, 1.0, norms)[..., None]
    out[zero] = 0.0
    return out, zero


@dataclass
class ChannelCube:
    """Aligned 224x224x16 multi-channel face crop."""

    data: np.ndarray
    sample_id: str = ""
    frame_index: int = 0
    zero_flags: dict[str, np.ndarray] = field(default_factory=dict)
    registry: ChannelRegistry = field(default_factory=lambda: REGISTRY, repr=False)

    def __post_init__(self):
        if self.data.shape != (CROP_SIZE, CROP_SIZE, len(self.registry)):
            raise PreprocessError(f"cube must be {CROP_SIZE}x{CROP_SIZE}x16, got {self.data.shape}")

    @property
    def channel_names(self) -> list[str]:
        return self.registry.names


@dataclass
class SubCube:
    """A channel subset of a cube, keeping its channel names."""

    data: np.ndarray
    channel_names: list[str]


def stack_channels(planes: dict[str, np.ndarray], sample_id: str = "", frame_index: int = 0,
                   zero_flags: dict[str, np.ndarray] | None = None) -> ChannelCube:
    """Stack aligned per-channel planes into a cube in registry order."""
    missing = [name for name in REGISTRY.names if name not in planes]
    if missing:
        raise PreprocessError(f"missing channel(s): {', '.join(missing)}")
    stack = []
    for name in REGISTRY.names:
        p = np.asarray(planes[name], dtype=np.float32)
        if p.shape != (CROP_SIZE, CROP_SIZE):
            raise PreprocessError(f"channel {name}: expected {CROP_SIZE}x{CROP_SIZE}, got {p.shape}")
        stack.append(p)
    data = np.stack(stack, axis=2)
    return ChannelCube(data=data, sample_id=sample_id, frame_index=frame_index,
                       zero_flags=zero_flags or {})


def select_channels(cube: ChannelCube | SubCube, combo: str) -> SubCube:
    """Slice the channels named by a combo, preserving registry order."""
    wanted = combo_channel_names(combo)
    available = cube.channel_names
    missing = [n for n in wanted if n not in available]
    if missing:
        raise PreprocessError(f"combo {combo!r} needs channels absent from cube: {missing}")
    idx = [available.index(n) for n in wanted]
    return SubCube(data=cube.data[..., idx], channel_names=wanted)


def emulate_resolution(frame: np.ndarray, scale: float) -> np.ndarray:
    """Shrink a raw frame by area interpolation to mimic a cheaper sensor.

    The later face crop resize back to 224x224 is the second scaling step.
    scale = 1 returns the frame untouched so the full pipeline stays
    bit-identical to the non-degraded path.
    """
    if not 0 < scale <= 1:
        raise PreprocessError(f"scale must be in (0, 1], got {scale}")
    if scale == 1.0:
        return frame
    h, w = frame.shape[:2]
    nw = int(np.floor(scale * w + 0.5))
    nh = int(np.floor(scale * h + 0.5))
    if nw < 8 or nh < 8:
        raise PreprocessError(f"scale {scale} shrinks {w}x{h} below 8 px ({nw}x{nh})")
    return cv2.resize(frame, (nw, nh), interpolation=cv2.INTER_AREA)


def build_cube(
    raw_planes: dict[str, np.ndarray],
    lm: FaceLandmarks,
    sample_id: str = "",
    frame_index: int = 0,
    scale: float = 1.0,
) -> ChannelCube:
    """Full per-frame pipeline: degrade, align each channel, normalize, stack.

    `raw_planes` maps registry channel names to raw single-channel frames
    (RGB planes carry 8-bit values; depth/thermal/spectra are 16-bit counts).
    """
    degraded = {n: emulate_resolution(np.asarray(p), scale) for n, p in raw_planes.items()}
    lm_s = lm if scale == 1.0 else lm.scaled(scale)
    missing = [n for n in REGISTRY.names if n not in degraded]
    if missing:
        raise PreprocessError(f"missing channel(s): {', '.join(missing)}")
    aligned = {n: align_face(degraded[n], lm_s) for n in REGISTRY.names}

    planes: dict[str, np.ndarray] = {}
    for n in ("R", "G", "B"):
        planes[n] = np.clip(aligned[n], 0, 255).astype(np.float32) / np.float32(255.0)
    for n in ("D", "T"):
        planes[n] = mad_normalize(aligned[n]).astype(np.float32) / np.float32(255.0)

    zero_flags: dict[str, np.ndarray] = {}
    for group, wavelengths in (("NIR", NIR_WAVELENGTHS), ("SWIR", SWIR_WAVELENGTHS)):
        names = [f"{group}_{w}nm" for w in wavelengths]
        spectra = np.stack([aligned[n] for n in names], axis=2)
        normed, zero = unit_spectral_normalize(spectra)
        zero_flags[group] = zero
        for i, n in enumerate(names):
            planes[n] = normed[..., i].astype(np.float32)

    return stack_channels(planes, sample_id=sample_id, frame_index=frame_index, zero_flags=zero_flags)


def save_cube(cube: ChannelCube, path: str | Path, sidecar: dict | None = None) -> None:
    """Write the MCCB container plus a JSON sidecar with provenance."""
    path = Path(path)
    h, w, c = cube.data.shape
    with open(path, "wb") as f:
        f.write(CUBE_MAGIC)
        f.write(struct.pack("<III", h, w, c))
        f.write(np.ascontiguousarray(cube.data.transpose(2, 0, 1)).astype("<f4").tobytes())
    meta = {
        "sample_id": cube.sample_id,
        "frame_index": cube.frame_index,
        "channels": cube.channel_names,
        "zero_pixel_counts": {k: int(v.sum()) for k, v in cube.zero_flags.items()},
    }
    if sidecar:
        meta.update(sidecar)
    path.with_suffix(".json").write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")


def load_cube(path: str | Path) -> ChannelCube:
    path = Path(path)
    raw = path.read_bytes()
    if raw[:4] != CUBE_MAGIC:
        raise PreprocessError(f"{path}: not a channel cube file")
    h, w, c = struct.unpack("<III", raw[4:16])
    data = np.frombuffer(raw, dtype="<f4", count=h * w * c, offset=16).reshape(c, h, w)
    data = np.ascontiguousarray(data.transpose(1, 2, 0))
    meta_path = path.with_suffix(".json")
    sample_id, frame_index = "", 0
    if meta_path.exists():
        meta = json.loads(meta_path.read_text())
        sample_id = meta.get("sample_id", "")
        frame_index = int(meta.get("frame_index", 0))
    return ChannelCube(data=data, sample_id=sample_id, frame_index=frame_index)
