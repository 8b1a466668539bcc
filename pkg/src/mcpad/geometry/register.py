"""Reference-indexed registration maps and warping.

A RegistrationMap stores, for every reference-view pixel, the fractional
coordinate in a target sensor's image where that pixel's 3-D point lands.
Maps are built forward from the tagged point cloud, indexed by reference
pixel, so aligning a stream is a single bilinear gather.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from mcpad.geometry.camera import Camera, project_points
from mcpad.geometry.interp import bilinear_sample
from mcpad.geometry.stereo import PointCloud

MAP_MAGIC = b"MCRM"


@dataclass
class RegistrationMap:
    """Per-reference-pixel source coordinates into one target sensor."""

    target_id: str
    src_x: np.ndarray
    src_y: np.ndarray
    valid: np.ndarray
    target_size: tuple[int, int] | None = None  # (height, width) when known

    def __post_init__(self):
        if not (self.src_x.shape == self.src_y.shape == self.valid.shape):
            raise ValueError("src_x, src_y and valid must share a shape")


def build_registration_map(
    cloud: PointCloud,
    target: Camera,
    ref_size: tuple[int, int],
    target_id: str = "",
) -> RegistrationMap:
    """Project a tagged cloud into a target camera, indexed by reference pixel.

    Reference pixels without a point, or whose point lands behind the target
    camera or outside its sensor, come out invalid.
    """
    h, w = ref_size
    if cloud.pixels.size and (
        cloud.pixels.min() < 0 or cloud.pixels[:, 0].max() >= h or cloud.pixels[:, 1].max() >= w
    ):
        raise ValueError("cloud pixel tags fall outside the reference size")

    intr, _ = target
    src_x = np.zeros((h, w), dtype=np.float64)
    src_y = np.zeros((h, w), dtype=np.float64)
    valid = np.zeros((h, w), dtype=bool)
    if cloud.xyz.size:
        uv, in_front = project_points(target, cloud.xyz)
        # Keep samples where full bilinear support exists inside the sensor.
        ok = (
            in_front
            & (uv[:, 0] >= 0) & (uv[:, 0] <= intr.width - 1)
            & (uv[:, 1] >= 0) & (uv[:, 1] <= intr.height - 1)
        )
        rows = cloud.pixels[ok, 0]
        cols = cloud.pixels[ok, 1]
        src_x[rows, cols] = uv[ok, 0]
        src_y[rows, cols] = uv[ok, 1]
        valid[rows, cols] = True
    return RegistrationMap(target_id=target_id, src_x=src_x, src_y=src_y, valid=valid,
                           target_size=(intr.height, intr.width))


def warp_to_reference(target_image: np.ndarray, reg: RegistrationMap) -> tuple[np.ndarray, np.ndarray]:
    """Gather a target image onto the reference grid.

    Returns (aligned, mask): bilinear samples at (src_x, src_y) where the map
    is valid, zeros elsewhere. Raises on a target dimension mismatch.
    """
    if reg.target_size is not None and target_image.shape[:2] != reg.target_size:
        raise ValueError(
            f"target image is {target_image.shape[:2]}, map expects {reg.target_size}"
        )
    sampled, in_bounds = bilinear_sample(target_image, reg.src_x, reg.src_y)
    mask = reg.valid & in_bounds
    if sampled.ndim == 3:
        sampled = np.where(mask[..., None], sampled, 0.0)
    else:
        sampled = np.where(mask, sampled, 0.0)
    return sampled, mask


def save_registration_map(reg: RegistrationMap, path: str | Path) -> None:
    """Persist as the MCRM blob: 16-byte header + float32/uint8 planes."""
    h, w = reg.valid.shape
    with open(path, "wb") as f:
        f.write(MAP_MAGIC)
        f.write(struct.pack("<III", h, w, 0))
        f.write(reg.src_x.astype("<f4").tobytes())
        f.write(reg.src_y.astype("<f4").tobytes())
        f.write(reg.valid.astype(np.uint8).tobytes())


def load_registration_map(path: str | Path, target_id: str = "") -> RegistrationMap:
    raw = Path(path).read_bytes()
    if raw[:4] != MAP_MAGIC:
        raise ValueError(f"{path}: not a registration map blob")
    h, w, _ = struct.unpack("<III", raw[4:16])
    n = h * w
    off = 16
    src_x = np.frombuffer(raw, dtype="<f4", count=n, offset=off).reshape(h, w).astype(np.float64)
    off += 4 * n
    src_y = np.frombuffer(raw, dtype="<f4", count=n, offset=off).reshape(h, w).astype(np.float64)
    off += 4 * n
    valid = np.frombuffer(raw, dtype=np.uint8, count=n, offset=off).reshape(h, w).astype(bool)
    return RegistrationMap(target_id=target_id, src_x=src_x, src_y=src_y, valid=valid)
