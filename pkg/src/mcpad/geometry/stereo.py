"""Dense SAD block matching and disparity-to-cloud conversion."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mcpad.geometry.rectify import RectifiedCalibration

UNIQUENESS_RATIO = 1.05


@dataclass
class DisparityMap:
    """Per-pixel horizontal offsets between rectified views, in pixels."""

    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        if self.values.shape != self.valid.shape:
            raise ValueError("values and valid must have the same shape")


@dataclass
class PointCloud:
    """World-frame points tagged with their reference-view pixel of origin."""

    xyz: np.ndarray      # (N, 3) world coordinates, meters
    pixels: np.ndarray   # (N, 2) int (row, col) in the reference view


def _box_sum(a: np.ndarray, block: int) -> np.ndarray:
    """Full-window box sums; output shape (H-block+1, W-block+1)."""
    c = np.cumsum(np.cumsum(a, axis=0, dtype=np.float64), axis=1)
    c = np.pad(c, ((1, 0), (1, 0)))
    return c[block:, block:] - c[:-block, block:] - c[block:, :-block] + c[:-block, :-block]


def compute_disparity(
    left: np.ndarray,
    right: np.ndarray,
    block_size: int = 9,
    max_disparity: int = 128,
) -> DisparityMap:
    """Winner-take-all SAD block matching with sub-pixel refinement.

    Searches d in [0, max_disparity] where pixel (y, x) of the left image is
    matched against (y, x-d) of the right. Pixels failing the uniqueness
    test (runner-up cost within 5% of the best, ignoring the immediate
    disparity neighbours) are marked invalid, which also defeats textureless
    regions. The first max_disparity columns and the window border are
    excluded. Deterministic for fixed inputs.
    """
    left = np.asarray(left, dtype=np.float64)
    right = np.asarray(right, dtype=np.float64)
    if left.shape != right.shape or left.ndim != 2:
        raise ValueError("left/right must be 2-D images of identical shape")
    if block_size < 3 or block_size % 2 == 0:
        raise ValueError(f"block_size must be odd and >= 3, got {block_size}")
    if max_disparity < 1:
        raise ValueError(f"max_disparity must be >= 1, got {max_disparity}")

    h, w = left.shape
    half = block_size // 2
    n_d = max_disparity + 1
    cost = np.full((n_d, h, w), np.inf, dtype=np.float64)
    for d in range(min(n_d, w)):
        ad = np.abs(left[:, d:] - right[:, : w - d])
        sums = _box_sum(ad, block_size)
        if sums.size == 0:
            continue
        cost[d, half : h - half, d + half : w - half] = sums

    best_d = np.argmin(cost, axis=0)
    best = np.take_along_axis(cost, best_d[None], axis=0)[0]
    c_minus = np.take_along_axis(cost, np.maximum(best_d - 1, 0)[None], axis=0)[0]
    c_plus = np.take_along_axis(cost, np.minimum(best_d + 1, n_d - 1)[None], axis=0)[0]

    # Runner-up excluding the best and its immediate neighbours.
    for off in (-1, 0, 1):
        idx = np.clip(best_d + off, 0, n_d - 1)
        np.put_along_axis(cost, idx[None], np.inf, axis=0)
    second = cost.min(axis=0)

    valid = np.isfinite(best) & (second > UNIQUENESS_RATIO * best)
    valid[:half, :] = False
    valid[h - half :, :] = False
    valid[:, : max_disparity] = False
    valid[:, w - half :] = False

    values = best_d.astype(np.float64)
    interior = valid & (best_d > 0) & (best_d < max_disparity) & np.isfinite(c_minus) & np.isfinite(c_plus)
    cm = np.where(interior, c_minus, 0.0)
    cp = np.where(interior, c_plus, 0.0)
    denom = cm - 2.0 * np.where(interior, best, 0.0) + cp
    delta = np.where(denom > 1e-12, (cm - cp) / np.where(denom > 1e-12, 2.0 * denom, 1.0), 0.0)
    values = np.where(interior, values + np.clip(delta, -0.5, 0.5), values)
    values = np.where(valid, values, 0.0)
    return DisparityMap(values=values, valid=valid)


def disparity_to_depth_cloud(
    disp: DisparityMap,
    rect: RectifiedCalibration,
    baseline: float,
) -> PointCloud:
    """Back-project a disparity map into a tagged world-frame point cloud.

    Depth follows Z = fx * baseline / d in the rectified-left camera frame;
    pixels that are invalid or have non-positive disparity are omitted.
    """
    if not baseline > 0:
        raise ValueError(f"baseline must be positive, got {baseline}")
    intr, extr = rect.left
    rows, cols = np.nonzero(disp.valid & (disp.values > 0))
    d = disp.values[rows, cols]
    z = intr.fx * baseline / d
    x = (cols - intr.cx) * z / intr.fx
    y = (rows - intr.cy) * z / intr.fy
    cam_pts = np.stack([x, y, z], axis=1)
    world = extr.to_world(cam_pts)
    return PointCloud(xyz=world, pixels=np.stack([rows, cols], axis=1))
