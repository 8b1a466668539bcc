"""Bilinear sampling shared by rectification and map warping."""

from __future__ import annotations

import numpy as np


def bilinear_sample(image: np.ndarray, x: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Sample `image` at fractional coordinates (x, y).

    Coordinates are valid inside [0, W-1] x [0, H-1]; samples outside are
    returned as 0 with valid=False. Works for 2-D images and (H, W, C) stacks.
    Integer coordinates reproduce the source values exactly.
    """
    h, w = image.shape[:2]
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    valid = np.isfinite(x) & np.isfinite(y) & (x >= 0) & (x <= w - 1) & (y >= 0) & (y <= h - 1)

    xc = np.where(valid, x, 0.0)
    yc = np.where(valid, y, 0.0)
    x0 = np.floor(xc).astype(int)
    y0 = np.floor(yc).astype(int)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    wx = xc - x0
    wy = yc - y0

    img = image.astype(float, copy=False)
    if img.ndim == 3:
        wx = wx[..., None]
        wy = wy[..., None]

    top = img[y0, x0] * (1.0 - wx) + img[y0, x1] * wx
    bot = img[y1, x0] * (1.0 - wx) + img[y1, x1] * wx
    out = top * (1.0 - wy) + bot * wy

    mask = valid[..., None] if img.ndim == 3 else valid
    out = np.where(mask, out, 0.0)
    return out, valid
