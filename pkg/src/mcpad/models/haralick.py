"""Handcrafted texture baseline: redundant wavelet + co-occurrence statistics.

Each channel is decomposed with a 1-level undecimated Haar transform, every
subband is split into a 4x4 grid, and each cell contributes five gray-level
co-occurrence statistics (contrast, correlation, energy, homogeneity,
entropy) averaged over four unit offsets, with 8-level quantization and
symmetric counting.
"""

from __future__ import annotations

import numpy as np

from mcpad.preprocess import ChannelCube, SubCube

GLCM_LEVELS = 8
GLCM_OFFSETS = ((0, 1), (1, 0), (1, 1), (1, -1))
SUBBAND_ORDER = ("LL", "LH", "HL", "HH")
STAT_ORDER = ("contrast", "correlation", "energy", "homogeneity", "entropy")


def undecimated_haar(channel: np.ndarray) -> dict[str, np.ndarray]:
    """1-level undecimated Haar split; all subbands keep the input size.

    Naming is (vertical filter, horizontal filter): LH is the horizontal
    high-pass (responds to vertical edges), HL the vertical high-pass.
    """
    x = np.asarray(channel, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError(f"expected a 2-D channel, got shape {x.shape}")

    def split(a, axis):
        shifted = np.take(a, list(range(1, a.shape[axis])) + [a.shape[axis] - 1], axis=axis)
        return (a + shifted) / 2.0, (a - shifted) / 2.0

    low_h, high_h = split(x, axis=1)
    ll, hl = split(low_h, axis=0)
    lh, hh = split(high_h, axis=0)
    return {"LL": ll, "LH": lh, "HL": hl, "HH": hh}


def _quantize(cell: np.ndarray, value_range: tuple[float, float]) -> np.ndarray:
    lo, hi = value_range
    q = np.floor((cell - lo) / (hi - lo) * GLCM_LEVELS).astype(int)
    return np.clip(q, 0, GLCM_LEVELS - 1)


def glcm_stats(
    cell: np.ndarray,
    value_range: tuple[float, float] = (0.0, 1.0),
    offsets=GLCM_OFFSETS,
) -> np.ndarray:
    """Five co-occurrence statistics averaged over the given offsets."""
    q = _quantize(np.asarray(cell, dtype=np.float64), value_range)
    i_idx, j_idx = np.meshgrid(np.arange(GLCM_LEVELS), np.arange(GLCM_LEVELS), indexing="ij")
    acc = np.zeros(len(STAT_ORDER))
    h, w = q.shape
    for dy, dx in offsets:
        y0, y1 = max(dy, 0), h + min(dy, 0)
        x0, x1 = max(dx, 0), w + min(dx, 0)
        a = q[y0:y1, x0:x1]
        b = q[y0 - dy : y1 - dy, x0 - dx : x1 - dx]
        P = np.zeros((GLCM_LEVELS, GLCM_LEVELS))
        np.add.at(P, (a.ravel(), b.ravel()), 1.0)
        P = P + P.T  # symmetric counting
        P /= P.sum()

        contrast = float(((i_idx - j_idx) ** 2 * P).sum())
        px = P.sum(axis=1)
        mu = float((np.arange(GLCM_LEVELS) * px).sum())
        var = float((((np.arange(GLCM_LEVELS) - mu) ** 2) * px).sum())
        if var <= 1e-15:
            correlation = 1.0
        else:
            correlation = float((((i_idx - mu) * (j_idx - mu) * P) / var).sum())
        energy = float((P**2).sum())
        homogeneity = float((P / (1.0 + (i_idx - j_idx) ** 2)).sum())
        nz = P[P > 0]
        entropy = float(-(nz * np.log(nz)).sum())
        acc += np.array([contrast, correlation, energy, homogeneity, entropy])
    return acc / len(offsets)


def _grid_cells(band: np.ndarray, grid: int):
    for rows in np.array_split(np.arange(band.shape[0]), grid):
        for cols in np.array_split(np.arange(band.shape[1]), grid):
            yield band[rows[0] : rows[-1] + 1, cols[0] : cols[-1] + 1]


def haralick_features(cube, grid: int = 4) -> np.ndarray:
    """Feature vector of length channels * grid^2 * 4 subbands * 5 stats.

    Channel-major order, cells row-major, subbands LL/LH/HL/HH, statistics
    in STAT_ORDER. The approximation band is quantized over [0, 1], detail
    bands over [-0.5, 0.5].
    """
    if isinstance(cube, (ChannelCube, SubCube)):
        data = cube.data
    else:
        data = np.asarray(cube)
    if data.ndim == 2:
        data = data[..., None]
    feats = []
    for c in range(data.shape[2]):
        bands = undecimated_haar(data[..., c])
        for cells in zip(*[_grid_cells(bands[b], grid) for b in SUBBAND_ORDER]):
            for band_name, cell in zip(SUBBAND_ORDER, cells):
                rng = (0.0, 1.0) if band_name == "LL" else (-0.5, 0.5)
                feats.append(glcm_stats(cell, rng))
    return np.concatenate(feats)
