"""Combined binary + pixel-wise binary cross-entropy supervision.

The score map is penalised element-wise against a constant map holding the
sample label (bonafide = 1, attack = 0) and averaged; the global head gets
plain binary cross-entropy. Both terms are weighted 0.5. Probabilities are
clipped to [eps, 1-eps] to keep the loss finite.
"""

from __future__ import annotations

import numpy as np
import torch

EPS = 1e-7


def _bce(p, y, xp):
    return -(y * xp.log(p) + (1.0 - y) * xp.log(1.0 - p))


def pixbis_loss(score_map, binary_prob, label):
    """0.5 * mean map BCE + 0.5 * binary BCE; accepts numpy or torch inputs.

    `label` may be a scalar or a per-sample batch array; batched inputs are
    averaged over the batch.
    """
    if torch.is_tensor(score_map):
        xp = torch
        p_map = torch.clamp(score_map, EPS, 1.0 - EPS)
        p_bin = torch.clamp(binary_prob, EPS, 1.0 - EPS)
        y = label if torch.is_tensor(label) else torch.as_tensor(label, dtype=p_map.dtype)
    else:
        xp = np
        p_map = np.clip(np.asarray(score_map, dtype=np.float64), EPS, 1.0 - EPS)
        p_bin = np.clip(np.asarray(binary_prob, dtype=np.float64), EPS, 1.0 - EPS)
        y = np.asarray(label, dtype=np.float64)
    y_map = y.reshape((-1,) + (1,) * (p_map.ndim - 1)) if getattr(y, "ndim", 0) else y
    l_pix = _bce(p_map, y_map, xp).mean()
    l_bin = _bce(p_bin, y, xp).mean()
    return 0.5 * l_pix + 0.5 * l_bin


def sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def pixbis_loss_grads(map_logits: np.ndarray, binary_logit: np.ndarray, label: float):
    """Analytic gradients of the loss w.r.t. the two head pre-activations.

    For sigmoid + clipped BCE the gradient is (p - y) scaled by the term
    weight and the mean denominators; it vanishes where the probability sits
    in the clipped region.
    """
    z_map = np.asarray(map_logits, dtype=np.float64)
    z_bin = np.asarray(binary_logit, dtype=np.float64)
    p_map = sigmoid(z_map)
    p_bin = sigmoid(z_bin)
    y = float(label)
    live_map = (p_map > EPS) & (p_map < 1.0 - EPS)
    live_bin = (p_bin > EPS) & (p_bin < 1.0 - EPS)
    g_map = 0.5 * (p_map - y) / z_map.size * live_map
    g_bin = 0.5 * (p_bin - y) / z_bin.size * live_bin
    return g_map, g_bin


def pixbis_loss_from_logits(map_logits: np.ndarray, binary_logit: np.ndarray, label: float) -> float:
    """Loss as a function of pre-activations; the finite-difference target."""
    return float(pixbis_loss(sigmoid(np.asarray(map_logits, dtype=np.float64)),
                             sigmoid(np.asarray(binary_logit, dtype=np.float64)), label))
