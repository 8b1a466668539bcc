"""The pixel-wise supervised multi-channel detector.

Channels are stacked at the input; a plain conv stack at stride 16 yields a
14x14 feature tensor, a 1x1 convolution + sigmoid produces the score map,
and a fully connected head on the flattened map gives the global binary
output. The first convolution is always formed from a 3-channel template by
averaging its filters across channels and replicating them, scaled so the
response to spatially constant input is preserved for any channel count.
"""

from __future__ import annotations

import numpy as np
import torch
from torch import nn

from mcpad.models.config import INPUT_SIZE, MAP_SIZE, ModelConfig


def adapt_first_layer(weights3: np.ndarray, target_channels: int) -> np.ndarray:
    """Adapt (out, 3, kh, kw) first-conv weights to `target_channels` inputs.

    Each filter's per-channel kernel becomes the mean over the three source
    channels, replicated and scaled by 3/C so the channel-summed weight (and
    therefore the constant-input response) is unchanged.
    """
    w = np.asarray(weights3, dtype=np.float64)
    if w.ndim != 4 or w.shape[1] != 3:
        raise ValueError(f"expected (out, 3, kh, kw) weights, got {w.shape}")
    if target_channels < 1:
        raise ValueError(f"target channel count must be >= 1, got {target_channels}")
    if target_channels == 3:
        return w.copy()
    mean = w.mean(axis=1, keepdims=True)
    return np.repeat(mean, target_channels, axis=1) * (3.0 / target_channels)


class PixBiSNet(nn.Module):
    def __init__(self, cfg: ModelConfig):
        super().__init__()
        self.cfg = cfg
        first_out = cfg.stages[0][1]

        # 3-channel template drawn first so rigs with different channel
        # subsets share their initial filters under a common seed.
        template = nn.Conv2d(3, first_out, kernel_size=3, padding=1)
        first = nn.Conv2d(cfg.in_channels, first_out, kernel_size=3, padding=1)
        with torch.no_grad():
            adapted = adapt_first_layer(template.weight.detach().numpy(), cfg.in_channels)
            first.weight.copy_(torch.from_numpy(adapted).to(first.weight.dtype))
            first.bias.copy_(template.bias)

        layers: list[nn.Module] = []
        in_c = cfg.in_channels
        for stage_idx, (n_convs, out_c) in enumerate(cfg.stages):
            for conv_idx in range(n_convs):
                if stage_idx == 0 and conv_idx == 0:
                    layers.append(first)
                else:
                    layers.append(nn.Conv2d(in_c, out_c, kernel_size=3, padding=1))
                layers.append(nn.ReLU(inplace=True))
                in_c = out_c
            layers.append(nn.MaxPool2d(2))
        self.backbone = nn.Sequential(*layers)
        self.map_head = nn.Conv2d(cfg.feature_channels, 1, kernel_size=1)
        self.binary_head = nn.Linear(MAP_SIZE * MAP_SIZE, 1)

    def forward(self, x: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Returns (score_map (B,14,14), binary_prob (B,), embedding (B,F))."""
        if x.ndim != 4 or x.shape[1] != self.cfg.in_channels:
            raise ValueError(
                f"expected input (B, {self.cfg.in_channels}, {INPUT_SIZE}, {INPUT_SIZE}), got {tuple(x.shape)}"
            )
        feats = self.backbone(x)
        if feats.shape[-2:] != (MAP_SIZE, MAP_SIZE):
            raise ValueError(f"backbone produced {tuple(feats.shape[-2:])}, expected {MAP_SIZE}x{MAP_SIZE}")
        map_logits = self.map_head(feats).squeeze(1)
        score_map = torch.sigmoid(map_logits)
        binary_logit = self.binary_head(score_map.flatten(1)).squeeze(1)
        binary_prob = torch.sigmoid(binary_logit)
        embedding = feats.mean(dim=(2, 3))
        return score_map, binary_prob, embedding


def build_model(cfg: ModelConfig, seed: int = 0) -> PixBiSNet:
    """Deterministically initialised detector."""
    torch.manual_seed(seed)
    return PixBiSNet(cfg)
