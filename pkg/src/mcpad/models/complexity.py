"""Analytic parameter and multiply-accumulate accounting."""

from __future__ import annotations

from dataclasses import dataclass

from mcpad.models.config import INPUT_SIZE, MAP_SIZE, ModelConfig


@dataclass
class LayerComplexity:
    name: str
    params: int
    macs: int


@dataclass
class ComplexityReport:
    layers: list[LayerComplexity]

    @property
    def params(self) -> int:
        return sum(l.params for l in self.layers)

    @property
    def macs(self) -> int:
        return sum(l.macs for l in self.layers)


def conv2d_complexity(c_in: int, c_out: int, kernel: int, h_out: int, w_out: int,
                      bias: bool = True) -> tuple[int, int]:
    """(params, MACs) of a conv layer; biases count as parameters, not MACs."""
    params = kernel * kernel * c_in * c_out + (c_out if bias else 0)
    macs = kernel * kernel * c_in * c_out * h_out * w_out
    return params, macs


def linear_complexity(c_in: int, c_out: int, bias: bool = True) -> tuple[int, int]:
    return c_in * c_out + (c_out if bias else 0), c_in * c_out


def model_complexity_report(cfg: ModelConfig, input_size: int = INPUT_SIZE) -> ComplexityReport:
    """Exact per-layer accounting for the detector at the given input size."""
    layers: list[LayerComplexity] = []
    size = input_size
    c_in = cfg.in_channels
    for stage_idx, (n_convs, c_out) in enumerate(cfg.stages):
        for conv_idx in range(n_convs):
            params, macs = conv2d_complexity(c_in, c_out, 3, size, size)
            layers.append(LayerComplexity(f"stage{stage_idx}.conv{conv_idx}", params, macs))
            c_in = c_out
        size //= 2
    params, macs = conv2d_complexity(cfg.feature_channels, 1, 1, size, size)
    layers.append(LayerComplexity("map_head", params, macs))
    params, macs = linear_complexity(size * size, 1)
    layers.append(LayerComplexity("binary_head", params, macs))
    assert size == MAP_SIZE or input_size != INPUT_SIZE
    return ComplexityReport(layers=layers)
