"""Detector architecture and training hyperparameter configs."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

MAP_SIZE = 14
INPUT_SIZE = 224

# (conv blocks, output channels) per stage; a 2x pool follows each stage,
# taking 224 down to the 14x14 score map at stride 16.
PRESETS: dict[str, tuple[tuple[int, int], ...]] = {
    # Ends in 14x14x384 at stride 16; ~2.9M params / ~4.7 GMac at 224x224,
    # the magnitude of the dense backbone it stands in for.
    "paper-scale": ((1, 48), (1, 96), (3, 192), (2, 384)),
    # Small CPU-friendly stack ending in 14x14x32.
    "desk-scale": ((1, 8), (1, 16), (1, 24), (1, 32)),
}


@dataclass(frozen=True)
class ModelConfig:
    in_channels: int
    stages: tuple[tuple[int, int], ...]
    preset: str = "custom"

    def __post_init__(self):
        if self.in_channels < 1:
            raise ValueError(f"in_channels must be >= 1, got {self.in_channels}")
        if not self.stages:
            raise ValueError("need at least one stage")
        object.__setattr__(self, "stages", tuple(tuple(s) for s in self.stages))

    @classmethod
    def from_preset(cls, preset: str, in_channels: int) -> "ModelConfig":
        if preset not in PRESETS:
            raise ValueError(f"unknown preset {preset!r}; have {sorted(PRESETS)}")
        return cls(in_channels=in_channels, stages=PRESETS[preset], preset=preset)

    @property
    def feature_channels(self) -> int:
        return self.stages[-1][1]

    @property
    def embedding_dim(self) -> int:
        return self.feature_channels

    def to_dict(self) -> dict:
        return {"in_channels": self.in_channels, "stages": [list(s) for s in self.stages],
                "preset": self.preset}

    @classmethod
    def from_dict(cls, d: dict) -> "ModelConfig":
        return cls(in_channels=d["in_channels"], stages=tuple(tuple(s) for s in d["stages"]),
                   preset=d.get("preset", "custom"))


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 1e-4
    weight_decay: float = 1e-5
    epochs: int = 30
    batch_size: int = 32
    flip_probability: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.weight_decay < 0:
            raise ValueError("learning_rate must be positive, weight_decay non-negative")
        if self.epochs < 0 or self.batch_size < 1:
            raise ValueError("epochs must be >= 0 and batch_size >= 1")
        if not 0 <= self.flip_probability <= 1:
            raise ValueError("flip_probability must lie in [0, 1]")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        return cls(**d)
