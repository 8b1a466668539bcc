"""Labeled multi-channel video data: manifests, fixtures and synthesis."""

from mcpad.dataset.records import (
    ATTACK_TYPES,
    ManifestError,
    SampleRecord,
    load_manifest,
    sample_frames,
    save_manifest,
)
from mcpad.dataset.fixtures import reference_fixture, reference_fold_assignment
from mcpad.dataset.synth import SynthConfig, generate_captures, synth_generate

__all__ = [
    "ATTACK_TYPES",
    "ManifestError",
    "SampleRecord",
    "SynthConfig",
    "generate_captures",
    "load_manifest",
    "reference_fixture",
    "reference_fold_assignment",
    "sample_frames",
    "save_manifest",
    "synth_generate",
]
