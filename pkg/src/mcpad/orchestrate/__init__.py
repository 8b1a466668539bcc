"""Experiment runner: workspace layout, sweeps, embedding export, service."""

from mcpad.orchestrate.workspace import DirectoryCubeSource, Workspace, preprocess_dataset
from mcpad.orchestrate.sweep import SweepSpec, export_embeddings, run_sweep, score_fold

__all__ = [
    "DirectoryCubeSource",
    "SweepSpec",
    "Workspace",
    "export_embeddings",
    "preprocess_dataset",
    "run_sweep",
    "score_fold",
]
