"""Texture baseline: wavelet split, co-occurrence stats, linear classifier."""

import numpy as np
import pytest

from mcpad.models import (
    fit_linear_classifier,
    glcm_stats,
    haralick_features,
    undecimated_haar,
)
from mcpad.models.haralick import STAT_ORDER


def stat(values: np.ndarray, name: str) -> float:
    return float(values[STAT_ORDER.index(name)])


class TestWavelet:
    def test_constant_input_puts_everything_in_ll(self):
        bands = undecimated_haar(np.full((16, 16), 0.7))
        assert np.allclose(bands["LL"], 0.7)
        for name in ("LH", "HL", "HH"):
            assert np.allclose(bands[name], 0.0)

    def test_shapes_preserved(self):
        rng = np.random.default_rng(0)
        x = rng.uniform(0, 1, (15, 23))
        bands = undecimated_haar(x)
        assert all(b.shape == (15, 23) for b in bands.values())

    def test_vertical_edge_shows_in_horizontal_detail(self):
        x = np.zeros((8, 8))
        x[:, 4:] = 1.0
        bands = undecimated_haar(x)
        assert np.abs(bands["LH"]).max() > 0.4
        assert np.abs(bands["HL"]).max() == 0.0


class TestGlcmStats:
    def test_constant_cell(self):
        out = glcm_stats(np.full((14, 14), 0.4))
        assert stat(out, "contrast") == 0.0
        assert stat(out, "energy") == 1.0
        assert stat(out, "entropy") == 0.0
        assert stat(out, "homogeneity") == 1.0
        assert stat(out, "correlation") == 1.0

    def test_two_level_checkerboard_horizontal_contrast(self):
        # Values quantize to adjacent gray levels, so all co-occurrence mass
        # sits on |i-j| = 1 and the contrast is exactly 1.
        cell = np.indices((12, 12)).sum(axis=0) % 2 * 0.12 + 0.02
        out = glcm_stats(cell, offsets=((0, 1),))
        assert stat(out, "contrast") == 1.0
        assert stat(out, "energy") == pytest.approx(0.5)

    def test_checkerboard_diagonal_offset_matches(self):
        cell = np.indices((12, 12)).sum(axis=0) % 2 * 0.12 + 0.02
        out = glcm_stats(cell, offsets=((1, 1),))
        assert stat(out, "contrast") == 0.0


class TestHaralickFeatures:
    def test_vector_length(self):
        rng = np.random.default_rng(1)
        cube = rng.uniform(0, 1, (224, 224, 2))
        feats = haralick_features(cube)
        assert feats.shape == (2 * 16 * 4 * 5,)

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        cube = rng.uniform(0, 1, (64, 64, 1))
        assert np.array_equal(haralick_features(cube), haralick_features(cube))

    def test_uneven_grid_sizes_supported(self):
        rng = np.random.default_rng(3)
        feats = haralick_features(rng.uniform(0, 1, (30, 30, 1)), grid=4)
        assert feats.shape == (16 * 4 * 5,)
        assert np.isfinite(feats).all()


class TestBaselinePipeline:
    def test_texture_features_separate_synthetic_classes(self, tmp_path):
        """Wavelet+GLCM features + linear classifier on real pipeline cubes."""
        import json

        from mcpad.dataset import SynthConfig, synth_generate
        from mcpad.orchestrate import DirectoryCubeSource, Workspace, preprocess_dataset
        from mcpad.preprocess import select_channels

        ws = Workspace(tmp_path / "ws")
        cfg = SynthConfig(counts={"bonafide": (6, 0, 0), "Print": (6, 0, 0)},
                          frames_per_sample=1, image_size=(96, 96), seed=11)
        synth_generate(cfg, ws.raw_dir)
        preprocess_dataset(ws, frames_per_video=1)
        cubes = DirectoryCubeSource(ws)

        feats, labels = [], []
        for r in ws.manifest():
            sub = select_channels(cubes.frames(r.sample_id)[0], "SWIR_1300nm-SWIR_1450nm")
            feats.append(haralick_features(sub.data))
            labels.append(1 if r.is_bonafide else 0)
        X, y = np.stack(feats), np.array(labels)
        assert X.shape == (12, 2 * 16 * 4 * 5)
        clf = fit_linear_classifier(X, y)
        pred = (clf.score(X) >= 0.5).astype(int)
        assert np.mean(pred == y) >= 0.9


class TestLinearClassifier:
    def test_separable_blobs_reach_full_accuracy(self):
        rng = np.random.default_rng(4)
        a = rng.normal((2.0, 2.0), 0.3, (40, 2))
        b = rng.normal((-2.0, -2.0), 0.3, (40, 2))
        X = np.vstack([a, b])
        y = np.array([1] * 40 + [0] * 40)
        clf = fit_linear_classifier(X, y)
        pred = (clf.score(X) >= 0.5).astype(int)
        assert np.array_equal(pred, y)

    def test_duplicated_columns_leave_decision_unchanged(self):
        rng = np.random.default_rng(5)
        X = rng.normal(0, 1, (60, 3))
        y = (X[:, 0] + 0.5 * X[:, 1] > 0).astype(int)
        X_dup = np.hstack([X, X])
        s1 = fit_linear_classifier(X, y).score(X)
        s2 = fit_linear_classifier(X_dup, y).score(X_dup)
        assert np.abs(s1 - s2).max() < 1e-6

    def test_single_class_rejected(self):
        X = np.random.default_rng(6).normal(size=(10, 2))
        with pytest.raises(ValueError, match="single class"):
            fit_linear_classifier(X, np.ones(10))

    def test_score_range_and_polarity(self):
        rng = np.random.default_rng(7)
        a = rng.normal((1.5, 0.0), 0.2, (30, 2))
        b = rng.normal((-1.5, 0.0), 0.2, (30, 2))
        X = np.vstack([a, b])
        y = np.array([1] * 30 + [0] * 30)
        clf = fit_linear_classifier(X, y)
        s = clf.score(X)
        assert np.all((0 <= s) & (s <= 1))
        assert s[:30].mean() > s[30:].mean()
