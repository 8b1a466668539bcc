"""Acceptance suite: one test per release criterion, at stated tolerances.

Each criterion prints a single PASS line (visible with `pytest -s` or in the
captured output); the assertions pin the exact tolerances. Runtime budgets
are asserted where the criteria specify one.
"""

import json
import time

import numpy as np
import pytest
import torch

from mcpad.dataset import SynthConfig, generate_captures, reference_fixture, reference_fold_assignment, synth_generate
from mcpad.dataset.records import ATTACK_TYPES
from mcpad.evaluation import (
    EmbeddingFile,
    EmbeddingRow,
    ScoreFile,
    ScoreRow,
    combo_cost_usd,
    compute_metrics,
    fuse_features,
    fuse_scores,
    select_threshold,
)
from mcpad.geometry import (
    build_registration_map,
    compute_disparity,
    disparity_to_depth_cloud,
    project_point,
    rectify_stereo_pair,
    warp_to_reference,
)
from mcpad.geometry.camera import CameraExtrinsics, CameraIntrinsics, project_points
from mcpad.geometry.rectify import rectified_calibration
from mcpad.geometry.scene import make_demo_rig, render_plane
from mcpad.models import (
    ModelConfig,
    adapt_first_layer,
    build_model,
    conv2d_complexity,
    model_complexity_report,
    pixbis_loss,
    pixbis_loss_grads,
)
from mcpad.models.loss import pixbis_loss_from_logits
from mcpad.orchestrate import Workspace, preprocess_dataset
from mcpad.orchestrate.sweep import SweepSpec, run_sweep
from mcpad.preprocess import mad_normalize, unit_spectral_normalize
from mcpad.protocols import LOO_ATTACKS, build_loo, build_protocol, fold_stats, save_protocol, validate_protocol

from tests.test_evaluation import brute_force_metrics, fusion_fixture


def report(name: str, detail: str = ""):
    print(f"[PASS] {name}" + (f" ({detail})" if detail else ""))


class TestPrimaryCriteria:
    def test_metrics_oracle_exact(self):
        t0 = time.monotonic()
        rng = np.random.default_rng(2024)
        for _ in range(1000):
            bona = rng.uniform(0, 1, rng.integers(1, 60)).tolist()
            attacks = rng.uniform(0, 1, rng.integers(1, 60)).tolist()
            tau = float(rng.uniform(0, 1))
            rows = [ScoreRow(f"b{i}", "bonafide", "", s) for i, s in enumerate(bona)]
            rows += [ScoreRow(f"a{i}", "attack", "Print", s) for i, s in enumerate(attacks)]
            got = compute_metrics(ScoreFile(rows=rows), tau)
            apcer, bpcer, acer = brute_force_metrics(bona, attacks, tau)
            assert got.apcer_pct == apcer and got.bpcer_pct == bpcer and got.acer_pct == acer
            assert got.acer_pct == (got.apcer_pct + got.bpcer_pct) / 2.0
        elapsed = time.monotonic() - t0
        assert elapsed < 10.0
        report("metrics oracle: 1000 random score sets match brute force exactly", f"{elapsed:.1f}s")

    def test_threshold_contract(self):
        t0 = time.monotonic()
        bona = [round(0.01 * i, 2) for i in range(1, 101)]
        dev = ScoreFile(rows=[ScoreRow(f"b{i}", "bonafide", "", s) for i, s in enumerate(bona)])
        tau = select_threshold(dev, 0.01)
        assert tau == pytest.approx(0.02)
        assert compute_metrics(dev, tau).bpcer_pct == pytest.approx(1.0)

        rng = np.random.default_rng(11)
        for _ in range(300):
            scores = rng.uniform(0, 1, rng.integers(1, 80))
            target = float(rng.uniform(0, 0.3))
            sf = ScoreFile(rows=[ScoreRow(f"b{i}", "bonafide", "", float(s))
                                 for i, s in enumerate(scores)])
            t = select_threshold(sf, target)
            assert np.mean(scores < t) <= target + 1e-12
        elapsed = time.monotonic() - t0
        assert elapsed < 5.0
        report("threshold contract: ramp tau=0.02 at 1% dev BPCER; BPCER <= target on 300 random sets",
               f"{elapsed:.1f}s")

    def test_geometry_roundtrip(self):
        t0 = time.monotonic()
        # hand projection, exact
        intr = CameraIntrinsics(fx=100, fy=100, cx=64, cy=64, dist=np.zeros(5), width=128, height=128)
        cam = (intr, CameraExtrinsics(np.eye(3), np.array([-0.1, 0.0, 0.0])))
        uv = project_point(cam, (0.0, 0.0, 1.0))
        assert abs(uv[0] - 54.0) < 1e-9 and abs(uv[1] - 64.0) < 1e-9

        rig = make_demo_rig()
        rect = rectified_calibration(rig, "nir_left", "nir_right")
        rng = np.random.default_rng(5)
        pts = np.stack([rng.uniform(-0.2, 0.2, 400), rng.uniform(-0.2, 0.2, 400),
                        rng.uniform(0.5, 2.0, 400)], axis=1)
        uv_l, ok_l = project_points(rect.left, pts)
        uv_r, ok_r = project_points(rect.right, pts)
        keep = ok_l & ok_r
        row_err = np.abs(uv_l[keep, 1] - uv_r[keep, 1]).max()
        assert row_err < 0.1

        plane_z = 0.8
        left = render_plane(rig.camera("nir_left"), plane_z)
        right = render_plane(rig.camera("nir_right"), plane_z)
        rect_l, rect_r, rect = rectify_stereo_pair(rig, left, right)
        disp = compute_disparity(rect_l, rect_r, block_size=9, max_disparity=32)
        cloud = disparity_to_depth_cloud(disp, rect, rig.baseline)
        depth_err = float(np.median(np.abs(cloud.xyz[:, 2] - plane_z) / plane_z))
        assert depth_err < 0.02

        target_img = render_plane(rig.camera("rgb"), plane_z)
        reg = build_registration_map(cloud, rig.camera("rgb"), ref_size=rect_l.shape)
        warped, mask = warp_to_reference(target_img, reg)
        mae = float(np.abs(warped[mask] - rect_l[mask]).mean())
        assert mae < 2.0 / 255.0
        elapsed = time.monotonic() - t0
        assert elapsed < 60.0
        report("geometry round-trip: rows<0.1px, depth median " \
               f"{depth_err:.3%}<2%, warp MAE {mae:.5f}<{2/255:.5f}, hand case exact", f"{elapsed:.1f}s")

    def test_normalization(self):
        t0 = time.monotonic()
        rng = np.random.default_rng(7)
        spectra = rng.uniform(0, 4000, (100, 100, 7))
        spectra[::7, ::5] = 0.0
        out, zero = unit_spectral_normalize(spectra)
        norms = np.linalg.norm(out, axis=2)
        assert np.all(np.abs(norms[~zero] - 1.0) < 1e-6)

        for i in range(100):
            img = rng.integers(0, 60000, (24, 24)).astype(np.float64)
            a = int(rng.integers(2, 8))
            b = int(rng.integers(0, 500))
            assert np.array_equal(mad_normalize(img), mad_normalize(a * img + b))
        elapsed = time.monotonic() - t0
        assert elapsed < 10.0
        report("normalization: unit norms within 1e-6; MAD affine-invariant bit-exactly on 100 images",
               f"{elapsed:.1f}s")

    def test_loss_and_gradients(self):
        t0 = time.monotonic()
        assert abs(float(pixbis_loss(np.full((14, 14), 0.5), np.array(0.5), 1.0)) - np.log(2.0)) < 1e-9
        rng = np.random.default_rng(13)
        step = 1e-3
        for _ in range(20):
            z_map = rng.uniform(-4, 4, (4, 4))
            z_bin = rng.uniform(-4, 4, (1,))
            y = float(rng.integers(0, 2))
            g_map, g_bin = pixbis_loss_grads(z_map, z_bin, y)
            for idx in np.ndindex(z_map.shape):
                zp, zm = z_map.copy(), z_map.copy()
                zp[idx] += step
                zm[idx] -= step
                fd = (pixbis_loss_from_logits(zp, z_bin, y)
                      - pixbis_loss_from_logits(zm, z_bin, y)) / (2 * step)
                assert abs(fd - g_map[idx]) / max(abs(fd), abs(g_map[idx]), 1e-8) < 1e-4
            fd = (pixbis_loss_from_logits(z_map, z_bin + step, y)
                  - pixbis_loss_from_logits(z_map, z_bin - step, y)) / (2 * step)
            assert abs(fd - g_bin[0]) / max(abs(fd), abs(g_bin[0]), 1e-8) < 1e-4
        elapsed = time.monotonic() - t0
        assert elapsed < 30.0
        report("loss/gradient: analytic vs central differences < 1e-4 on 20 tensors; ln2 case < 1e-9",
               f"{elapsed:.1f}s")

    def test_first_layer_adaptation(self):
        w = np.array([1.0, 2.0, 3.0]).reshape(1, 3, 1, 1)
        assert np.array_equal(adapt_first_layer(w, 2).ravel(), [3.0, 3.0])
        rng = np.random.default_rng(17)
        for c in (1, 2, 4, 10, 16):
            w3 = rng.normal(size=(5, 3, 3, 3))
            bias = rng.normal(size=5)
            wc = adapt_first_layer(w3, c)
            conv3 = torch.nn.Conv2d(3, 5, 3).double()
            convc = torch.nn.Conv2d(c, 5, 3).double()
            with torch.no_grad():
                conv3.weight.copy_(torch.from_numpy(w3))
                convc.weight.copy_(torch.from_numpy(wc))
                conv3.bias.copy_(torch.from_numpy(bias))
                convc.bias.copy_(torch.from_numpy(bias))
                out3 = conv3(torch.full((1, 3, 6, 6), 0.7, dtype=torch.float64))
                outc = convc(torch.full((1, c, 6, 6), 0.7, dtype=torch.float64))
            assert float((out3 - outc).abs().max()) < 1e-6
        report("first-layer adaptation: constant-input equivalence < 1e-6 for C in {1,2,4,10,16}; "
               "[1,2,3]->C=2 gives [3.0,3.0]")

    def test_protocol_fixture_counts(self):
        t0 = time.monotonic()
        manifest = reference_fixture()
        fold_assignment = reference_fold_assignment()
        expected_main = {
            "grandtest-c": {"train": (228, 618), "dev": (145, 767), "test": (182, 632)},
            "impersonation-c": {"train": (228, 384), "dev": (145, 464), "test": (182, 440)},
            "obfuscation-c": {"train": (228, 234), "dev": (145, 303), "test": (182, 192)},
        }
        expected_loo = {
            "Flexiblemask": (528, 681, 48), "Glasses": (582, 729, 36), "Makeup": (444, 526, 132),
            "Mannequin": (598, 729, 77), "Papermask": (590, 743, 49), "Rigidmask": (456, 649, 140),
            "Tattoo": (594, 743, 24), "Replay": (582, 667, 126),
        }
        for kind, expected in expected_main.items():
            p = build_protocol(manifest, kind, fold_assignment)
            stats = fold_stats(p, manifest)
            for fold, (bona, attacks) in expected.items():
                assert (stats[fold]["bonafide"], stats[fold]["attacks"]) == (bona, attacks), (kind, fold)
            assert validate_protocol(p, manifest).ok

        grandtest = build_protocol(manifest, "grandtest-c", fold_assignment)
        for attack, (tr, dv, te) in expected_loo.items():
            p = build_loo(grandtest, attack, manifest)
            stats = fold_stats(p, manifest)
            assert stats["train"]["attacks"] == tr and stats["dev"]["attacks"] == dv
            assert stats["test"]["attacks"] == te
            assert (stats["train"]["bonafide"], stats["dev"]["bonafide"],
                    stats["test"]["bonafide"]) == (228, 145, 182)
            assert validate_protocol(p, manifest).ok
        elapsed = time.monotonic() - t0
        assert elapsed < 10.0
        report("protocol fixtures: all published fold counts reproduced exactly; zero violations",
               f"{elapsed:.1f}s")

    def test_loo_exclusion_property(self):
        manifest = reference_fixture()
        by_id = {r.sample_id: r for r in manifest}
        grandtest = build_protocol(manifest, "grandtest-c", reference_fold_assignment())
        for attack in LOO_ATTACKS:
            p = build_loo(grandtest, attack, manifest)
            for fold in ("train", "dev"):
                assert all(by_id[s].attack_type != attack for s in p.folds[fold])
            test_types = {by_id[s].attack_type for s in p.folds["test"] if not by_id[s].is_bonafide}
            assert test_types == {attack}
        report("LOO exclusion: left-out attack absent from train/dev and alone in test, all 8 protocols")

    def test_fusion_criteria(self):
        sf = ScoreFile(rows=[ScoreRow("x", "bonafide", "", 0.3), ScoreRow("y", "attack", "Print", 0.8)])
        fused = fuse_scores("Mean", [sf, sf], [sf, sf]).sorted_by_id()
        assert [r.score for r in fused.rows] == [r.score for r in sf.sorted_by_id().rows]

        dev_files, test_files = fusion_fixture(seed=1)
        for method in ("LLR", "MLP", "GMM"):
            fused_dev = fuse_scores(method, dev_files, dev_files, seed=0)
            fused_test = fuse_scores(method, dev_files, test_files, seed=0)
            tau = select_threshold(fused_dev, 0.01)
            assert compute_metrics(fused_test, tau).acer_pct == 0.0, method

        rng = np.random.default_rng(23)

        def embeddings(fold, n=30):
            rows = []
            for i in range(n):
                bona = i < n // 2
                mu = 3.0 if bona else -3.0
                rows.append(EmbeddingRow(f"{fold}{i}", "bonafide" if bona else "attack",
                                         "" if bona else "Print", rng.normal(mu, 1.0, 6)))
            return EmbeddingFile(rows=rows, fold=fold)

        dev_e, test_e = embeddings("dev"), embeddings("test")
        s1 = np.array([r.score for r in fuse_features([dev_e], [test_e]).sorted_by_id().rows])
        s2 = np.array([r.score for r in fuse_features([dev_e, dev_e], [test_e, test_e]).sorted_by_id().rows])
        assert np.abs(s1 - s2).max() < 1e-6
        report("fusion: Mean identity; LLR/MLP/GMM at 0% ACER; duplicated-feature invariance < 1e-6")

    def test_cost_report_exact(self):
        assert combo_cost_usd("RGB-SWIR") == 32800
        assert combo_cost_usd("RGB-NIR") == 2550
        report("cost report: RGB-SWIR = 32800 USD, RGB-NIR = 2550 USD, exact")

    def test_complexity_accounting(self):
        assert conv2d_complexity(2, 4, 3, 8, 8) == (76, 4608)
        rng = np.random.default_rng(31)
        for _ in range(5):
            stages = tuple((int(rng.integers(1, 3)), int(rng.integers(4, 48))) for _ in range(4))
            cfg = ModelConfig(in_channels=int(rng.integers(1, 17)), stages=stages)
            model = build_model(cfg, seed=0)
            assert model_complexity_report(cfg).params == sum(p.numel() for p in model.parameters())
        report("complexity: analytic = enumerated for 5 random configs; 3x3 conv case (76, 4608) exact")


@pytest.fixture(scope="module")
def e2e_workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("e2e")
    ws = Workspace(root / "ws")
    counts = {"bonafide": (24, 10, 12)}
    counts.update({a: (4, 2, 2) for a in ATTACK_TYPES})
    cfg = SynthConfig(counts=counts, frames_per_sample=3, image_size=(160, 160), seed=3)
    synth_generate(cfg, ws.raw_dir)
    generate_captures(ws.root, n_frames=1, size=160)
    fold_assignment = json.loads((ws.raw_dir / "fold_assignment.json").read_text())
    protocol = build_protocol(ws.manifest(), "grandtest-c", fold_assignment)
    ws.protocols_dir.mkdir(parents=True, exist_ok=True)
    save_protocol(protocol, ws.protocols_dir / "grandtest-c.json")
    preprocess_dataset(ws, frames_per_video=3)
    return ws


class TestEndToEndTrend:
    def test_rgb_swir_beats_rgb_on_synthetic_grandtest(self, e2e_workspace):
        t0 = time.monotonic()
        ws = e2e_workspace
        n_train = len(json.loads((ws.protocols_dir / "grandtest-c.json").read_text())["folds"]["train"])
        assert n_train >= 60
        spec = SweepSpec(protocols=["grandtest-c"], combos=["RGB", "RGB-SWIR"], epochs=3,
                         learning_rate=3e-3, batch_size=16, frames_per_video=3, seeds=[3])
        rows = {r["combo"]: r for r in run_sweep(spec, ws)}
        acer_rgb = rows["RGB"]["acer_pct"]
        acer_rgb_swir = rows["RGB-SWIR"]["acer_pct"]
        assert acer_rgb_swir <= acer_rgb
        assert acer_rgb_swir < 15.0
        elapsed = time.monotonic() - t0
        assert elapsed < 600.0
        report("end-to-end trend: ACER(RGB-SWIR) = "
               f"{acer_rgb_swir:.2f}% <= ACER(RGB) = {acer_rgb:.2f}% and < 15%",
               f"{elapsed:.0f}s, {n_train} train videos, 3 epochs, seed 3")


class TestSecondaryCriteria:
    def test_inspector_loop_service_side(self, e2e_workspace):
        from fastapi.testclient import TestClient

        from mcpad.orchestrate.service import create_app

        ws = e2e_workspace
        client = TestClient(create_app(ws))
        body = {
            "frame_id": "frame_000", "ref_channel": "nir_left", "target_channel": "rgb",
            "deltas": {"rx": 0, "ry": 0, "rz": 0, "tx": 0, "ty": 0, "tz": 0}, "blend": 0.6,
        }
        baseline = client.post("/api/overlay", json=body).content
        assert client.post("/api/overlay", json=body).content == baseline

        nudged = dict(body, deltas={"rx": 0, "ry": 0, "rz": 0, "tx": 10, "ty": 0, "tz": 0})
        assert client.post("/api/overlay", json=nudged).content != baseline
        assert client.post("/api/overlay", json=body).content == baseline

        rig = client.get("/api/calibration").json()
        rig["rgb"]["t"][0] += 0.010
        accepted = client.post("/api/calibration/accept", json=rig)
        assert accepted.status_code == 200
        assert client.get("/api/calibration").json()["rgb"]["t"][0] == pytest.approx(rig["rgb"]["t"][0])

        preprocess_dataset(ws, scale=0.5, frames_per_video=1)
        sample = ws.manifest()[0]
        sidecar = json.loads(ws.cube_path(sample.sample_id, 0, scale=0.5).with_suffix(".json").read_text())
        assert sidecar["rig_hash"] == accepted.json()["rig_hash"]
        report("inspector loop (service side): zero-delta overlay byte-stable, slider round-trip "
               "reproduces baseline, +10mm commit read back and stamped into cube sidecars")
