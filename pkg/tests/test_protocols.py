"""Protocols: curation, fold counts against the published tables, LOO splits."""

import copy

import pytest

from mcpad.dataset import reference_fixture, reference_fold_assignment
from mcpad.dataset.records import SampleRecord
from mcpad.protocols import (
    LOO_ATTACKS,
    ProtocolError,
    build_loo,
    build_protocol,
    curate,
    fold_stats,
    load_protocol,
    save_protocol,
    validate_protocol,
)

# Published per-fold (bonafide, attacks) counts.
EXPECTED_MAIN = {
    "grandtest-c": {"train": (228, 618), "dev": (145, 767), "test": (182, 632)},
    "impersonation-c": {"train": (228, 384), "dev": (145, 464), "test": (182, 440)},
    "obfuscation-c": {"train": (228, 234), "dev": (145, 303), "test": (182, 192)},
}
EXPECTED_LOO = {
    "Flexiblemask": {"train": (228, 528), "dev": (145, 681), "test": (182, 48)},
    "Glasses": {"train": (228, 582), "dev": (145, 729), "test": (182, 36)},
    "Makeup": {"train": (228, 444), "dev": (145, 526), "test": (182, 132)},
    "Mannequin": {"train": (228, 598), "dev": (145, 729), "test": (182, 77)},
    "Papermask": {"train": (228, 590), "dev": (145, 743), "test": (182, 49)},
    "Rigidmask": {"train": (228, 456), "dev": (145, 649), "test": (182, 140)},
    "Tattoo": {"train": (228, 594), "dev": (145, 743), "test": (182, 24)},
    "Replay": {"train": (228, 582), "dev": (145, 667), "test": (182, 126)},
}


@pytest.fixture(scope="module")
def manifest():
    return reference_fixture()


@pytest.fixture(scope="module")
def fold_assignment():
    return reference_fold_assignment()


@pytest.fixture(scope="module")
def grandtest(manifest, fold_assignment):
    return build_protocol(manifest, "grandtest-c", fold_assignment)


class TestMainProtocols:
    @pytest.mark.parametrize("kind", sorted(EXPECTED_MAIN))
    def test_fold_counts_match_published_table(self, manifest, fold_assignment, kind):
        protocol = build_protocol(manifest, kind, fold_assignment)
        stats = fold_stats(protocol, manifest)
        for fold, (bona, attacks) in EXPECTED_MAIN[kind].items():
            assert stats[fold]["bonafide"] == bona, (kind, fold)
            assert stats[fold]["attacks"] == attacks, (kind, fold)

    def test_impersonation_excludes_obfuscation_attacks(self, manifest, fold_assignment):
        protocol = build_protocol(manifest, "impersonation-c", fold_assignment)
        stats = fold_stats(protocol, manifest)
        for fold in ("train", "dev", "test"):
            types = set(stats[fold]["per_type"])
            assert not types & {"Glasses", "Makeup", "Tattoo"}
        assert stats["test"]["per_type"].get("Print", 0) == 0

    def test_obfuscation_test_breakdown(self, manifest, fold_assignment):
        protocol = build_protocol(manifest, "obfuscation-c", fold_assignment)
        stats = fold_stats(protocol, manifest)
        assert stats["test"]["per_type"] == {"Glasses": 36, "Makeup": 132, "Tattoo": 24}

    def test_unknown_kind_rejected(self, manifest, fold_assignment):
        with pytest.raises(ProtocolError):
            build_protocol(manifest, "grandtest", fold_assignment)

    def test_missing_subject_in_assignment_rejected(self, manifest, fold_assignment):
        partial = dict(fold_assignment)
        partial.pop(manifest[0].subject_id)
        with pytest.raises(ProtocolError, match="misses subjects"):
            build_protocol(manifest, "grandtest-c", partial)

    def test_grandtest_union_equals_curated_manifest(self, manifest, grandtest):
        union = set(grandtest.folds["train"]) | set(grandtest.folds["dev"]) | set(grandtest.folds["test"])
        assert union == {r.sample_id for r in curate(manifest)}

    def test_deterministic_for_fixed_assignment(self, manifest, fold_assignment, grandtest):
        again = build_protocol(manifest, "grandtest-c", fold_assignment)
        assert again.folds == grandtest.folds

    def test_validator_passes_on_built_protocols(self, manifest, fold_assignment):
        for kind in EXPECTED_MAIN:
            report = validate_protocol(build_protocol(manifest, kind, fold_assignment), manifest)
            assert report.ok, report.violations


class TestLeaveOneOut:
    @pytest.mark.parametrize("attack", sorted(EXPECTED_LOO))
    def test_loo_counts_match_published_table(self, manifest, grandtest, attack):
        protocol = build_loo(grandtest, attack, manifest)
        stats = fold_stats(protocol, manifest)
        for fold, (bona, attacks) in EXPECTED_LOO[attack].items():
            assert stats[fold]["bonafide"] == bona, (attack, fold)
            assert stats[fold]["attacks"] == attacks, (attack, fold)

    @pytest.mark.parametrize("attack", LOO_ATTACKS)
    def test_exclusion_property(self, manifest, grandtest, attack):
        protocol = build_loo(grandtest, attack, manifest)
        by_id = {r.sample_id: r for r in manifest}
        for fold in ("train", "dev"):
            assert all(by_id[sid].attack_type != attack for sid in protocol.folds[fold])
        test_types = {by_id[sid].attack_type for sid in protocol.folds["test"] if not by_id[sid].is_bonafide}
        assert test_types == {attack}

    def test_print_loo_rejected(self, manifest, grandtest):
        with pytest.raises(ProtocolError, match="Print"):
            build_loo(grandtest, "Print", manifest)

    def test_unknown_attack_rejected(self, manifest, grandtest):
        with pytest.raises(ProtocolError):
            build_loo(grandtest, "Hologram", manifest)


class TestValidator:
    def test_detects_subject_overlap(self, manifest, grandtest):
        broken = copy.deepcopy(grandtest)
        moved = broken.folds["train"][0]
        broken.folds["test"].append(moved)
        report = validate_protocol(broken, manifest)
        assert any(v.startswith("subject-overlap") for v in report.violations)

    def test_detects_curation_leak(self, manifest, fold_assignment, grandtest):
        leaked = next(r for r in manifest if r.makeup_level == 0)
        broken = copy.deepcopy(grandtest)
        broken.folds[fold_assignment[leaked.subject_id]].append(leaked.sample_id)
        report = validate_protocol(broken, manifest)
        leaks = [v for v in report.violations if "level-0" in v]
        assert len(leaks) == 1

    def test_detects_empty_fold(self, manifest, grandtest):
        broken = copy.deepcopy(grandtest)
        broken.folds["dev"] = []
        report = validate_protocol(broken, manifest)
        assert "empty-fold: dev" in report.violations

    def test_unresolvable_ids_raise(self, manifest, grandtest):
        broken = copy.deepcopy(grandtest)
        broken.folds["train"].append("no_such_sample")
        with pytest.raises(ProtocolError, match="unresolvable"):
            validate_protocol(broken, manifest)


class TestProtocolIO:
    def test_json_roundtrip_and_stability(self, tmp_path, manifest, grandtest):
        p1 = tmp_path / "grandtest.json"
        save_protocol(grandtest, p1)
        back = load_protocol(p1)
        assert back.name == grandtest.name and back.folds == grandtest.folds
        p2 = tmp_path / "again.json"
        save_protocol(back, p2)
        assert p1.read_bytes() == p2.read_bytes()
