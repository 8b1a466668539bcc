"""Reference fixture manifest reproducing the published fold statistics.

The identity split of the source dataset is not public, so the fixture
constructs one deterministically: per-fold subject pools, video counts per
attack type matching the published distribution tables, plus a handful of
borderline presentations (wigs, retro-glasses, level-0 makeup) that the
curation rules are expected to remove.
"""

from __future__ import annotations

from mcpad.dataset.records import SampleRecord

# (train, dev, test) video counts per attack type in the curated grand test.
GRANDTEST_ATTACKS: dict[str, tuple[int, int, int]] = {
    "Flexiblemask": (90, 86, 48),
    "Glasses": (36, 38, 36),
    "Makeup": (174, 241, 132),
    "Mannequin": (20, 38, 77),
    "Papermask": (28, 24, 49),
    "Print": (48, 98, 0),
    "Replay": (36, 100, 126),
    "Rigidmask": (162, 118, 140),
    "Tattoo": (24, 24, 24),
}
GRANDTEST_BONAFIDE = (228, 145, 182)

# Borderline extras the curation rules must strip, per fold.
WIG_EXTRAS = (4, 3, 3)
RETRO_GLASSES_EXTRAS = (3, 2, 2)
LEVEL0_MAKEUP_EXTRAS = (5, 4, 3)

FOLDS = ("train", "dev", "test")
_SUBJECTS_PER_FOLD = {"train": 20, "dev": 14, "test": 16}


def reference_fold_assignment() -> dict[str, str]:
    """Deterministic subject -> fold map used by the fixture."""
    assignment = {}
    for fold in FOLDS:
        for i in range(_SUBJECTS_PER_FOLD[fold]):
            assignment[f"{fold[:2]}{i:03d}"] = fold
    return assignment


def _subjects(fold: str) -> list[str]:
    return [f"{fold[:2]}{i:03d}" for i in range(_SUBJECTS_PER_FOLD[fold])]


def _landmarks(frames: int) -> list[dict]:
    return [{"left_eye": [60.0, 70.0], "right_eye": [100.0, 70.0]} for _ in range(frames)]


def reference_fixture() -> list[SampleRecord]:
    """Build the fixture manifest; every published per-fold count is exact."""
    records: list[SampleRecord] = []

    def add(fold: str, label: str, count: int, **kw):
        subjects = _subjects(fold)
        start = len([r for r in records if r.subject_id.startswith(fold[:2])])
        for k in range(count):
            n = start + k
            tag = kw.get("attack_type", "bonafide")
            records.append(
                SampleRecord(
                    sample_id=f"{fold}_{tag.lower()}_{n:04d}",
                    subject_id=subjects[n % len(subjects)],
                    session_id=f"s{1 + (n % 2)}",
                    label=label,
                    frames=10,
                    landmarks=_landmarks(10),
                    **kw,
                )
            )

    for fold_idx, fold in enumerate(FOLDS):
        add(fold, "bonafide", GRANDTEST_BONAFIDE[fold_idx])
        for attack, counts in GRANDTEST_ATTACKS.items():
            if attack == "Makeup":
                n = counts[fold_idx]
                for level, cnt in ((1, n - n // 2), (2, n // 2)):
                    add(fold, "attack", cnt, attack_type="Makeup", makeup_level=level)
            else:
                add(fold, "attack", counts[fold_idx], attack_type=attack)
        # Borderline cases: present in the manifest, removed by curation.
        add(fold, "attack", WIG_EXTRAS[fold_idx], attack_type="Flexiblemask", wig=True)
        add(fold, "attack", RETRO_GLASSES_EXTRAS[fold_idx], attack_type="Glasses",
            retro_glasses=True)
        add(fold, "attack", LEVEL0_MAKEUP_EXTRAS[fold_idx], attack_type="Makeup", makeup_level=0)

    return records
