"""Curated and leave-one-out evaluation protocols over a manifest.

Folds are driven by an explicit subject -> fold assignment; curation strips
the borderline presentations (wigs, retro-glasses, level-0 makeup) that
behave like occluded bonafide and would otherwise confound training.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from mcpad.dataset.records import (
    ATTACK_TYPES,
    IMPERSONATION_ATTACKS,
    OBFUSCATION_ATTACKS,
    SampleRecord,
)

FOLDS = ("train", "dev", "test")
CURATION_RULES = ("exclude-wig", "exclude-retro-glasses", "exclude-makeup-level-0")

PROTOCOL_KINDS = {
    "grandtest-c": set(ATTACK_TYPES),
    "impersonation-c": set(IMPERSONATION_ATTACKS),
    "obfuscation-c": set(OBFUSCATION_ATTACKS),
}

# Print never appears in the test folds, so no leave-one-out split exists for it.
LOO_ATTACKS = tuple(a for a in ATTACK_TYPES if a != "Print")


class ProtocolError(ValueError):
    pass


@dataclass
class ProtocolDefinition:
    name: str
    folds: dict[str, list[str]]
    curation: tuple[str, ...] = CURATION_RULES
    left_out: str | None = None

    def fold_ids(self, fold: str) -> list[str]:
        return self.folds[fold]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "curation": list(self.curation),
            "left_out": self.left_out,
            "folds": {f: self.folds[f] for f in FOLDS},
        }


@dataclass
class ValidationReport:
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def is_curated_out(record: SampleRecord) -> bool:
    return record.wig or record.retro_glasses or record.makeup_level == 0


def curate(records: list[SampleRecord]) -> list[SampleRecord]:
    return [r for r in records if not is_curated_out(r)]


def build_protocol(
    manifest: list[SampleRecord],
    kind: str,
    fold_assignment: dict[str, str],
) -> ProtocolDefinition:
    """Assemble a curated protocol with subject-disjoint folds."""
    if kind not in PROTOCOL_KINDS:
        raise ProtocolError(f"unknown protocol kind {kind!r}; expected one of {sorted(PROTOCOL_KINDS)}")
    keep_attacks = PROTOCOL_KINDS[kind]
    missing = sorted({r.subject_id for r in manifest} - set(fold_assignment))
    if missing:
        raise ProtocolError(f"fold_assignment misses subjects: {missing[:5]}")

    folds: dict[str, list[str]] = {f: [] for f in FOLDS}
    for r in curate(manifest):
        if not r.is_bonafide and r.attack_type not in keep_attacks:
            continue
        fold = fold_assignment[r.subject_id]
        if fold not in FOLDS:
            raise ProtocolError(f"subject {r.subject_id}: unknown fold {fold!r}")
        folds[fold].append(r.sample_id)
    return ProtocolDefinition(name=kind, folds=folds)


def build_loo(
    grandtest: ProtocolDefinition,
    attack: str,
    manifest: list[SampleRecord],
) -> ProtocolDefinition:
    """Leave-one-out split: the attack vanishes from train/dev and owns test."""
    if attack == "Print":
        raise ProtocolError("no Print leave-one-out protocol exists (Print has an empty test fold)")
    if attack not in LOO_ATTACKS:
        raise ProtocolError(f"unknown attack {attack!r}; expected one of {LOO_ATTACKS}")
    by_id = {r.sample_id: r for r in manifest}
    folds: dict[str, list[str]] = {f: [] for f in FOLDS}
    for fold in ("train", "dev"):
        folds[fold] = [sid for sid in grandtest.folds[fold] if by_id[sid].attack_type != attack]
    folds["test"] = [
        sid for sid in grandtest.folds["test"]
        if by_id[sid].is_bonafide or by_id[sid].attack_type == attack
    ]
    return ProtocolDefinition(name=f"LOO_{attack}", folds=folds, left_out=attack)


def validate_protocol(protocol: ProtocolDefinition, manifest: list[SampleRecord]) -> ValidationReport:
    """Report-based checks: subject overlap, curation leaks, empty folds."""
    by_id = {r.sample_id: r for r in manifest}
    unresolved = [sid for ids in protocol.folds.values() for sid in ids if sid not in by_id]
    if unresolved:
        raise ProtocolError(f"unresolvable sample_ids: {unresolved[:5]}")

    report = ValidationReport()
    subjects = {f: {by_id[sid].subject_id for sid in protocol.folds[f]} for f in FOLDS}
    for i, fa in enumerate(FOLDS):
        for fb in FOLDS[i + 1:]:
            for subject in sorted(subjects[fa] & subjects[fb]):
                report.violations.append(f"subject-overlap: {subject} in both {fa} and {fb}")
    for fold in FOLDS:
        for sid in protocol.folds[fold]:
            r = by_id[sid]
            if r.wig:
                report.violations.append(f"curation-leak: wig sample {sid} in {fold}")
            if r.retro_glasses:
                report.violations.append(f"curation-leak: retro-glasses sample {sid} in {fold}")
            if r.makeup_level == 0:
                report.violations.append(f"curation-leak: level-0 makeup sample {sid} in {fold}")
        if not protocol.folds[fold]:
            report.violations.append(f"empty-fold: {fold}")
    return report


def fold_stats(protocol: ProtocolDefinition, manifest: list[SampleRecord]) -> dict[str, dict]:
    """Bonafide/attack counts per fold, with a per-attack-type breakdown."""
    by_id = {r.sample_id: r for r in manifest}
    out = {}
    for fold in FOLDS:
        recs = [by_id[sid] for sid in protocol.folds[fold]]
        attacks = [r for r in recs if not r.is_bonafide]
        per_type: dict[str, int] = {}
        for r in attacks:
            per_type[r.attack_type] = per_type.get(r.attack_type, 0) + 1
        out[fold] = {
            "bonafide": sum(1 for r in recs if r.is_bonafide),
            "attacks": len(attacks),
            "per_type": dict(sorted(per_type.items())),
        }
    return out


def save_protocol(protocol: ProtocolDefinition, path: str | Path) -> None:
    Path(path).write_text(json.dumps(protocol.to_dict(), indent=2, sort_keys=True) + "\n")


def load_protocol(path: str | Path) -> ProtocolDefinition:
    d = json.loads(Path(path).read_text())
    return ProtocolDefinition(
        name=d["name"],
        folds={f: list(d["folds"][f]) for f in FOLDS},
        curation=tuple(d["curation"]),
        left_out=d.get("left_out"),
    )
