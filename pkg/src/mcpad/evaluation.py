"""ISO-style PAD metrics, dev-set threshold selection, fusion, cost report.

Accept convention: a sample is accepted as bonafide iff score >= threshold
(ties accept). APCER pools all attack types; a per-type breakdown is
reported alongside. ACER is the arithmetic mean of APCER and BPCER at the
chosen operating point.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from mcpad.preprocess import combo_groups

THRESHOLD_EPSILON = 1e-9
DEFAULT_BPCER_TARGET = 0.01

FUSION_METHODS = ("Mean", "LLR", "MLP", "GMM")


class EvaluationError(ValueError):
    pass


@dataclass
class ScoreRow:
    sample_id: str
    label: str
    attack_type: str
    score: float

    def __post_init__(self):
        if self.label not in ("bonafide", "attack"):
            raise EvaluationError(f"{self.sample_id}: bad label {self.label!r}")
        if not math.isfinite(self.score):
            raise EvaluationError(f"{self.sample_id}: non-finite score")


@dataclass
class ScoreFile:
    rows: list[ScoreRow]
    fold: str = ""

    def scores(self, label: str) -> np.ndarray:
        return np.array([r.score for r in self.rows if r.label == label], dtype=np.float64)

    def sorted_by_id(self) -> "ScoreFile":
        return ScoreFile(rows=sorted(self.rows, key=lambda r: r.sample_id), fold=self.fold)


def save_scores(sf: ScoreFile, path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_id", "label", "attack_type", "score"])
        for r in sf.rows:
            writer.writerow([r.sample_id, r.label, r.attack_type, f"{r.score:.10g}"])


def load_scores(path: str | Path, fold: str = "") -> ScoreFile:
    rows = []
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        for rec in reader:
            rows.append(ScoreRow(rec["sample_id"], rec["label"], rec["attack_type"],
                                 float(rec["score"])))
    return ScoreFile(rows=rows, fold=fold)


def select_threshold(dev: ScoreFile, bpcer_target: float = DEFAULT_BPCER_TARGET) -> float:
    """Highest operating threshold whose dev BPCER stays within the target.

    With bonafide scores sorted ascending b(1..N) and k = floor(target * N),
    the threshold is b(k+1); if k+1 > N every bonafide may be rejected and
    the threshold moves just above the top score.
    """
    bona = np.sort(dev.scores("bonafide"))
    if bona.size == 0:
        raise EvaluationError("dev score file contains no bonafide rows")
    k = int(math.floor(bpcer_target * bona.size))
    if k + 1 > bona.size:
        return float(bona[-1] + THRESHOLD_EPSILON)
    return float(bona[k])


@dataclass
class MetricsReport:
    threshold: float
    apcer_pct: float | None
    bpcer_pct: float | None
    acer_pct: float | None
    apcer_by_type_pct: dict[str, float] = field(default_factory=dict)
    n_attacks: int = 0
    n_bonafide: int = 0

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "apcer_pct": self.apcer_pct,
            "bpcer_pct": self.bpcer_pct,
            "acer_pct": self.acer_pct,
            "apcer_by_type_pct": self.apcer_by_type_pct,
            "n_attacks": self.n_attacks,
            "n_bonafide": self.n_bonafide,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")


def compute_metrics(test: ScoreFile, threshold: float) -> MetricsReport:
    """APCER/BPCER/ACER at a fixed threshold, plus per-attack-type APCER."""
    attacks = test.scores("attack")
    bona = test.scores("bonafide")
    if attacks.size == 0 and bona.size == 0:
        raise EvaluationError("score file has neither attacks nor bonafide samples")
    apcer = 100.0 * int((attacks >= threshold).sum()) / attacks.size if attacks.size else None
    bpcer = 100.0 * int((bona < threshold).sum()) / bona.size if bona.size else None
    acer = (apcer + bpcer) / 2.0 if apcer is not None and bpcer is not None else None

    by_type: dict[str, float] = {}
    type_scores: dict[str, list[float]] = {}
    for r in test.rows:
        if r.label == "attack":
            type_scores.setdefault(r.attack_type, []).append(r.score)
    for atype, scores in sorted(type_scores.items()):
        arr = np.asarray(scores)
        by_type[atype] = 100.0 * int((arr >= threshold).sum()) / arr.size

    return MetricsReport(
        threshold=threshold,
        apcer_pct=apcer,
        bpcer_pct=bpcer,
        acer_pct=acer,
        apcer_by_type_pct=by_type,
        n_attacks=int(attacks.size),
        n_bonafide=int(bona.size),
    )


def _aligned_matrix(files: list[ScoreFile]) -> tuple[np.ndarray, list[ScoreRow]]:
    if not files:
        raise EvaluationError("need at least one score file")
    base = files[0].sorted_by_id()
    ids = [r.sample_id for r in base.rows]
    columns = []
    for sf in files:
        s = sf.sorted_by_id()
        if [r.sample_id for r in s.rows] != ids:
            raise EvaluationError("sample_id mismatch across per-channel score files")
        columns.append([r.score for r in s.rows])
    return np.array(columns, dtype=np.float64).T, base.rows


def _fit_fused_scores(method: str, x_dev: np.ndarray, y_dev: np.ndarray,
                      x_test: np.ndarray, seed: int) -> np.ndarray:
    if method in ("LLR", "MLP", "GMM") and len(np.unique(y_dev)) < 2:
        raise EvaluationError(f"{method} fusion needs both classes in the dev fold")
    if method == "Mean":
        return x_test.mean(axis=1)
    if method == "LLR":
        from sklearn.linear_model import LogisticRegression

        # Plain linear logistic regression: C large enough to be effectively
        # unregularized, as in classic score-fusion toolchains.
        clf = LogisticRegression(C=1e6, max_iter=5000)
        clf.fit(x_dev, y_dev)
        return clf.predict_proba(x_test)[:, 1]
    if method == "MLP":
        from sklearn.neural_network import MLPClassifier

        clf = MLPClassifier(hidden_layer_sizes=(10,), activation="logistic",
                            max_iter=4000, random_state=seed)
        clf.fit(x_dev, y_dev)
        return clf.predict_proba(x_test)[:, 1]
    if method == "GMM":
        from sklearn.mixture import GaussianMixture

        def fit_class(x):
            n_comp = min(2, len(x))
            gmm = GaussianMixture(n_components=n_comp, covariance_type="diag",
                                  random_state=seed, reg_covar=1e-6)
            gmm.fit(x)
            return gmm

        gmm_b = fit_class(x_dev[y_dev == 1])
        gmm_a = fit_class(x_dev[y_dev == 0])
        llr = gmm_b.score_samples(x_test) - gmm_a.score_samples(x_test)
        return 1.0 / (1.0 + np.exp(-np.clip(llr, -500, 500)))
    raise EvaluationError(f"unknown fusion method {method!r}; have {FUSION_METHODS}")


def fuse_scores(method: str, dev_files: list[ScoreFile], test_files: list[ScoreFile],
                seed: int = 0) -> ScoreFile:
    """Combine per-channel score files into one fused test score file.

    Mean needs no fitting; LLR/MLP/GMM are fitted on the dev score vectors.
    Pass the dev files as `test_files` too to obtain fused dev scores for
    threshold selection (the fits are deterministic for a fixed seed).
    """
    if len(dev_files) != len(test_files):
        raise EvaluationError("need matching dev/test score files per channel")
    x_dev, dev_rows = _aligned_matrix(dev_files)
    x_test, test_rows = _aligned_matrix(test_files)
    y_dev = np.array([1 if r.label == "bonafide" else 0 for r in dev_rows])
    fused = _fit_fused_scores(method, x_dev, y_dev, x_test, seed)
    rows = [ScoreRow(r.sample_id, r.label, r.attack_type, float(s))
            for r, s in zip(test_rows, fused)]
    return ScoreFile(rows=rows, fold=test_files[0].fold)


@dataclass
class EmbeddingRow:
    sample_id: str
    label: str
    attack_type: str
    vector: np.ndarray


@dataclass
class EmbeddingFile:
    rows: list[EmbeddingRow]
    fold: str = ""

    def sorted_by_id(self) -> "EmbeddingFile":
        return EmbeddingFile(rows=sorted(self.rows, key=lambda r: r.sample_id), fold=self.fold)


def save_embeddings(ef: EmbeddingFile, path: str | Path) -> None:
    dim = len(ef.rows[0].vector) if ef.rows else 0
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["sample_id", "label", "attack_type"] + [f"f{i}" for i in range(dim)])
        for r in ef.rows:
            writer.writerow([r.sample_id, r.label, r.attack_type]
                            + [f"{v:.9g}" for v in r.vector])


def load_embeddings(path: str | Path, fold: str = "") -> EmbeddingFile:
    rows = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader)
        dim = len(header) - 3
        for rec in reader:
            rows.append(EmbeddingRow(rec[0], rec[1], rec[2],
                                     np.array([float(v) for v in rec[3 : 3 + dim]])))
    return EmbeddingFile(rows=rows, fold=fold)


def fuse_features(dev_files: list[EmbeddingFile], test_files: list[EmbeddingFile]) -> ScoreFile:
    """Concatenate per-channel embeddings and score with the linear classifier."""
    from mcpad.models.linear import fit_linear_classifier

    def concat(files: list[EmbeddingFile]):
        base = files[0].sorted_by_id()
        ids = [r.sample_id for r in base.rows]
        mats = []
        for ef in files:
            s = ef.sorted_by_id()
            if [r.sample_id for r in s.rows] != ids:
                raise EvaluationError("sample_id mismatch across per-channel embeddings")
            mats.append(np.stack([r.vector for r in s.rows]))
        X = np.concatenate(mats, axis=1)
        if not np.isfinite(X).all():
            raise EvaluationError("embeddings contain non-finite values")
        return X, base.rows

    x_dev, dev_rows = concat(dev_files)
    x_test, test_rows = concat(test_files)
    y_dev = np.array([1 if r.label == "bonafide" else 0 for r in dev_rows])
    try:
        clf = fit_linear_classifier(x_dev, y_dev)
    except ValueError as e:
        raise EvaluationError(str(e)) from None
    scores = clf.score(x_test)
    rows = [ScoreRow(r.sample_id, r.label, r.attack_type, float(s))
            for r, s in zip(test_rows, scores)]
    return ScoreFile(rows=rows, fold=test_files[0].fold)


# Unit hardware cost per modality, USD (stereo depth is priced separately).
SENSOR_COST_USD = {"Color": 1300, "NIR": 1250, "SWIR": 31500, "Thermal": 10500, "Depth": 150}

_GROUP_TO_MODALITY = {"RGB": "Color", "T": "Thermal", "NIR": "NIR", "SWIR": "SWIR"}

# The stereo depth channel reuses the NIR pair: one extra NIR camera instead
# of a dedicated depth unit.
STEREO_DEPTH_COST_USD = SENSOR_COST_USD["NIR"]


def combo_cost_usd(combo: str) -> int:
    cost = 0
    for group in combo_groups(combo):
        if group == "D":
            cost += STEREO_DEPTH_COST_USD
        else:
            cost += SENSOR_COST_USD[_GROUP_TO_MODALITY[group]]
    return cost


def cost_report(combos: list[str], acer_by_combo: dict[str, float]) -> list[dict]:
    """Rows of (combo, hardware cost, ACER) for cost-vs-performance plots."""
    rows = []
    for combo in combos:
        rows.append({"combo": combo, "cost_usd": combo_cost_usd(combo),
                     "acer_pct": acer_by_combo.get(combo)})
    return rows


def save_cost_report(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["combo", "cost_usd", "acer_pct"])
        for r in rows:
            writer.writerow([r["combo"], r["cost_usd"],
                             "" if r["acer_pct"] is None else f"{r['acer_pct']:.4f}"])
