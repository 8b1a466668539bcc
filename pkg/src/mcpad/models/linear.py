"""Linear max-margin classifier trained by hinge-loss subgradient descent.

Features are column-centered and row-unit-normalized before training, and
the weight vector starts at zero, so every iterate stays in the span of the
training rows. Decisions then depend on the data only through its Gram
matrix, which makes duplicating feature columns an exact no-op on the
decision function (the weight just splits across the copies).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_ITERATIONS = 2000
DEFAULT_REGULARIZATION = 1e-3


def _logistic(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z, dtype=np.float64)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    e = np.exp(z[~pos])
    out[~pos] = e / (1.0 + e)
    return out


@dataclass
class LinearClassifier:
    weights: np.ndarray
    bias: float
    column_means: np.ndarray

    def _prepare(self, features: np.ndarray) -> np.ndarray:
        X = np.asarray(features, dtype=np.float64) - self.column_means
        norms = np.linalg.norm(X, axis=1, keepdims=True)
        return X / np.where(norms == 0, 1.0, norms)

    def decision(self, features: np.ndarray) -> np.ndarray:
        """Signed distance to the separating hyperplane."""
        X = self._prepare(np.atleast_2d(features))
        w_norm = np.linalg.norm(self.weights)
        return (X @ self.weights + self.bias) / (w_norm if w_norm > 0 else 1.0)

    def score(self, features: np.ndarray) -> np.ndarray:
        """Logistic-mapped signed distance in [0, 1]; higher = bonafide."""
        return _logistic(self.decision(features))


def fit_linear_classifier(
    features: np.ndarray,
    labels: np.ndarray,
    iterations: int = DEFAULT_ITERATIONS,
    regularization: float = DEFAULT_REGULARIZATION,
) -> LinearClassifier:
    """Full-batch Pegasos-style subgradient descent on the hinge loss.

    `labels` holds 1 for bonafide and 0 for attack; both classes must be
    present. Deterministic: no sampling, zero initialisation.
    """
    X_raw = np.asarray(features, dtype=np.float64)
    y01 = np.asarray(labels).astype(int).ravel()
    if X_raw.ndim != 2 or X_raw.shape[0] != y01.size:
        raise ValueError(f"features {X_raw.shape} do not match {y01.size} labels")
    if len(np.unique(y01)) < 2:
        raise ValueError("training data contains a single class; need both bonafide and attack")

    means = X_raw.mean(axis=0)
    X = X_raw - means
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    X = X / np.where(norms == 0, 1.0, norms)
    y = np.where(y01 > 0, 1.0, -1.0)

    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    lam = regularization
    for t in range(1, iterations + 1):
        eta = 1.0 / (lam * t)
        margins = y * (X @ w + b)
        viol = margins < 1.0
        grad_w = lam * w
        grad_b = 0.0
        if viol.any():
            grad_w = grad_w - (y[viol, None] * X[viol]).sum(axis=0) / n
            grad_b = -(y[viol].sum()) / n
        w = w - eta * grad_w
        b = b - eta * grad_b
    return LinearClassifier(weights=w, bias=b, column_means=means)
