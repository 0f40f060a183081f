"""In-sample classification accuracy of a fitted change-decision model."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ConformabilityError
from .binary import BinaryFit
from .design import DesignMatrix


@dataclass(frozen=True)
class PredictionReport:
    threshold: float
    n: int
    n_correct: int
    success_rate: float
    # rows: observed 0/1, columns: predicted 0/1
    confusion: np.ndarray
    base_rate: float

    @property
    def updater_share(self) -> float:
        return float(self.confusion[1].sum() / self.n)


def predict_change(fit: BinaryFit, X: DesignMatrix, change, threshold: float = 0.5) -> PredictionReport:
    """Predicted class is 1 iff the fitted probability is at least ``threshold``."""
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    change = np.asarray(change).astype(int).ravel()
    if change.shape[0] != X.n:
        raise ConformabilityError("change vector and design differ in length")
    prob = fit.predict_proba(X)
    predicted = (prob >= threshold).astype(int)
    correct = predicted == change
    confusion = np.zeros((2, 2), dtype=int)
    np.add.at(confusion, (change, predicted), 1)
    n = int(change.size)
    n_correct = int(correct.sum())
    n_updaters = int(change.sum())
    return PredictionReport(
        threshold=threshold,
        n=n,
        n_correct=n_correct,
        success_rate=n_correct / n,
        confusion=confusion,
        base_rate=max(n_updaters, n - n_updaters) / n,
    )
