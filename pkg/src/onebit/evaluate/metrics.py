"""Evaluate stage: error, sign consistency and support recall of a recovered estimate."""
from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Dict, Sequence

import numpy as np

from src.onebit.errors import InvalidParameterError
from src.onebit.model.signal_model import MeasurementEnsemble, SparseSignal, sign_map
from src.onebit.recover.biht import RecoveryResult

UNIT_NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TrialMetrics:
    """Scores of one recovery against its ground truth."""

    mse: float
    consistency: float
    support_recall: float
    iterations: int
    degenerate: bool

    def as_row(self) -> Dict[str, Any]:
        return asdict(self)


def mse(x: np.ndarray, x_hat: np.ndarray) -> float:
    """Squared Euclidean distance between unit-norm truth and a unit-norm (or zero) estimate."""
    x = np.asarray(x, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    if x.shape != x_hat.shape or x.ndim != 1:
        raise InvalidParameterError(f"Cannot compare vectors of shapes {x.shape} and {x_hat.shape}")
    if abs(float(np.linalg.norm(x)) - 1.0) > UNIT_NORM_TOLERANCE:
        raise InvalidParameterError("Ground truth must be unit-norm")
    if not np.any(x_hat):
        return 1.0
    error = float(np.sum((x - x_hat) ** 2))
    return min(max(error, 0.0), 4.0)


def sign_consistency(matrix: np.ndarray, x_hat: np.ndarray, y: np.ndarray) -> float:
    """Fraction of measurements whose sign the estimate reproduces (sign(0) = +1)."""
    matrix = np.asarray(matrix, dtype=np.float64)
    x_hat = np.asarray(x_hat, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if matrix.ndim != 2 or x_hat.shape != (matrix.shape[1],) or y.shape != (matrix.shape[0],):
        raise InvalidParameterError(
            f"Matrix {matrix.shape}, estimate {x_hat.shape} and measurements {y.shape} do not agree"
        )
    return float(np.mean(sign_map(matrix @ x_hat) == y))


def support_recall(true_support: Sequence[int], x_hat: np.ndarray) -> float:
    """Share of the true support present in the estimate's support."""
    truth = {int(i) for i in true_support}
    if not truth:
        raise InvalidParameterError("True support must be nonempty")
    found = {int(i) for i in np.flatnonzero(np.asarray(x_hat))}
    return len(found & truth) / len(truth)


def score_trial(signal: SparseSignal, ensemble: MeasurementEnsemble, result: RecoveryResult) -> TrialMetrics:
    """Bundle all metrics for one recovery run."""
    return TrialMetrics(
        mse=mse(signal.values, result.estimate),
        consistency=sign_consistency(ensemble.matrix, result.estimate, ensemble.signs),
        support_recall=support_recall(signal.support, result.estimate),
        iterations=result.iterations,
        degenerate=result.degenerate,
    )
