"""True test-set performance of a model, using simulation ground truth."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dgp import GroundTruth
from .metrics import policy


@dataclass(frozen=True)
class EvaluationResult:
    tau_risk_test: float
    value_test: float
    model_id: int
    metric: str


def _check(tau_hat, truth: GroundTruth) -> np.ndarray:
    tau_hat = np.asarray(tau_hat, dtype=np.float64)
    if tau_hat.shape != truth.tau.shape:
        raise ValueError(f"{tau_hat.shape[0]} predictions for {truth.n} ground-truth rows")
    return tau_hat


def test_tau_risk(tau_hat, truth: GroundTruth) -> float:
    """Mean squared error of the effect estimates against the true effects."""
    tau_hat = _check(tau_hat, truth)
    return float(np.mean((tau_hat - truth.tau) ** 2))


def test_value(tau_hat, truth: GroundTruth) -> float:
    """Mean true outcome under the policy implied by ``tau_hat``."""
    d = policy(_check(tau_hat, truth))
    return float(np.mean(np.where(d == 1, truth.mu1, truth.mu0)))


# keep pytest from collecting these as tests when imported into test modules
test_tau_risk.__test__ = False
test_value.__test__ = False


def evaluate(model, test_X, truth: GroundTruth, model_id: int = -1, metric: str = "") -> EvaluationResult:
    tau_hat = model.predict_tau(test_X)
    return EvaluationResult(test_tau_risk(tau_hat, truth), test_value(tau_hat, truth), model_id, metric)
