"""Validation-set metrics for choosing among treatment-effect models.

All metrics are computed from a model's predictions on the validation rows
(:class:`ModelPredictions`), the validation data, and validation-only
nuisance estimates and matches.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, RandomStream, SelectionError, UndefinedScoreError, UnsupportedModelError
from .matching import MatchAssignment
from .nuisance import NuisanceEstimates

MINIMIZE, MAXIMIZE = "minimize", "maximize"

DIRECTION = {
    "random": MINIMIZE,
    "mu_risk": MINIMIZE,
    "mu_risk_iptw": MINIMIZE,
    "value_iptw": MAXIMIZE,
    "value_dr": MAXIMIZE,
    "tau_risk_match": MINIMIZE,
    "tau_risk_iptw": MINIMIZE,
    "tau_risk_r": MINIMIZE,
    "gain_simple": MAXIMIZE,
    "gain_iptw": MAXIMIZE,
}
METRIC_IDS = tuple(DIRECTION)
# The comparison set used by the benchmark by default.
TABLE_METRICS = ("random", "mu_risk", "mu_risk_iptw", "value_iptw", "value_dr",
                 "tau_risk_match", "tau_risk_iptw", "tau_risk_r")


@dataclass(frozen=True, eq=False)
class ModelPredictions:
    tau: np.ndarray
    mu0: np.ndarray | None = None
    mu1: np.ndarray | None = None
    reconstructed: bool = False

    def mu_observed(self, w) -> np.ndarray:
        if self.mu0 is None or self.mu1 is None:
            raise UnsupportedModelError("model has no outcome predictions")
        return np.where(np.asarray(w) == 1, self.mu1, self.mu0)


def predictions_for(model, X, nuis: NuisanceEstimates | None = None) -> ModelPredictions:
    """Evaluate a TauModel on validation rows.

    Models without outcome predictors get implied outcome models
    ``mu1 = m + (1 - p) tau`` and ``mu0 = m - p tau`` when ``nuis`` has
    ``m_check`` and ``p_check``.
    """
    outcomes = model.predict_outcomes(X)
    if outcomes is not None:
        mu0, mu1 = outcomes
        return ModelPredictions(mu1 - mu0, mu0, mu1)
    tau = model.predict_tau(X)
    if nuis is not None and nuis.m_check is not None and nuis.p_check is not None:
        return ModelPredictions(tau, nuis.m_check - nuis.p_check * tau,
                                nuis.m_check + (1.0 - nuis.p_check) * tau, reconstructed=True)
    return ModelPredictions(tau)


def policy(tau_hat) -> np.ndarray:
    """Treat exactly where the estimated effect is strictly positive."""
    return (np.asarray(tau_hat) > 0).astype(np.int64)


def _p_obs(val: Dataset, nuis: NuisanceEstimates) -> np.ndarray:
    return nuis.p_observed(val.w)


def mu_risk(pred: ModelPredictions, val: Dataset) -> float:
    return float(np.mean((pred.mu_observed(val.w) - val.y) ** 2))


def mu_risk_iptw(pred: ModelPredictions, val: Dataset, nuis: NuisanceEstimates) -> float:
    return float(np.mean((pred.mu_observed(val.w) - val.y) ** 2 / _p_obs(val, nuis)))


def value_iptw(pred: ModelPredictions, val: Dataset, nuis: NuisanceEstimates) -> float:
    d = policy(pred.tau)
    return float(np.mean(val.y * (val.w == d) / _p_obs(val, nuis)))


def value_dr(pred: ModelPredictions, val: Dataset, nuis: NuisanceEstimates) -> float:
    """Doubly robust score; every term carries d(x), so d == 0 contributes nothing."""
    d = policy(pred.tau)
    correction = (2 * val.w - 1) * (val.y - nuis.mu_observed(val.w)) / _p_obs(val, nuis)
    return float(np.mean(d * (nuis.mu1_check - nuis.mu0_check + correction)))


def gain_simple(pred: ModelPredictions, val: Dataset) -> float:
    """Uplift among d=1 rows, valid for a constant propensity."""
    d = policy(pred.tau)
    n_d = int(d.sum())
    if n_d == 0:
        return 0.0
    t = (d == 1) & (val.w == 1)
    c = (d == 1) & (val.w == 0)
    if not t.any() or not c.any():
        raise UndefinedScoreError("no treated or no untreated rows where the policy treats")
    return float((val.y[t].mean() - val.y[c].mean()) * n_d / val.n)


def gain_iptw(pred: ModelPredictions, val: Dataset, nuis: NuisanceEstimates) -> float:
    d = policy(pred.tau)
    p = nuis.p_check
    return float((np.sum(val.y * d * val.w / p) - np.sum(val.y * d * (1 - val.w) / (1 - p))) / val.n)


def matched_effects(val: Dataset, match: MatchAssignment) -> np.ndarray:
    return (2 * val.w - 1) * (val.y - val.y[match.partner])


def tau_risk_match(pred: ModelPredictions, val: Dataset, match: MatchAssignment) -> float:
    return float(np.mean((pred.tau - matched_effects(val, match)) ** 2))


def transformed_outcome(val: Dataset, nuis: NuisanceEstimates) -> np.ndarray:
    return (2 * val.w - 1) * val.y / _p_obs(val, nuis)


def tau_risk_iptw(pred: ModelPredictions, val: Dataset, nuis: NuisanceEstimates) -> float:
    return float(np.mean((pred.tau - transformed_outcome(val, nuis)) ** 2))


def tau_risk_r(pred: ModelPredictions, val: Dataset, nuis: NuisanceEstimates) -> float:
    return float(np.mean(((val.y - nuis.m_check) - (val.w - nuis.p_check) * pred.tau) ** 2))


def score(metric: str, pred: ModelPredictions, val: Dataset,
          nuis: NuisanceEstimates | None = None, match: MatchAssignment | None = None) -> float:
    """Score one model under one (non-random) metric."""
    if metric == "mu_risk":
        return mu_risk(pred, val)
    if metric == "gain_simple":
        return gain_simple(pred, val)
    if metric == "tau_risk_match":
        if match is None:
            raise ValueError("tau_risk_match needs a MatchAssignment")
        return tau_risk_match(pred, val, match)
    fn = {
        "mu_risk_iptw": mu_risk_iptw,
        "value_iptw": value_iptw,
        "value_dr": value_dr,
        "gain_iptw": gain_iptw,
        "tau_risk_iptw": tau_risk_iptw,
        "tau_risk_r": tau_risk_r,
    }.get(metric)
    if fn is None:
        raise ValueError(f"unknown or unscorable metric {metric!r}")
    if nuis is None:
        raise ValueError(f"{metric} needs nuisance estimates")
    return fn(pred, val, nuis)


def random_keys(n_models: int, stream: RandomStream) -> np.ndarray:
    """iid uniform keys; the argmin is a uniform draw over the models."""
    return stream.generator().random(n_models)


def score_models(metric: str, preds: Sequence[ModelPredictions], val: Dataset,
                 nuis=None, match=None, stream: RandomStream | None = None) -> list[float | None]:
    """Scores per model, ``None`` where the model is unscorable under ``metric``."""
    if metric == "random":
        if stream is None:
            raise ValueError("the random metric needs a RandomStream")
        return [float(k) for k in random_keys(len(preds), stream)]
    out: list[float | None] = []
    for p in preds:
        try:
            out.append(score(metric, p, val, nuis, match))
        except (UnsupportedModelError, UndefinedScoreError):
            out.append(None)
    return out


def best_index(scores: Sequence[float | None], metric: str) -> int:
    """Optimum over scorable models; ties go to the lowest index."""
    sign = 1.0 if DIRECTION[metric] == MINIMIZE else -1.0
    best, best_val = -1, np.inf
    for i, s in enumerate(scores):
        if s is None or not np.isfinite(s):
            continue
        if sign * s < best_val:
            best, best_val = i, sign * s
    if best < 0:
        raise SelectionError(f"no model can be scored under {metric}")
    return best


def select(preds: Sequence[ModelPredictions], metric: str, val: Dataset,
           nuis=None, match=None, stream: RandomStream | None = None) -> int:
    if not preds:
        raise ValueError("no models to select from")
    return best_index(score_models(metric, preds, val, nuis, match, stream), metric)
