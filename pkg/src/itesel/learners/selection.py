"""Candidate algorithm specs, batched fitting and cross-validated selection."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..core import RandomStream
from .elastic_net import ElasticNetModel, fit_path
from .gbt import DEPTH, MIN_NODE, SHRINKAGE, TreeEnsemble, fit_gbt

ALPHA = 0.5
LAMBDA_GRID = tuple(float(v) for v in np.exp(np.linspace(-5.0, 2.0, 20)))
TREE_GRID = (1, 2, 5, 10, 25, 50, 100, 200, 350, 500)


@dataclass(frozen=True)
class AlgoSpec:
    """A base learner family with its single tuned hyperparameter.

    ``value`` is lambda for ``elastic_net`` and the tree count for ``gbt``.
    """

    family: str
    value: float

    def __post_init__(self):
        if self.family not in ("elastic_net", "gbt"):
            raise ValueError(f"unknown family {self.family!r}")
        if self.family == "gbt":
            if int(self.value) != self.value or self.value < 1:
                raise ValueError("gbt tree count must be a positive integer")
            object.__setattr__(self, "value", int(self.value))
        elif self.value < 0:
            raise ValueError("elastic_net lambda must be >= 0")

    @property
    def hyper(self) -> str:
        if self.family == "gbt":
            return f"trees={self.value}"
        return f"lambda={format(self.value, '.17g')}"


def default_candidates(lambdas: Sequence[float] = LAMBDA_GRID,
                       tree_counts: Sequence[int] = TREE_GRID) -> list[AlgoSpec]:
    return ([AlgoSpec("elastic_net", float(l)) for l in lambdas]
            + [AlgoSpec("gbt", int(t)) for t in tree_counts])


@dataclass(frozen=True, eq=False)
class FittedPredictor:
    """A fitted base model viewed at one hyperparameter setting."""

    spec: AlgoSpec
    model: ElasticNetModel | TreeEnsemble

    def predict(self, X) -> np.ndarray:
        if isinstance(self.model, TreeEnsemble):
            return self.model.predict(X, tree_count=self.spec.value)
        return self.model.predict(X)


def predict(model, X, tree_count: int | None = None) -> np.ndarray:
    if isinstance(model, TreeEnsemble):
        return model.predict(X, tree_count)
    return model.predict(X)


@dataclass(frozen=True)
class LearnerSettings:
    alpha: float = ALPHA
    depth: int = DEPTH
    shrinkage: float = SHRINKAGE
    min_node: int = MIN_NODE


def fit_candidates(X, y, weights, candidates: Sequence[AlgoSpec],
                   settings: LearnerSettings = LearnerSettings()) -> list[FittedPredictor]:
    """Fit all candidates at once.

    Elastic-net lambdas share one warm-started path; all tree counts share a
    single ensemble grown to the largest count and read by prefix.
    """
    out: list[FittedPredictor | None] = [None] * len(candidates)
    en = [i for i, c in enumerate(candidates) if c.family == "elastic_net"]
    gb = [i for i, c in enumerate(candidates) if c.family == "gbt"]
    if en:
        models = fit_path(X, y, weights, settings.alpha, [candidates[i].value for i in en])
        for i, m in zip(en, models):
            out[i] = FittedPredictor(candidates[i], m)
    if gb:
        n_max = max(candidates[i].value for i in gb)
        ens = fit_gbt(X, y, weights, n_trees=n_max, depth=settings.depth,
                      shrinkage=settings.shrinkage, min_node=settings.min_node)
        for i in gb:
            out[i] = FittedPredictor(candidates[i], ens)
    return out


def fold_ids(n: int, folds: int, stream: RandomStream, strata=None) -> np.ndarray:
    """Balanced random fold labels, optionally stratified (round-robin within strata)."""
    if folds < 2:
        raise ValueError("need at least 2 folds")
    if n < 2 * folds:
        raise ValueError(f"{n} rows cannot fill {folds} folds with two rows each")
    gen = stream.generator()
    ids = np.empty(n, dtype=np.intp)
    if strata is None:
        ids[gen.permutation(n)] = np.arange(n) % folds
        return ids
    strata = np.asarray(strata)
    offset = 0
    for s in np.unique(strata):
        rows = np.flatnonzero(strata == s)
        ids[rows[gen.permutation(rows.size)]] = (np.arange(rows.size) + offset) % folds
        offset += rows.size
    return ids


@dataclass(frozen=True, eq=False)
class CrossValResult:
    best: AlgoSpec
    best_index: int
    oof: np.ndarray  # out-of-fold predictions of the winner for every row
    cv_mse: np.ndarray  # per candidate


def cross_val_select(X, y, weights, candidates: Sequence[AlgoSpec], folds: int = 5,
                     stream: RandomStream | None = None, *, folds_of=None,
                     settings: LearnerSettings = LearnerSettings()) -> CrossValResult:
    """Choose the candidate with the lowest out-of-fold weighted MSE.

    Row i's out-of-fold prediction comes from a model fit without row i.
    Rows with zero weight are neither fit nor scored but still receive
    predictions. Ties go to the earliest candidate.
    """
    if not candidates:
        raise ValueError("candidates must be non-empty")
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = y.shape[0]
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=np.float64)
    if folds_of is None:
        if stream is None:
            raise ValueError("a RandomStream or explicit folds_of is required")
        folds_of = fold_ids(n, folds, stream)
    folds_of = np.asarray(folds_of)
    labels = np.unique(folds_of)
    if labels.size < 2:
        raise ValueError("need at least 2 folds")
    if min(np.sum(folds_of == k) for k in labels) < 2:
        raise ValueError("every fold needs at least two rows")

    preds = np.empty((len(candidates), n))
    for k in labels:
        held = folds_of == k
        fits = fit_candidates(X[~held], y[~held], weights[~held], candidates, settings)
        Xh = X[held]
        for c, f in enumerate(fits):
            preds[c, held] = f.predict(Xh)
    wsum = weights.sum()
    cv_mse = ((preds - y) ** 2 @ weights) / wsum
    best = int(np.argmin(cv_mse))
    return CrossValResult(candidates[best], best, preds[best].copy(), cv_mse)
