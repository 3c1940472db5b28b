"""S-, T- and R-learners built from the base regressors."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset
from .learners import AlgoSpec, FittedPredictor, LearnerSettings, default_candidates, fit_candidates

META_LEARNERS = ("S", "T", "R")
WINSOR_PCT = (0.5, 99.5)


def augment(X, w) -> np.ndarray:
    """S-learner design matrix ``[x, (w - 0.5) x, (w - 0.5)]``."""
    X = np.asarray(X, dtype=np.float64)
    c = (np.broadcast_to(np.asarray(w, dtype=np.float64), (X.shape[0],)) - 0.5)[:, None]
    return np.hstack([X, c * X, c])


class TauModel:
    """A fitted treatment-effect model.

    ``predict_outcomes`` returns ``(mu0_hat, mu1_hat)`` for learners that
    model the outcome, and ``None`` otherwise.
    """

    meta_learner: str
    spec: AlgoSpec

    def predict_tau(self, X) -> np.ndarray:
        raise NotImplementedError

    def predict_outcomes(self, X) -> tuple[np.ndarray, np.ndarray] | None:
        return None

    @property
    def label(self) -> str:
        return f"{self.meta_learner}/{self.spec.family}/{self.spec.hyper}"

    def __repr__(self):
        return f"{type(self).__name__}({self.label})"


class _OutcomeModel(TauModel):
    def predict_tau(self, X) -> np.ndarray:
        mu0, mu1 = self.predict_outcomes(X)
        return mu1 - mu0


class SLearnerModel(_OutcomeModel):
    meta_learner = "S"

    def __init__(self, outcome: FittedPredictor):
        self.spec = outcome.spec
        self.outcome = outcome

    def predict_outcomes(self, X):
        return self.outcome.predict(augment(X, 0.0)), self.outcome.predict(augment(X, 1.0))


class TLearnerModel(_OutcomeModel):
    meta_learner = "T"

    def __init__(self, mu0: FittedPredictor, mu1: FittedPredictor):
        self.spec = mu0.spec
        self.mu0 = mu0
        self.mu1 = mu1

    def predict_outcomes(self, X):
        return self.mu0.predict(X), self.mu1.predict(X)


class RLearnerModel(TauModel):
    meta_learner = "R"

    def __init__(self, tau: FittedPredictor, m_hat: np.ndarray, p_hat: np.ndarray):
        self.spec = tau.spec
        self.tau = tau
        self.training_nuisance = (m_hat, p_hat)

    def predict_tau(self, X) -> np.ndarray:
        return self.tau.predict(X)


def _require_both_arms(train: Dataset, min_rows: int = 1):
    n1 = int(train.w.sum())
    n0 = train.n - n1
    if min(n0, n1) < min_rows:
        raise ValueError(f"each arm needs at least {min_rows} rows (got {n0} untreated, {n1} treated)")


def fit_s_learners(train: Dataset, specs: Sequence[AlgoSpec],
                   settings: LearnerSettings = LearnerSettings()) -> list[SLearnerModel]:
    _require_both_arms(train)
    fits = fit_candidates(augment(train.X, train.w), train.y, None, specs, settings)
    return [SLearnerModel(f) for f in fits]


def fit_t_learners(train: Dataset, specs: Sequence[AlgoSpec],
                   settings: LearnerSettings = LearnerSettings()) -> list[TLearnerModel]:
    _require_both_arms(train, max(2, 2 * settings.min_node))
    arms = [train.arm(0), train.arm(1)]
    f0, f1 = (fit_candidates(train.X[a], train.y[a], None, specs, settings) for a in arms)
    return [TLearnerModel(a, b) for a, b in zip(f0, f1)]


def r_pseudo_problem(train: Dataset, m_hat, p_hat) -> tuple[np.ndarray, np.ndarray]:
    """Pseudo-outcomes ``(y - m)/(w - p)`` and weights ``(w - p)^2``."""
    m_hat = np.asarray(m_hat, dtype=np.float64)
    p_hat = np.asarray(p_hat, dtype=np.float64)
    if m_hat.shape != (train.n,) or p_hat.shape != (train.n,):
        raise ValueError("m_hat and p_hat must align with the training rows")
    if not np.all(np.isfinite(m_hat)):
        raise ValueError("m_hat must be finite")
    if not np.all((p_hat > 0) & (p_hat < 1)):
        raise ValueError("p_hat entries must lie strictly inside (0, 1)")
    resid_w = train.w - p_hat
    return (train.y - m_hat) / resid_w, resid_w**2


def r_objective(train: Dataset, m_hat, p_hat, tau_values) -> float:
    """Mean of ``((y - m) - (w - p) t(x))^2`` over training rows."""
    r = (train.y - m_hat) - (train.w - p_hat) * np.asarray(tau_values)
    return float(np.mean(r**2))


def fit_r_learners(train: Dataset, m_hat, p_hat, specs: Sequence[AlgoSpec],
                   settings: LearnerSettings = LearnerSettings()) -> list[RLearnerModel]:
    pseudo, weights = r_pseudo_problem(train, m_hat, p_hat)
    out: list[RLearnerModel | None] = [None] * len(specs)
    en = [i for i, s in enumerate(specs) if s.family == "elastic_net"]
    gb = [i for i, s in enumerate(specs) if s.family == "gbt"]
    if en:
        for i, f in zip(en, fit_candidates(train.X, pseudo, weights, [specs[i] for i in en], settings)):
            out[i] = RLearnerModel(f, m_hat, p_hat)
    if gb:
        # heavy tails near w ~ p destabilize leaf means
        lo, hi = np.percentile(pseudo, WINSOR_PCT)
        clipped = np.clip(pseudo, lo, hi)
        for i, f in zip(gb, fit_candidates(train.X, clipped, weights, [specs[i] for i in gb], settings)):
            out[i] = RLearnerModel(f, m_hat, p_hat)
    return out


def fit_s_learner(train: Dataset, spec: AlgoSpec, settings=LearnerSettings()) -> SLearnerModel:
    return fit_s_learners(train, [spec], settings)[0]


def fit_t_learner(train: Dataset, spec: AlgoSpec, settings=LearnerSettings()) -> TLearnerModel:
    return fit_t_learners(train, [spec], settings)[0]


def fit_r_learner(train: Dataset, m_hat, p_hat, spec: AlgoSpec,
                  settings=LearnerSettings()) -> RLearnerModel:
    return fit_r_learners(train, m_hat, p_hat, [spec], settings)[0]


@dataclass(frozen=True)
class ModelGrid:
    entries: tuple[tuple[str, AlgoSpec], ...]

    def __post_init__(self):
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("duplicate (meta_learner, spec) pairs in model grid")

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def specs_for(self, meta_learner: str) -> list[AlgoSpec]:
        return [s for m, s in self.entries if m == meta_learner]


def enumerate_models(specs: Sequence[AlgoSpec] | None = None,
                     meta_learners: Sequence[str] = META_LEARNERS) -> ModelGrid:
    """Cross product of meta-learners and algorithm specs (90 models by default)."""
    specs = default_candidates() if specs is None else list(specs)
    return ModelGrid(tuple((m, s) for m in meta_learners for s in specs))


def fit_grid(grid: ModelGrid, train: Dataset, m_hat=None, p_hat=None,
             settings: LearnerSettings = LearnerSettings()) -> list[TauModel]:
    """Fit every model in ``grid``; output order follows the grid."""
    fitted: dict[str, list[TauModel]] = {}
    for meta in META_LEARNERS:
        specs = grid.specs_for(meta)
        if not specs:
            continue
        if meta == "S":
            fitted[meta] = fit_s_learners(train, specs, settings)
        elif meta == "T":
            fitted[meta] = fit_t_learners(train, specs, settings)
        else:
            if m_hat is None or p_hat is None:
                raise ValueError("R-learners need training nuisances m_hat and p_hat")
            fitted[meta] = fit_r_learners(train, m_hat, p_hat, specs, settings)
    cursor = {m: iter(v) for m, v in fitted.items()}
    return [next(cursor[m]) for m, _ in grid]
