"""Out-of-fold nuisance estimates by cross-validated cross-estimation."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import Dataset, RandomStream
from .learners import AlgoSpec, LearnerSettings, cross_val_select, default_candidates, fold_ids

FOLDS = 5
P_CLIP = (0.025, 0.975)
TARGETS = ("p", "m", "mu0", "mu1")


@dataclass(frozen=True, eq=False)
class NuisanceEstimates:
    """Row-aligned estimates of P(W=1|x), E[Y|x] and E[Y|x, W=w].

    Targets that were not requested are ``None``. ``selected`` records the
    winning candidate per estimated target.
    """

    p_check: np.ndarray | None = None
    m_check: np.ndarray | None = None
    mu0_check: np.ndarray | None = None
    mu1_check: np.ndarray | None = None
    selected: dict | None = None

    def __post_init__(self):
        if self.p_check is not None:
            p = np.clip(np.asarray(self.p_check, dtype=np.float64), *P_CLIP)
            object.__setattr__(self, "p_check", p)
        for name in ("p_check", "m_check", "mu0_check", "mu1_check"):
            v = getattr(self, name)
            if v is not None and not np.all(np.isfinite(v)):
                raise ValueError(f"{name} must be finite")

    def p_observed(self, w) -> np.ndarray:
        """Probability of the arm each row actually received."""
        if self.p_check is None:
            raise ValueError("propensity estimates are missing")
        w = np.asarray(w)
        return np.where(w == 1, self.p_check, 1.0 - self.p_check)

    def mu_observed(self, w) -> np.ndarray:
        if self.mu0_check is None or self.mu1_check is None:
            raise ValueError("arm-specific outcome estimates are missing")
        return np.where(np.asarray(w) == 1, self.mu1_check, self.mu0_check)


def cross_estimate(data: Dataset, folds: int = FOLDS,
                   candidates: Sequence[AlgoSpec] | None = None,
                   stream: RandomStream | None = None,
                   known_propensity: float | None = None,
                   targets: Sequence[str] = TARGETS,
                   settings: LearnerSettings = LearnerSettings()) -> NuisanceEstimates:
    """Estimate the requested targets with folds stratified by treatment.

    The propensity is a squared-loss regression of the 0/1 indicator,
    clipped to ``P_CLIP``; a supplied ``known_propensity`` replaces it.
    Arm-specific means are fit on that arm's rows in the training folds and
    predicted for every held-out row.
    """
    unknown = set(targets) - set(TARGETS)
    if unknown:
        raise ValueError(f"unknown nuisance targets {sorted(unknown)}")
    if stream is None:
        raise ValueError("a RandomStream is required")
    candidates = default_candidates() if candidates is None else list(candidates)
    n1 = int(data.w.sum())
    if min(n1, data.n - n1) < folds:
        raise ValueError("each arm needs at least one row per fold")
    fid = fold_ids(data.n, folds, stream.child("folds"), strata=data.w)
    for k in range(folds):
        wk = data.w[fid == k]
        if wk.min() == wk.max():
            raise ValueError(f"fold {k} is missing a treatment arm")

    out: dict[str, np.ndarray] = {}
    chosen: dict[str, str] = {}

    def run(name, y, weights):
        res = cross_val_select(data.X, y, weights, candidates, folds_of=fid, settings=settings)
        chosen[name] = f"{res.best.family}:{res.best.hyper}"
        return res.oof

    if "p" in targets:
        if known_propensity is not None:
            out["p_check"] = np.full(data.n, float(known_propensity))
            chosen["p"] = "known"
        else:
            out["p_check"] = run("p", data.w.astype(np.float64), None)
    if "m" in targets:
        out["m_check"] = run("m", data.y, None)
    if "mu0" in targets:
        out["mu0_check"] = run("mu0", data.y, (data.w == 0).astype(np.float64))
    if "mu1" in targets:
        out["mu1_check"] = run("mu1", data.y, (data.w == 1).astype(np.float64))
    return NuisanceEstimates(selected=chosen, **out)


def from_truth(mu0=None, mu1=None, propensity=None, m=None) -> NuisanceEstimates:
    """Oracle nuisances from simulation ground truth (used for calibration checks)."""
    return NuisanceEstimates(p_check=propensity, m_check=m, mu0_check=mu0, mu1_check=mu1,
                             selected={"source": "truth"})
