"""Simulated cohorts with known potential-outcome means.

Covariates: columns x1..x8 are independent standard normals and x9..x12
independent Bernoulli(0.5). Each ``mean_fn_id`` fixes a pair (mu0, tau),
with mu1 = mu0 + tau:

====  ==================  =====================================================
id    family              functions (1-based covariate names)
====  ==================  =====================================================
1     null effect         mu0 = 1.5 sin(x1) + 0.5 x2^2 - x9;  tau = 0
2     linear              mu0 = x1 + 0.5 x2 - 0.5 x3 + x9;  tau = 0.5 + x1 - 0.5 x3
3     linear              mu0 = 2 x2 - x4 + x10;  tau = 1 - 0.8 x2 + 0.5 x10
4     piecewise constant  mu0 = 2 I(x1>0) - 1.5 I(x2>0.5) + x9;
                          tau = 2 I(x3>0) x10 - 0.5
5     piecewise constant  mu0 = 3 I(x1>1) + 2 I(x4<0) x11;
                          tau = 1.5 I(x2>-0.5) + I(x5>1) - 0.5
6     smooth nonlinear    mu0 = sin(x1) + 0.5 x2 x3 + 0.5 x4^2;
                          tau = 0.5 x1 x2 + tanh(x3)
7     smooth nonlinear    mu0 = exp(x1/2) + cos(x2);  tau = sin(x2) + 0.5 x3^2 - 0.5
8     mixed               mu0 = x1 - x2 + 2 I(x3>0);  tau = (x1 + 0.5)(2 x9 - 1)
====  ==================  =====================================================

Scenarios 1-8 assign treatment with probability 0.5. Scenarios 9-16 reuse
the same mean functions with p(x) = clip(logistic(s(x)), 0.1, 0.9), where
s(x) is a linear score in the covariates driving mu0, standardized under the
covariate law (not the sample), so p depends on x alone.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .core import Dataset, RandomStream

COVARIATE_DIM = 12
N_GAUSSIAN = 8
PROPENSITY_BOUNDS = (0.1, 0.9)


@dataclass(frozen=True)
class ScenarioSpec:
    id: int
    mean_fn_id: int
    assignment: str
    noise_sd: float
    covariate_dim: int = COVARIATE_DIM

    def __post_init__(self):
        if not 1 <= self.id <= 16:
            raise ValueError(f"scenario id must be in 1..16, got {self.id}")
        if self.mean_fn_id not in _MEAN_FNS:
            raise ValueError(f"unknown mean_fn_id {self.mean_fn_id}")
        if self.assignment not in ("randomized", "biased"):
            raise ValueError(f"assignment must be randomized or biased, got {self.assignment!r}")
        if not self.noise_sd > 0:
            raise ValueError("noise_sd must be positive")
        if self.covariate_dim != COVARIATE_DIM:
            raise ValueError(f"the scenario bank is defined for {COVARIATE_DIM} covariates")

    @property
    def randomized(self) -> bool:
        return self.assignment == "randomized"


@dataclass(frozen=True, eq=False)
class GroundTruth:
    mu0: np.ndarray
    mu1: np.ndarray
    tau: np.ndarray
    propensity: np.ndarray

    @property
    def n(self) -> int:
        return self.tau.shape[0]

    def subset(self, idx) -> "GroundTruth":
        return GroundTruth(self.mu0[idx], self.mu1[idx], self.tau[idx], self.propensity[idx])


def _ind(cond):
    return cond.astype(np.float64)


def _f1(X):
    mu0 = 1.5 * np.sin(X[:, 0]) + 0.5 * X[:, 1] ** 2 - X[:, 8]
    return mu0, np.zeros(X.shape[0])


def _f2(X):
    mu0 = X[:, 0] + 0.5 * X[:, 1] - 0.5 * X[:, 2] + X[:, 8]
    return mu0, 0.5 + X[:, 0] - 0.5 * X[:, 2]


def _f3(X):
    mu0 = 2.0 * X[:, 1] - X[:, 3] + X[:, 9]
    return mu0, 1.0 - 0.8 * X[:, 1] + 0.5 * X[:, 9]


def _f4(X):
    mu0 = 2.0 * _ind(X[:, 0] > 0) - 1.5 * _ind(X[:, 1] > 0.5) + X[:, 8]
    return mu0, 2.0 * _ind(X[:, 2] > 0) * X[:, 9] - 0.5


def _f5(X):
    mu0 = 3.0 * _ind(X[:, 0] > 1) + 2.0 * _ind(X[:, 3] < 0) * X[:, 10]
    return mu0, 1.5 * _ind(X[:, 1] > -0.5) + _ind(X[:, 4] > 1) - 0.5


def _f6(X):
    mu0 = np.sin(X[:, 0]) + 0.5 * X[:, 1] * X[:, 2] + 0.5 * X[:, 3] ** 2
    return mu0, 0.5 * X[:, 0] * X[:, 1] + np.tanh(X[:, 2])


def _f7(X):
    mu0 = np.exp(X[:, 0] / 2.0) + np.cos(X[:, 1])
    return mu0, np.sin(X[:, 1]) + 0.5 * X[:, 2] ** 2 - 0.5


def _f8(X):
    mu0 = X[:, 0] - X[:, 1] + 2.0 * _ind(X[:, 2] > 0)
    return mu0, (X[:, 0] + 0.5) * (2.0 * X[:, 8] - 1.0)


_MEAN_FNS = {1: _f1, 2: _f2, 3: _f3, 4: _f4, 5: _f5, 6: _f6, 7: _f7, 8: _f8}

# Linear score coefficients for biased assignment, keyed by 0-based column.
_SCORES = {
    1: {0: 1.0, 8: -1.0},
    2: {0: 1.0, 1: 0.5, 2: -0.5, 8: 1.0},
    3: {1: 2.0, 3: -1.0, 9: 1.0},
    4: {0: 1.0, 1: -1.0, 8: 1.0},
    5: {0: 1.0, 3: -1.0, 10: 1.0},
    6: {0: 1.0, 3: 0.5},
    7: {0: 1.0, 1: -0.5},
    8: {0: 1.0, 1: -1.0, 2: 1.0},
}

_COV_MEAN = np.r_[np.zeros(N_GAUSSIAN), np.full(COVARIATE_DIM - N_GAUSSIAN, 0.5)]
_COV_VAR = np.r_[np.ones(N_GAUSSIAN), np.full(COVARIATE_DIM - N_GAUSSIAN, 0.25)]


def load_catalog(path=None) -> dict[int, ScenarioSpec]:
    """Scenario bank keyed by id, read from the shipped JSON catalog by default."""
    if path is None:
        text = resources.files("itesel").joinpath("scenarios.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    raw = json.loads(text)
    dim = raw.get("covariate_dim", COVARIATE_DIM)
    return {
        int(s["id"]): ScenarioSpec(
            id=int(s["id"]), mean_fn_id=int(s["mean_fn_id"]),
            assignment=s["assignment"], noise_sd=float(s["noise_sd"]),
            covariate_dim=int(dim),
        )
        for s in raw["scenarios"]
    }


def get_scenario(scenario_id: int) -> ScenarioSpec:
    catalog = load_catalog()
    if scenario_id not in catalog:
        raise ValueError(f"no scenario {scenario_id} in catalog")
    return catalog[scenario_id]


def _check_X(spec: ScenarioSpec, X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2 or X.shape[1] != spec.covariate_dim:
        raise ValueError(f"X must have {spec.covariate_dim} columns, got shape {X.shape}")
    return X


def _means(spec: ScenarioSpec, X: np.ndarray):
    mu0, effect = _MEAN_FNS[spec.mean_fn_id](X)
    mu1 = mu0 + effect
    # recomputed so tau == mu1 - mu0 holds exactly in floating point
    return mu0, mu1, mu1 - mu0


def oracle_tau(spec: ScenarioSpec, X) -> np.ndarray:
    return _means(spec, _check_X(spec, X))[2]


def oracle_mu(spec: ScenarioSpec, X, arm: int) -> np.ndarray:
    if arm not in (0, 1):
        raise ValueError("arm must be 0 or 1")
    return _means(spec, _check_X(spec, X))[arm]


def propensity(spec: ScenarioSpec, X) -> np.ndarray:
    X = _check_X(spec, X)
    if spec.randomized:
        return np.full(X.shape[0], 0.5)
    coef = np.zeros(spec.covariate_dim)
    for j, v in _SCORES[spec.mean_fn_id].items():
        coef[j] = v
    score = (X - _COV_MEAN) @ coef / np.sqrt(coef**2 @ _COV_VAR)
    return np.clip(1.0 / (1.0 + np.exp(-score)), *PROPENSITY_BOUNDS)


def sample_covariates(n: int, gen: np.random.Generator) -> np.ndarray:
    X = np.empty((n, COVARIATE_DIM))
    X[:, :N_GAUSSIAN] = gen.standard_normal((n, N_GAUSSIAN))
    X[:, N_GAUSSIAN:] = gen.integers(0, 2, size=(n, COVARIATE_DIM - N_GAUSSIAN))
    return X


def sample(spec: ScenarioSpec, n: int, stream: RandomStream) -> tuple[Dataset, GroundTruth]:
    """Draw ``n`` i.i.d. individuals; ground truth rows align with data rows."""
    if n < 2:
        raise ValueError("n must be at least 2")
    gen = stream.generator()
    X = sample_covariates(n, gen)
    mu0, mu1, tau = _means(spec, X)
    p = propensity(spec, X)
    w = (gen.random(n) < p).astype(np.int64)
    y = np.where(w == 1, mu1, mu0) + spec.noise_sd * gen.standard_normal(n)
    return Dataset(X, w, y), GroundTruth(mu0, mu1, tau, p)
