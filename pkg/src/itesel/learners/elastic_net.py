"""Weighted elastic net fit by cyclic coordinate descent.

The objective is minimized over standardized features::

    1/2 * sum_i v_i (y_i - b0 - z_i . beta)^2
        + lam * (alpha * |beta|_1 + (1 - alpha) * |beta|_2^2 / 2)

with ``v = weights / weights.sum()`` and ``z`` the columns centered and
scaled by their weighted mean and standard deviation. The intercept is
unpenalized.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .. import _kernels

TOL = 1e-7
MAX_SWEEPS = 10_000


@dataclass(frozen=True, eq=False)
class ElasticNetModel:
    coefficients: np.ndarray  # original feature scale
    intercept: float
    alpha: float
    lam: float
    means: np.ndarray
    scales: np.ndarray
    beta_std: np.ndarray  # standardized scale
    n_sweeps: int = 0

    @property
    def n_features(self) -> int:
        return self.coefficients.shape[0]

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} columns, got shape {X.shape}")
        return X @ self.coefficients + self.intercept


@dataclass(frozen=True, eq=False)
class StandardizedProblem:
    """Weighted Gram form of a regression problem, shared across a lambda path."""

    G: np.ndarray
    c: np.ndarray
    y_mean: float
    means: np.ndarray
    scales: np.ndarray
    Z: np.ndarray
    yc: np.ndarray
    v: np.ndarray


def _validate(X, y, weights):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError("X must be n x d and y length n")
    weights = np.ones(y.shape[0]) if weights is None else np.asarray(weights, dtype=np.float64)
    if weights.shape != y.shape:
        raise ValueError("weights must have length n")
    if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y)) and np.all(np.isfinite(weights))):
        raise ValueError("inputs must be finite")
    if np.any(weights < 0):
        raise ValueError("weights must be nonnegative")
    keep = weights > 0
    if not keep.any():
        raise ValueError("at least one weight must be positive")
    if keep.sum() < 2:
        raise ValueError("need at least two rows with positive weight")
    return X[keep], y[keep], weights[keep]


def standardize(X, y, weights=None) -> StandardizedProblem:
    """Rows with zero weight are dropped; they do not enter the objective."""
    X, y, weights = _validate(X, y, weights)
    v = weights / weights.sum()
    means = v @ X
    centered = X - means
    scales = np.sqrt(v @ centered**2)
    const = scales <= 1e-12 * np.maximum(1.0, np.abs(means))
    scales = np.where(const, 1.0, scales)
    Z = centered / scales
    Z[:, const] = 0.0
    y_mean = float(v @ y)
    yc = y - y_mean
    Zv = Z * v[:, None]
    G = np.ascontiguousarray(Zv.T @ Z)
    c = np.ascontiguousarray(Zv.T @ yc)
    return StandardizedProblem(G, c, y_mean, means, scales, Z, yc, v)


def objective(prob: StandardizedProblem, beta_std, alpha: float, lam: float) -> float:
    """Penalized objective at standardized coefficients (intercept profiled out)."""
    beta_std = np.asarray(beta_std, dtype=np.float64)
    r = prob.yc - prob.Z @ beta_std
    return float(0.5 * prob.v @ r**2 + lam * (alpha * np.abs(beta_std).sum()
                                               + (1 - alpha) * 0.5 * beta_std @ beta_std))


def kkt_residuals(prob: StandardizedProblem, beta_std, alpha: float, lam: float) -> np.ndarray:
    beta_std = np.asarray(beta_std, dtype=np.float64)
    grad = prob.c - prob.G @ beta_std - lam * (1 - alpha) * beta_std
    l1 = lam * alpha
    nz = beta_std != 0
    res = np.where(nz, np.abs(grad - l1 * np.sign(beta_std)), np.maximum(0.0, np.abs(grad) - l1))
    res[np.diag(prob.G) <= 0] = 0.0
    return res


def _finish(prob, beta, alpha, lam, sweeps) -> ElasticNetModel:
    beta = beta.copy()
    coef = beta / prob.scales
    intercept = prob.y_mean - float(coef @ prob.means)
    return ElasticNetModel(coef, intercept, alpha, lam, prob.means, prob.scales, beta, sweeps)


def fit_path(X, y, weights, alpha: float, lambdas: Sequence[float]) -> list[ElasticNetModel]:
    """Fit every lambda, warm-starting from the largest; output follows input order."""
    lambdas = [float(l) for l in lambdas]
    if any(l < 0 for l in lambdas):
        raise ValueError("lambda must be >= 0")
    if not 0.0 <= alpha <= 1.0:
        raise ValueError("alpha must lie in [0, 1]")
    prob = standardize(X, y, weights)
    d = prob.G.shape[0]
    beta = np.zeros(d)
    q = np.zeros(d)
    out: list[ElasticNetModel | None] = [None] * len(lambdas)
    for k in sorted(range(len(lambdas)), key=lambda i: -lambdas[i]):
        lam = lambdas[k]
        sweeps = _kernels.coordinate_descent(
            prob.G, prob.c, beta, q, lam * alpha, lam * (1 - alpha), TOL, MAX_SWEEPS
        )
        out[k] = _finish(prob, beta, alpha, lam, sweeps)
    return out


def fit_elastic_net(X, y, weights=None, alpha: float = 0.5, lam: float = 1.0) -> ElasticNetModel:
    return fit_path(X, y, weights, alpha, [lam])[0]
