"""One-to-one nearest opposite-arm matching under Mahalanobis distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset

RIDGE = 1e-6


@dataclass(frozen=True, eq=False)
class MatchAssignment:
    partner: np.ndarray
    distance: np.ndarray


def whitening(X, ridge: float = RIDGE) -> np.ndarray:
    """Lower-triangular ``L`` with ``L L^T`` the ridge-regularized pooled covariance."""
    X = np.asarray(X, dtype=np.float64)
    d = X.shape[1]
    if X.shape[0] > 1:
        S = np.atleast_2d(np.cov(X, rowvar=False))
    else:
        S = np.zeros((d, d))
    tr = np.trace(S)
    S = S + ridge * (tr / d if tr > 0 else 1.0) * np.eye(d)
    return np.linalg.cholesky(S)


def mahalanobis_match(data: Dataset, ridge: float = RIDGE) -> MatchAssignment:
    """Match every row to its closest row in the other arm, with replacement.

    Ties go to the lowest row index.
    """
    treated, control = data.arm(1), data.arm(0)
    if treated.size == 0 or control.size == 0:
        raise ValueError("both treatment arms must be non-empty")
    L = whitening(data.X, ridge)
    Z = np.linalg.solve(L, data.X.T).T  # Z rows have identity covariance

    partner = np.empty(data.n, dtype=np.intp)
    dist = np.empty(data.n)
    for rows, pool in ((treated, control), (control, treated)):
        Zp = Z[pool]
        for i in rows:
            diff = Zp - Z[i]
            d2 = np.einsum("ij,ij->i", diff, diff)
            k = int(np.argmin(d2))  # pool is sorted, so first minimum is lowest index
            partner[i] = pool[k]
            dist[i] = np.sqrt(d2[k])
    return MatchAssignment(partner, dist)
