"""Least-squares gradient boosting with shallow regression trees."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels

DEPTH = 3
SHRINKAGE = 0.2
MIN_NODE = 3


@dataclass(frozen=True, eq=False)
class TreeEnsemble:
    """Trees in heap layout: node k has children 2k+1 and 2k+2; feature -1 is a leaf."""

    feature: np.ndarray  # (n_trees, n_nodes) int
    threshold: np.ndarray  # (n_trees, n_nodes)
    value: np.ndarray  # (n_trees, n_nodes)
    base_prediction: float
    shrinkage: float
    depth: int
    min_node: int
    n_features: int

    @property
    def n_trees(self) -> int:
        return self.feature.shape[0]

    def predict(self, X, tree_count: int | None = None) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected {self.n_features} columns, got shape {X.shape}")
        k = self.n_trees if tree_count is None else int(tree_count)
        if not 0 <= k <= self.n_trees:
            raise ValueError(f"tree_count must be in [0, {self.n_trees}], got {k}")
        return _kernels.predict_trees(
            X, self.feature, self.threshold, self.value,
            self.base_prediction, self.shrinkage, k,
        )


def fit_gbt(X, y, weights=None, n_trees: int = 500, depth: int = DEPTH,
            shrinkage: float = SHRINKAGE, min_node: int = MIN_NODE,
            backend=None) -> TreeEnsemble:
    """Stagewise boosting on weighted residuals.

    Each tree splits on midpoints between sorted distinct feature values,
    maximizing weighted SSE reduction; ties go to the lowest feature index,
    then the lowest threshold. A node with no admissible split is a leaf.
    Rows with zero weight are dropped before fitting.
    """
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
    if n_trees < 1 or depth < 1 or min_node < 1 or not 0 < shrinkage <= 1:
        raise ValueError("need n_trees >= 1, depth >= 1, min_node >= 1, shrinkage in (0, 1]")
    keep = weights > 0
    X, y, weights = X[keep], y[keep], weights[keep]
    n = y.shape[0]
    if n < 2 * min_node or n < 2:
        raise ValueError(f"need at least {max(2, 2 * min_node)} rows with positive weight, got {n}")

    X = np.ascontiguousarray(X)
    order = np.ascontiguousarray(np.argsort(X, axis=0, kind="stable").T, dtype=np.intp)
    xsorted = np.ascontiguousarray(np.take_along_axis(X, order.T, axis=0).T)
    base = float(np.dot(weights, y) / weights.sum())
    n_nodes = (1 << (depth + 1)) - 1
    feature = np.full((n_trees, n_nodes), -1, dtype=np.intp)
    threshold = np.zeros((n_trees, n_nodes))
    value = np.zeros((n_trees, n_nodes))
    kern = backend or _kernels.backend
    kern.boost(X, order, xsorted, np.ascontiguousarray(y), np.ascontiguousarray(weights), base,
               int(n_trees), int(depth), float(shrinkage), int(min_node),
               feature, threshold, value)
    for a in (feature, threshold, value):
        a.setflags(write=False)
    return TreeEnsemble(feature, threshold, value, base, float(shrinkage),
                        int(depth), int(min_node), X.shape[1])
