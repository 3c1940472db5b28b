"""Base regressors: weighted elastic net and gradient-boosted trees."""

from .elastic_net import ElasticNetModel, fit_elastic_net, fit_path
from .gbt import TreeEnsemble, fit_gbt
from .selection import (
    ALPHA,
    LAMBDA_GRID,
    TREE_GRID,
    AlgoSpec,
    CrossValResult,
    FittedPredictor,
    LearnerSettings,
    cross_val_select,
    default_candidates,
    fit_candidates,
    fold_ids,
    predict,
)

__all__ = [
    "ALPHA", "LAMBDA_GRID", "TREE_GRID", "AlgoSpec", "CrossValResult",
    "ElasticNetModel", "FittedPredictor", "LearnerSettings", "TreeEnsemble",
    "cross_val_select", "default_candidates", "fit_candidates", "fit_elastic_net",
    "fit_gbt", "fit_path", "fold_ids", "predict",
]
