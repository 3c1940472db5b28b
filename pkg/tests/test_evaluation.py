import numpy as np
import pytest

from itesel.core import RandomStream
from itesel.dgp import GroundTruth, get_scenario, sample
from itesel.evaluation import evaluate, test_tau_risk, test_value
from itesel.metrics import policy


def truth_of(mu0, mu1):
    mu0, mu1 = np.asarray(mu0, float), np.asarray(mu1, float)
    return GroundTruth(mu0, mu1, mu1 - mu0, np.full(mu0.shape, 0.5))


def test_tau_risk_examples():
    _, truth = sample(get_scenario(5), 300, RandomStream(1))
    assert test_tau_risk(truth.tau, truth) == 0.0
    assert test_tau_risk(truth.tau + 1.0, truth) == pytest.approx(1.0, rel=1e-14)
    _, null = sample(get_scenario(1), 300, RandomStream(1))
    assert test_tau_risk(np.zeros(300), null) == 0.0


def test_value_examples():
    assert test_value(np.array([1.0, -1.0]), truth_of([0, 0], [1, -1])) == 0.5


def test_null_scenario_value_is_policy_free(rng):
    _, truth = sample(get_scenario(9), 200, RandomStream(2))
    values = {test_value(rng.normal(size=200), truth) for _ in range(10)}
    assert len(values) == 1


def test_oracle_policy_maximizes_value(rng):
    _, truth = sample(get_scenario(8), 200, RandomStream(3))
    best = test_value(truth.tau, truth)
    for _ in range(50):
        assert test_value(rng.normal(size=200), truth) <= best
    assert best == np.mean(np.maximum(truth.mu0, truth.mu1))
    assert np.all(policy(truth.tau) == (truth.tau > 0))


def test_misaligned():
    with pytest.raises(ValueError):
        test_value(np.zeros(3), truth_of([0, 0], [1, 1]))


def test_evaluate():
    class Model:
        def predict_tau(self, X):
            return np.array([1.0, 1.0])

    res = evaluate(Model(), np.zeros((2, 1)), truth_of([0, 0], [1, 3]), model_id=4, metric="mu_risk")
    assert res.tau_risk_test == 2.0 and res.value_test == 2.0 and res.model_id == 4
