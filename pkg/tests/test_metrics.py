import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from itesel.core import Dataset, RandomStream, SelectionError, UndefinedScoreError, UnsupportedModelError
from itesel.dgp import get_scenario, oracle_tau, sample_covariates
from itesel.matching import MatchAssignment, mahalanobis_match
from itesel.metrics import (METRIC_IDS, TABLE_METRICS, ModelPredictions, best_index, gain_iptw, gain_simple,
                            mu_risk, mu_risk_iptw, policy, predictions_for, score, score_models, select,
                            tau_risk_iptw, tau_risk_match, tau_risk_r, value_dr, value_iptw)
from itesel.nuisance import NuisanceEstimates


def ds(X, w, y):
    return Dataset(np.asarray(X, float).reshape(len(w), -1), w, y)


def const(n, v):
    return np.full(n, float(v))


def test_policy():
    assert np.all(policy(np.zeros(4)) == 0)
    assert policy(np.array([-1.0, 2.0])).tolist() == [0, 1]
    X = sample_covariates(50, np.random.default_rng(0))
    assert np.all(policy(oracle_tau(get_scenario(1), X)) == 0)


def test_mu_risk_examples():
    val = ds([0, 0], [1, 0], [1.0, 3.0])
    perfect = ModelPredictions(np.zeros(2), mu0=np.array([0.0, 3.0]), mu1=np.array([1.0, 0.0]))
    assert mu_risk(perfect, val) == 0
    pred = ModelPredictions(np.zeros(2), mu0=np.zeros(2), mu1=np.zeros(2))
    assert mu_risk(pred, val) == 5.0
    with pytest.raises(UnsupportedModelError):
        mu_risk(ModelPredictions(np.zeros(2)), val)


def test_mu_risk_regrouping(rng):
    n = 50
    val = ds(rng.normal(size=n), rng.integers(0, 2, n), rng.normal(size=n))
    pred = ModelPredictions(np.zeros(n), rng.normal(size=n), rng.normal(size=n))
    parts = []
    for arm, mu in ((0, pred.mu0), (1, pred.mu1)):
        idx = val.w == arm
        parts.append(idx.sum() * np.mean((mu[idx] - val.y[idx]) ** 2))
    assert mu_risk(pred, val) == pytest.approx(sum(parts) / n, rel=1e-12)


def test_mu_risk_iptw_examples(rng):
    n = 30
    val = ds(rng.normal(size=n), rng.integers(0, 2, n), rng.normal(size=n))
    pred = ModelPredictions(np.zeros(n), rng.normal(size=n), rng.normal(size=n))
    half = NuisanceEstimates(p_check=const(n, 0.5))
    assert mu_risk_iptw(pred, val, half) == pytest.approx(2 * mu_risk(pred, val), rel=1e-15)
    perfect = ModelPredictions(np.zeros(n), val.y.copy(), val.y.copy())
    assert mu_risk_iptw(perfect, val, NuisanceEstimates(p_check=rng.uniform(0.1, 0.9, n))) == 0
    one = ds([0], [1], [2.0])
    assert mu_risk_iptw(ModelPredictions(np.zeros(1), np.zeros(1), np.zeros(1)), one,
                        NuisanceEstimates(p_check=const(1, 0.25))) == 16.0


def test_value_iptw_examples():
    val = ds([0, 0], [1, 0], [4.0, 2.0])
    half = NuisanceEstimates(p_check=const(2, 0.5))
    assert value_iptw(ModelPredictions(np.array([1.0, -1.0])), val, half) == 6.0
    assert value_iptw(ModelPredictions(np.array([-1.0, 1.0])), val, half) == 0.0


def test_value_dr_examples(rng):
    n = 20
    X = rng.normal(size=n)
    mu0, mu1 = rng.normal(size=n), rng.normal(size=n)
    w = rng.integers(0, 2, n)
    val = ds(X, w, np.where(w == 1, mu1, mu0))
    nuis = NuisanceEstimates(p_check=rng.uniform(0.2, 0.8, n), mu0_check=mu0, mu1_check=mu1)
    assert value_dr(ModelPredictions(-np.ones(n)), val, nuis) == 0.0
    tau_hat = rng.normal(size=n)
    d = tau_hat > 0
    assert value_dr(ModelPredictions(tau_hat), val, nuis) == pytest.approx(np.mean(d * (mu1 - mu0)), rel=1e-12)


def test_gain_examples():
    val = ds([0, 0], [1, 0], [3.0, 1.0])
    half = NuisanceEstimates(p_check=const(2, 0.5))
    none = ModelPredictions(np.zeros(2))
    assert gain_simple(none, val) == 0 and gain_iptw(none, val, half) == 0
    everyone = ModelPredictions(np.ones(2))
    assert gain_iptw(everyone, val, half) == 2.0
    assert gain_simple(everyone, val) == 2.0
    only_treated = ds([0, 0], [1, 1], [3.0, 1.0])
    with pytest.raises(UndefinedScoreError):
        gain_simple(everyone, only_treated)


def test_tau_risk_match_examples():
    val = ds([0, 1], [1, 0], [5.0, 3.0])
    match = MatchAssignment(np.array([1, 0]), np.ones(2))
    assert tau_risk_match(ModelPredictions(const(2, 2)), val, match) == 0
    assert tau_risk_match(ModelPredictions(const(2, 0)), val, match) == 4.0


def test_tau_risk_iptw_examples():
    val = ds([0, 0], [1, 0], [1.0, 1.0])
    half = NuisanceEstimates(p_check=const(2, 0.5))
    assert tau_risk_iptw(ModelPredictions(np.zeros(2)), val, half) == 4.0
    assert tau_risk_iptw(ModelPredictions(np.array([2.0, -2.0])), val, half) == 0.0


def test_tau_risk_r_examples(rng):
    one = ds([0], [1], [2.0])
    nuis = NuisanceEstimates(p_check=const(1, 0.5), m_check=const(1, 1.0))
    assert tau_risk_r(ModelPredictions(const(1, 4)), one, nuis) == 1.0
    n = 25
    w = rng.integers(0, 2, n)
    p, m, t = rng.uniform(0.2, 0.8, n), rng.normal(size=n), rng.normal(size=n)
    y = m + (w - p) * t
    val = ds(rng.normal(size=n), w, y)
    nuis = NuisanceEstimates(p_check=p, m_check=m)
    assert tau_risk_r(ModelPredictions(t), val, nuis) == pytest.approx(0, abs=1e-28)
    assert tau_risk_r(ModelPredictions(np.zeros(n)), val, nuis) == pytest.approx(np.mean((y - m) ** 2))


# naive double-loop oracles, one row at a time

def naive_scores(pred, val, nuis, match):
    n = val.n
    p = nuis.p_check
    out = {k: 0.0 for k in ("mu_risk", "mu_risk_iptw", "value_iptw", "value_dr", "gain_iptw",
                            "tau_risk_match", "tau_risk_iptw", "tau_risk_r")}
    num_t = num_c = cnt_t = cnt_c = n_d = 0.0
    for i in range(n):
        wi, yi = val.w[i], val.y[i]
        pw = p[i] if wi == 1 else 1 - p[i]
        mu_hat = pred.mu1[i] if wi == 1 else pred.mu0[i]
        di = 1 if pred.tau[i] > 0 else 0
        out["mu_risk"] += (mu_hat - yi) ** 2 / n
        out["mu_risk_iptw"] += (mu_hat - yi) ** 2 / pw / n
        out["value_iptw"] += (yi / pw if wi == di else 0.0) / n
        mu_chk = nuis.mu1_check[i] if wi == 1 else nuis.mu0_check[i]
        sign = 1 if wi == 1 else -1
        out["value_dr"] += di * (nuis.mu1_check[i] - nuis.mu0_check[i] + sign * (yi - mu_chk) / pw) / n
        out["gain_iptw"] += di * (yi / p[i] if wi == 1 else -yi / (1 - p[i])) / n
        j = match.partner[i]
        out["tau_risk_match"] += (pred.tau[i] - sign * (yi - val.y[j])) ** 2 / n
        out["tau_risk_iptw"] += (pred.tau[i] - sign * yi / pw) ** 2 / n
        out["tau_risk_r"] += ((yi - nuis.m_check[i]) - (wi - p[i]) * pred.tau[i]) ** 2 / n
        if di:
            n_d += 1
            if wi:
                num_t, cnt_t = num_t + yi, cnt_t + 1
            else:
                num_c, cnt_c = num_c + yi, cnt_c + 1
    out["gain_simple"] = (num_t / cnt_t - num_c / cnt_c) * n_d / n
    return out


@pytest.mark.parametrize("seed", range(10))
def test_vectorized_matches_naive(seed):
    rng = np.random.default_rng(seed)
    n = 120
    X = rng.normal(size=(n, 3))
    w = rng.integers(0, 2, n)
    val = Dataset(X, w, rng.normal(size=n) + X[:, 0])
    nuis = NuisanceEstimates(p_check=rng.uniform(0.1, 0.9, n), m_check=rng.normal(size=n),
                             mu0_check=rng.normal(size=n), mu1_check=rng.normal(size=n))
    match = mahalanobis_match(val)
    tau = rng.normal(size=n)
    mu0 = rng.normal(size=n)
    pred = ModelPredictions(tau, mu0, mu0 + tau)
    ref = naive_scores(pred, val, nuis, match)
    for metric, expected in ref.items():
        got = score(metric, pred, val, nuis, match)
        assert got == pytest.approx(expected, rel=1e-12, abs=1e-300), metric


finite = st.floats(-100, 100, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(finite, finite, finite, st.floats(0.05, 0.95), st.integers(0, 1)),
                min_size=2, max_size=30))
def test_properties(rows):
    arr = np.array(rows)
    tau, y, m, p, w = arr.T
    w = w.astype(int)
    val = Dataset(np.zeros((len(y), 1)), w, y)
    nuis = NuisanceEstimates(p_check=p, m_check=m, mu0_check=m, mu1_check=m)
    pred = ModelPredictions(tau, m, m + tau)
    for metric in ("mu_risk", "mu_risk_iptw", "tau_risk_iptw", "tau_risk_r"):
        assert score(metric, pred, val, nuis) >= 0
    # the value/gain gap does not depend on the policy
    other = ModelPredictions(-tau, m, m - tau)
    gap = value_iptw(pred, val, nuis) - gain_iptw(pred, val, nuis)
    gap2 = value_iptw(other, val, nuis) - gain_iptw(other, val, nuis)
    assert gap == pytest.approx(gap2, rel=1e-9, abs=1e-9)
    # scaling y scales the risks quadratically
    s = Dataset(val.X, w, 2 * y)
    nuis2 = NuisanceEstimates(p_check=p, m_check=2 * m)
    assert tau_risk_r(ModelPredictions(2 * tau), s, nuis2) == pytest.approx(
        4 * tau_risk_r(pred, val, nuis), rel=1e-9, abs=1e-9)


def test_select_examples(rng):
    val = ds([0, 0], [1, 0], [1.0, 2.0])
    pred = ModelPredictions(np.zeros(2), np.zeros(2), np.zeros(2))
    nuis = NuisanceEstimates(p_check=const(2, 0.5), m_check=np.zeros(2), mu0_check=np.zeros(2),
                             mu1_check=np.zeros(2))
    match = MatchAssignment(np.array([1, 0]), np.ones(2))
    for metric in METRIC_IDS:
        assert select([pred], metric, val, nuis, match, RandomStream(1)) == 0
    assert best_index([5.0, 3.0], "mu_risk") == 1
    assert best_index([5.0, 3.0], "value_iptw") == 0
    assert best_index([3.0, 3.0], "mu_risk") == 0
    with pytest.raises(SelectionError):
        best_index([None, None], "mu_risk")
    assert best_index([None, 2.0], "mu_risk") == 1


def test_unscorable_models_skipped():
    val = ds([0, 0], [1, 0], [1.0, 2.0])
    preds = [ModelPredictions(np.zeros(2)), ModelPredictions(np.zeros(2), np.zeros(2), np.ones(2))]
    assert score_models("mu_risk", preds, val) == [None, 2.0]


def test_random_metric_uniform():
    m, draws = 90, 10_000
    preds = [ModelPredictions(np.zeros(1))] * m
    val = ds([0], [1], [0.0])
    counts = np.zeros(m)
    for k in range(draws):
        counts[select(preds, "random", val, stream=RandomStream(5, ("draw", k)))] += 1
    p = 1 / m
    assert np.all(np.abs(counts / draws - p) <= 3 * np.sqrt(p * (1 - p) / draws))
    again = select(preds, "random", val, stream=RandomStream(5, ("draw", 0)))
    assert again == select(preds, "random", val, stream=RandomStream(5, ("draw", 0)))


def test_reconstructed_outcomes(rng):
    class Tau:
        def predict_outcomes(self, X):
            return None

        def predict_tau(self, X):
            return np.ones(len(X))

    nuis = NuisanceEstimates(p_check=const(3, 0.25), m_check=const(3, 2.0))
    pred = predictions_for(Tau(), np.zeros((3, 1)), nuis)
    assert pred.reconstructed
    assert np.allclose(pred.mu1, 2.75) and np.allclose(pred.mu0, 1.75)
    assert np.allclose(pred.mu1 - pred.mu0, pred.tau)


def test_table_metrics_subset():
    assert set(TABLE_METRICS) <= set(METRIC_IDS) and len(TABLE_METRICS) == 8
