import numpy as np
import pytest

from itesel.core import RandomStream
from itesel.dgp import ScenarioSpec, get_scenario, load_catalog, oracle_mu, oracle_tau, propensity, sample, sample_covariates


def test_catalog_shape():
    cat = load_catalog()
    assert sorted(cat) == list(range(1, 17))
    for k in range(1, 9):
        assert cat[k].randomized and not cat[k + 8].randomized
        assert cat[k].mean_fn_id == cat[k + 8].mean_fn_id == k
        assert cat[k].noise_sd == cat[k + 8].noise_sd


def test_spec_validation():
    with pytest.raises(ValueError):
        ScenarioSpec(1, 9, "randomized", 1.0)
    with pytest.raises(ValueError):
        ScenarioSpec(1, 1, "observational", 1.0)
    with pytest.raises(ValueError):
        ScenarioSpec(1, 1, "randomized", 0.0)
    with pytest.raises(ValueError):
        get_scenario(17)


@pytest.mark.parametrize("sid", [1, 9])
def test_null_effect(sid):
    spec = get_scenario(sid)
    _, truth = sample(spec, 500, RandomStream(1))
    assert np.all(truth.tau == 0.0)
    X = sample_covariates(200, np.random.default_rng(0))
    assert np.all(oracle_tau(spec, X) == 0.0)
    assert np.array_equal(oracle_mu(spec, X, 0), oracle_mu(spec, X, 1))


def test_randomized_propensity():
    _, truth = sample(get_scenario(3), 300, RandomStream(2))
    assert np.all(truth.propensity == 0.5)


@pytest.mark.parametrize("sid", [2, 9, 13])
def test_treatment_rate_matches_propensity(sid):
    n = 100_000
    data, truth = sample(get_scenario(sid), n, RandomStream(3))
    assert abs(data.w.mean() - truth.propensity.mean()) <= 3 * np.sqrt(0.25 / n)


def test_biased_propensity_bounds():
    _, truth = sample(get_scenario(12), 5000, RandomStream(4))
    assert truth.propensity.min() >= 0.1 and truth.propensity.max() <= 0.9
    assert truth.propensity.std() > 0.05


@pytest.mark.parametrize("sid", range(1, 17))
def test_oracles_consistent(sid):
    spec = get_scenario(sid)
    data, truth = sample(spec, 400, RandomStream(5))
    assert np.array_equal(oracle_tau(spec, data.X), truth.tau)
    mu1, mu0 = oracle_mu(spec, data.X, 1), oracle_mu(spec, data.X, 0)
    assert np.array_equal(mu1 - mu0, oracle_tau(spec, data.X))
    assert np.array_equal(propensity(spec, data.X), truth.propensity)
    X2 = np.vstack([data.X[:1], data.X[:1]])
    t2 = oracle_tau(spec, X2)
    assert t2[0] == t2[1]


@pytest.mark.parametrize("sid", [4, 11])
def test_outcome_mean(sid):
    spec = get_scenario(sid)
    n = 50_000
    data, truth = sample(spec, n, RandomStream(6))
    mu_obs = np.where(data.w == 1, truth.mu1, truth.mu0)
    assert abs(data.y.mean() - mu_obs.mean()) <= 3 * spec.noise_sd / np.sqrt(n)


def test_deterministic():
    a, _ = sample(get_scenario(7), 50, RandomStream(8, ("s",)))
    b, _ = sample(get_scenario(7), 50, RandomStream(8, ("s",)))
    assert np.array_equal(a.X, b.X) and np.array_equal(a.y, b.y) and np.array_equal(a.w, b.w)


def test_covariate_layout():
    X = sample_covariates(20_000, np.random.default_rng(1))
    assert X.shape == (20_000, 12)
    assert set(np.unique(X[:, 8:])) <= {0.0, 1.0}
    assert abs(X[:, :8].std() - 1) < 0.02
