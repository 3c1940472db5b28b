import numpy as np
import pytest

from itesel.core import Dataset
from itesel.matching import mahalanobis_match


def brute_force(X, w, ridge=1e-6):
    """O(n^2) scan with the inverse covariance applied directly."""
    n, d = X.shape
    S = np.cov(X, rowvar=False).reshape(d, d)
    S = S + ridge * np.trace(S) / d * np.eye(d)
    Si = np.linalg.inv(S)
    partner = np.empty(n, dtype=int)
    for i in range(n):
        best, best_d = -1, np.inf
        for j in range(n):
            if w[j] == w[i]:
                continue
            diff = X[i] - X[j]
            dist = diff @ Si @ diff
            if dist < best_d:
                best, best_d = j, dist
        partner[i] = best
    return partner


def test_two_rows():
    m = mahalanobis_match(Dataset(np.array([[0.0, 3.0], [1.0, -2.0]]), [1, 0], [0.0, 0.0]))
    assert m.partner.tolist() == [1, 0]


def test_one_dimensional():
    m = mahalanobis_match(Dataset(np.array([[0.0], [1.0], [10.0]]), [1, 0, 0], [0.0, 0.0, 0.0]))
    assert m.partner[0] == 1
    assert m.partner[1] == 0 and m.partner[2] == 0


def test_ties_to_lowest_index():
    X = np.array([[0.0], [1.0], [-1.0], [5.0]])
    m = mahalanobis_match(Dataset(X, [1, 0, 0, 1], np.zeros(4)))
    assert m.partner[0] == 1


@pytest.mark.parametrize("seed", range(20))
def test_brute_force_oracle(seed):
    rng = np.random.default_rng(seed)
    n, d = 200, 4
    A = rng.normal(size=(d, d))
    X = rng.normal(size=(n, d)) @ A
    w = rng.integers(0, 2, n)
    m = mahalanobis_match(Dataset(X, w, np.zeros(n)))
    assert np.array_equal(m.partner, brute_force(X, w))
    assert np.all(w[m.partner] != w)


def test_single_arm_rejected():
    with pytest.raises(ValueError):
        mahalanobis_match(Dataset(np.zeros((3, 1)), [1, 1, 1], np.zeros(3)))
