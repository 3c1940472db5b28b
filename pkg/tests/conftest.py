import numpy as np
import pytest

from itesel.core import Dataset, RandomStream


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def stream():
    return RandomStream(7, ("tests",))


def random_dataset(rng, n=60, d=3, p=0.5, noise=1.0):
    X = rng.normal(size=(n, d))
    w = (rng.random(n) < p).astype(int)
    w[0], w[1] = 0, 1
    y = X[:, 0] + w * (0.5 + X[:, 1]) + noise * rng.normal(size=n)
    return Dataset(X, w, y)


# criterion id -> (passed, detail); filled by test_acceptance
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {k}: {detail}")
