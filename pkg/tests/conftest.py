import numpy as np
import pytest
from hypothesis import settings
from scipy.stats import norm

from mqcaviar import CaviarParams, SimConfig, simulate

settings.register_profile("default", deadline=None, max_examples=50)
settings.load_profile("default")


def stable_params(k=0.05):
    """Bivariate parameters whose quantiles stay negative for every draw."""
    return CaviarParams(
        k,
        [-0.2, -0.2],
        [[-0.2, -0.05], [-0.05, -0.2]],
        [[0.7, 0.05], [0.05, 0.7]],
    )


def random_stable(rng, n=2, k=0.05, rho=0.9):
    """Random parameters with c < 0, A <= 0 and B >= 0.

    ``B + |A| E|y|/|q|`` is scaled to spectral radius at most ``rho``, so
    simulated paths are mean-reverting and ``rho(B) <= rho``.
    """
    c = -rng.uniform(0.05, 0.5, n)
    A = -rng.uniform(0.0, 0.3, (n, n))
    B = rng.uniform(0.0, 1.0, (n, n))
    ratio = np.sqrt(2 / np.pi) / abs(norm.ppf(k))
    M = B - ratio * A
    s = rng.uniform(0.2, rho) / np.max(np.abs(np.linalg.eigvals(M)))
    return CaviarParams(k, c, s * A, s * B)


@pytest.fixture(scope="session")
def sim_3000():
    params = stable_params()
    panel, path = simulate(SimConfig(params, 3000, seed=7))
    return params, panel, path


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
