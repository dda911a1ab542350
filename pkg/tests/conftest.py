"""Shared fixtures and markers for permreg tests."""

from pathlib import Path

import numpy as np
import pytest

from permreg.model import generate_instance

REPO_ROOT = Path(__file__).resolve().parent.parent


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: marks Monte Carlo acceptance runs (deselect with '-m \"not slow\"')")


@pytest.fixture(scope="session")
def repo_root():
    return REPO_ROOT


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def make_instance():
    """Factory for seeded instances with ||x*|| set from a target gamma."""
    def _make(n, d, gamma=3.0, sigma=1.0, seed=0, pi_star="random"):
        norm = (sigma if sigma > 0 else 1.0) * np.sqrt(np.expm1(gamma * np.log(n)))
        direction = np.random.default_rng(seed + 10_000).standard_normal(d)
        x_star = norm * direction / np.linalg.norm(direction)
        return generate_instance(n, d, x_star, sigma, pi_star=pi_star, seed=seed)
    return _make
