"""Pytest configuration and shared fixtures."""

import numpy as np
import pytest
from assertpy import assert_that

from quadrature.sampler import SamplerConfig

pytest_plugins = ["quadrature.testing"]


def pytest_addoption(parser):
    parser.addoption("--run-slow", action="store_true", default=False, help="Run slow acceptance tests")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--run-slow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --run-slow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def small_config():
    """Sampler settings small enough for unit tests."""
    return SamplerConfig(outer_draws=20, truncation=50, burn_in_sweeps=10, between_sweeps=1, seed=3)


def assert_probability_vector(probabilities):
    """Shared helper: nonnegative entries summing to one."""
    probabilities = np.asarray(probabilities)
    assert_that(bool(np.all(probabilities >= 0))).is_true()
    assert_that(float(probabilities.sum())).is_close_to(1.0, 1e-10)
