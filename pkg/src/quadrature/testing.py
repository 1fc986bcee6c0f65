"""Testing utilities for the quadrature packages, including seed annotations.

This module provides:
- @rng_seed decorator for pinning the random stream a test draws from
- seeded_rng fixture returning a generator seeded from that annotation
- standard_task and standard_samples fixtures for the f(x) = 1 + x - 0.1 x^3, N(0, 1) task

Example usage:
    @rng_seed(7)
    def test_draws_are_finite(seeded_rng):
        assert np.isfinite(seeded_rng.standard_normal())
"""

import functools
from collections.abc import Callable

import numpy as np
import pytest

from simulation.models import TaskSpec
from simulation.testbed import sample_task, standard_task as make_standard_task

from .models import SampleSet

DEFAULT_TEST_SEED = 0


def rng_seed(seed: int):
    """Decorator to specify which seed the seeded_rng fixture uses for a test.

    Args:
        seed: Nonnegative integer seed

    Returns:
        Decorated test function with seed metadata attached

    Raises:
        ValueError: If seed is negative
    """
    _validate_seed(seed)

    def decorator(func: Callable) -> Callable:
        @functools.wraps(func)
        def wrapper(*args, **kwargs):
            return func(*args, **kwargs)

        wrapper._rng_seed = seed
        return wrapper

    return decorator


def _validate_seed(seed: int) -> None:
    if seed < 0:
        raise ValueError("Test seed must be non-negative")


def _get_test_seed_annotation(test_function: Callable) -> int | None:
    return getattr(test_function, "_rng_seed", None)


@pytest.fixture
def seeded_rng(request) -> np.random.Generator:
    """Generator seeded from the test's @rng_seed annotation, or a fixed default seed."""
    seed = _get_test_seed_annotation(request.node.function)
    return np.random.default_rng(DEFAULT_TEST_SEED if seed is None else seed)


@pytest.fixture
def standard_task() -> TaskSpec:
    """f(x) = 1 + x - 0.1 x^3 against N(0, 1), whose integral is 1."""
    return make_standard_task()


@pytest.fixture
def standard_samples(standard_task, seeded_rng) -> SampleSet:
    """Twelve draws from the standard task."""
    return sample_task(standard_task, 12, seeded_rng)
