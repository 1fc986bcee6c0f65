"""Posterior over p(f) when p is known only through the sample locations.

Each outer draw follows four steps:
1. draw hyper-parameters theta (lengthscales, concentration) from their hyper-priors
2. run a fresh Gibbs chain for the latent mixture parameters under theta
3. stick-break a truncated realisation of p
4. draw p(f) from the Bayesian quadrature posterior for that realisation

Randomness for draw `index` comes from SeedSequence(seed, spawn_key=(*stream, index, attempt)),
so results do not depend on how draws are scheduled across workers.
"""

import logging
from collections.abc import Callable
from concurrent.futures import ThreadPoolExecutor
from typing import TypeVar

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from mixture.gibbs import run_gibbs
from mixture.models import DpConfig, LatentState, MixtureRealisation, NigParams
from mixture.stick_breaking import stick_breaking_draw

from .bq import bq_posterior
from .errors import InvalidInputError, NumericalFailureError
from .kernel_means import initial_error, kernel_mean_vector
from .models import FloatArray, GaussianKernel, NormalPosterior, SampleSet

logger = logging.getLogger(__name__)

# Fraction of outer draws allowed to fail before the whole run fails
MAX_FAILURE_FRACTION = 0.01
MAX_SEED = 2**64 - 1

T = TypeVar("T")


class HyperPriors(BaseModel):
    """Hyper-priors: Gamma lengthscales, exponential concentration, fixed amplitude and base."""

    model_config = ConfigDict(frozen=True)
    lengthscale_shape: float = Field(default=2.0, gt=0)
    lengthscale_rate: float = Field(default=1.0, gt=0)
    concentration_rate: float = Field(default=1.0, gt=0)
    amplitude: float = Field(default=1.0, gt=0)
    base: NigParams = NigParams()
    fixed_lengthscale: float | None = Field(default=None, gt=0)
    fixed_concentration: float | None = Field(default=None, gt=0)


class HyperParams(BaseModel):
    """One draw of theta: the kernel plus the DP concentration and base distribution."""

    model_config = ConfigDict(frozen=True)
    kernel: GaussianKernel
    concentration: float = Field(gt=0)
    base: NigParams = NigParams()

    def dp_config(self, truncation: int, sweeps: int) -> DpConfig:
        return DpConfig(concentration=self.concentration, base=self.base, truncation=truncation, gibbs_sweeps=sweeps)


class SamplerConfig(BaseModel):
    model_config = ConfigDict(frozen=True)
    outer_draws: int = Field(default=500, ge=1)
    truncation: int = Field(default=500, ge=1)
    burn_in_sweeps: int = Field(default=100, ge=1)
    between_sweeps: int = Field(default=1, ge=1)
    seed: int = Field(default=0, ge=0, le=MAX_SEED)
    workers: int = Field(default=1, ge=1)


class IntegralPosterior(BaseModel):
    """Draws from the posterior over p(f)."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    draws: FloatArray
    failures: int = Field(default=0, ge=0)

    @field_validator("draws")
    @classmethod
    def _check_draws(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 1 or value.size == 0:
            raise ValueError("posterior draws must be a non-empty vector")
        if not np.all(np.isfinite(value)):
            raise ValueError("posterior draws must be finite")
        return value

    @property
    def mean(self) -> float:
        return float(np.mean(self.draws))

    @property
    def sd(self) -> float:
        return float(np.std(self.draws, ddof=1)) if self.draws.size > 1 else 0.0


def substream(seed: int, *key: int) -> np.random.Generator:
    """Independent generator for a (seed, key...) pair."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=tuple(key)))


def sample_hyperparameters(priors: HyperPriors, rng: np.random.Generator, dim: int = 1) -> HyperParams:
    """Draw theta: independent Gamma lengthscales per dimension and an exponential concentration."""
    if dim < 1:
        raise InvalidInputError(f"dimension must be positive, got {dim}")
    if priors.fixed_lengthscale is not None:
        lengthscales = np.full(dim, priors.fixed_lengthscale)
    else:
        lengthscales = rng.gamma(priors.lengthscale_shape, 1.0 / priors.lengthscale_rate, size=dim)
    if priors.fixed_concentration is not None:
        concentration = priors.fixed_concentration
    else:
        concentration = float(rng.exponential(1.0 / priors.concentration_rate))
    # Gamma and exponential draws can underflow to exactly zero
    lengthscales = np.maximum(lengthscales, np.finfo(float).tiny)
    concentration = max(concentration, np.finfo(float).tiny)
    return HyperParams(
        kernel=GaussianKernel(amplitude=priors.amplitude, lengthscales=lengthscales),
        concentration=concentration,
        base=priors.base,
    )


def ideal_posterior(samples: SampleSet, kernel: GaussianKernel, realisation: MixtureRealisation) -> NormalPosterior:
    """BQ posterior when p is known exactly and equals the given mixture."""
    return bq_posterior(
        samples,
        kernel,
        kernel_mean_vector(samples.locations, realisation, kernel),
        initial_error(realisation, kernel),
    )


def draw_from_realisation(
    samples: SampleSet,
    kernel: GaussianKernel,
    realisation: MixtureRealisation,
    rng: np.random.Generator,
) -> float:
    """Draw p(f) from the BQ posterior for one fixed realisation of p."""
    return ideal_posterior(samples, kernel, realisation).sample(rng)


def _burned_in_chain(
    samples: SampleSet, priors: HyperPriors, config: SamplerConfig, rng: np.random.Generator
) -> tuple[HyperParams, LatentState]:
    hp = sample_hyperparameters(priors, rng, dim=samples.d)
    burn_in = hp.dp_config(config.truncation, config.burn_in_sweeps)
    return hp, run_gibbs(LatentState.initial(samples.locations), samples, burn_in, rng)


def _advance_and_break(
    samples: SampleSet,
    hp: HyperParams,
    gibbs_state: LatentState,
    config: SamplerConfig,
    rng: np.random.Generator,
) -> MixtureRealisation:
    dp_config = hp.dp_config(config.truncation, config.between_sweeps)
    state = run_gibbs(gibbs_state, samples, dp_config, rng)
    return stick_breaking_draw(state, dp_config, rng)


def draw_integral_once(
    samples: SampleSet,
    hp: HyperParams,
    gibbs_state: LatentState,
    config: SamplerConfig,
    rng: np.random.Generator,
) -> float:
    """Advance a burned-in chain, stick-break a realisation of p and draw p(f) for it.

    Raises:
        NumericalFailureError: Propagated from the quadrature step
    """
    realisation = _advance_and_break(samples, hp, gibbs_state, config, rng)
    return draw_from_realisation(samples, hp.kernel, realisation, rng)


def _single_outer_draw(samples: SampleSet, priors: HyperPriors, config: SamplerConfig, rng: np.random.Generator) -> float:
    hp, state = _burned_in_chain(samples, priors, config, rng)
    return draw_integral_once(samples, hp, state, config, rng)


def _outer_draw_with_retries(
    samples: SampleSet,
    priors: HyperPriors,
    config: SamplerConfig,
    key: tuple[int, ...],
    max_attempts: int,
) -> tuple[float | None, int]:
    failures = 0
    for attempt in range(max_attempts):
        try:
            value = _single_outer_draw(samples, priors, config, substream(config.seed, *key, attempt))
            return value, failures
        except NumericalFailureError as e:
            failures += 1
            logger.warning("Outer draw %s failed on attempt %d: %s", key, attempt, e)
    return None, failures


def _map_draws(run: Callable[[int], T], config: SamplerConfig) -> list[T]:
    """Apply `run` to every outer-draw index, in index order, on the configured worker pool."""
    indices = range(config.outer_draws)
    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            return list(pool.map(run, indices))
    return [run(index) for index in indices]


def sample_integral_posterior(
    samples: SampleSet,
    priors: HyperPriors,
    config: SamplerConfig,
    stream: tuple[int, ...] = (),
) -> IntegralPosterior:
    """Collect `outer_draws` independent draws of p(f), each with fresh theta and a fresh Gibbs chain.

    A draw that fails numerically is retried on its next attempt substream.

    Args:
        samples: Locations and integrand values
        priors: Hyper-priors for theta
        config: Sampler sizes, seed and worker count
        stream: Key prefix separating independent runs that share a seed

    Returns:
        IntegralPosterior with exactly `outer_draws` draws

    Raises:
        NumericalFailureError: If more than 1% of draws fail
    """
    max_failures = int(MAX_FAILURE_FRACTION * config.outer_draws)

    def run(index: int) -> tuple[float | None, int]:
        return _outer_draw_with_retries(samples, priors, config, (*stream, index), max_failures + 1)

    results = _map_draws(run, config)

    failures = sum(count for _, count in results)
    if failures > max_failures or any(value is None for value, _ in results):
        raise NumericalFailureError(
            f"{failures} of {config.outer_draws} outer draws failed numerically (limit {max_failures})"
        )
    logger.debug("Collected %d draws with %d retried failures", config.outer_draws, failures)
    return IntegralPosterior(draws=np.array([value for value, _ in results]), failures=failures)


def sample_kernel_means(
    samples: SampleSet,
    priors: HyperPriors,
    config: SamplerConfig,
    grid: np.ndarray,
    stream: tuple[int, ...] = (),
) -> np.ndarray:
    """Realisations of the kernel mean mu(x) = integral of k(x, x') p(dx') on a grid of points.

    Draw `index` uses the first-attempt substream of outer draw `index`, so its realisation of p and
    its theta are the ones behind the matching draw of sample_integral_posterior.

    Args:
        grid: m x d matrix of evaluation points (a vector is read as m points when d = 1)

    Returns:
        outer_draws x m matrix, one row per realisation
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim == 1 and samples.d == 1:
        grid = grid.reshape(-1, 1)
    if grid.ndim != 2 or grid.shape[0] == 0 or grid.shape[1] != samples.d:
        raise InvalidInputError(f"grid has shape {grid.shape}, expected m x {samples.d} with m >= 1")

    def run(index: int) -> np.ndarray:
        rng = substream(config.seed, *stream, index, 0)
        hp, state = _burned_in_chain(samples, priors, config, rng)
        realisation = _advance_and_break(samples, hp, state, config, rng)
        return kernel_mean_vector(grid, realisation, hp.kernel)

    return np.vstack(_map_draws(run, config))
