"""Gibbs sampling of the latent component parameters of a Dirichlet-process mixture.

The conditional of phi_i given the other latent parameters mixes a fresh draw from
the NIG posterior Q_i (weight alpha times the base predictive density of x_i) with
copies of every other phi_j (weight N(x_i | phi_j)).
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.special import logsumexp

from quadrature.errors import InvalidInputError
from quadrature.models import FloatArray, SampleSet

from .models import DpConfig, LatentState
from .nig import LOG_2PI, log_base_marginal_weights, posterior_arrays, sample_nig_arrays

logger = logging.getLogger(__name__)


class BranchDistribution(BaseModel):
    """Normalized branch probabilities of one Gibbs conditional.

    `base` is the probability of a fresh draw from Q_i; `copies[j]` the probability of
    copying phi_j, with `copies[i] == 0`.
    """

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    index: int
    base: float
    copies: FloatArray

    @property
    def probabilities(self) -> np.ndarray:
        """Base probability followed by the copy probabilities."""
        return np.concatenate(([self.base], self.copies))

    def sample_branch(self, rng: np.random.Generator) -> int | None:
        """Pick a branch: None for a fresh base draw, otherwise the index j to copy."""
        choice = _pick(self.probabilities, rng)
        return None if choice == 0 else choice - 1


def _pick(weights: np.ndarray, rng: np.random.Generator) -> int:
    cumulative = np.cumsum(weights)
    choice = int(np.searchsorted(cumulative, rng.random() * cumulative[-1], side="right"))
    return min(choice, weights.size - 1)


class _GibbsContext:
    """Quantities that stay fixed across sweeps for one data set and configuration."""

    def __init__(self, samples: SampleSet, config: DpConfig):
        self.locations = samples.locations
        self.log_base = log_base_marginal_weights(samples.locations, config.base, config.concentration)
        self.posterior = posterior_arrays(samples.locations, config.base)

    def branch_log_weights(self, i: int, means: np.ndarray, log_variances: np.ndarray) -> np.ndarray:
        x = self.locations[i]
        # Distant components give -inf rather than NaN
        with np.errstate(over="ignore"):
            scaled = (x - means) * np.exp(-0.5 * log_variances)
            log_copy = -0.5 * np.sum(LOG_2PI + log_variances + scaled**2, axis=1)
        log_copy[i] = -np.inf
        return np.concatenate(([self.log_base[i]], log_copy))


def _check_state(state: LatentState, samples: SampleSet) -> None:
    if state.means.shape != samples.locations.shape:
        raise InvalidInputError(
            f"latent state has shape {state.means.shape} but the samples are {samples.locations.shape}"
        )


def gibbs_conditional(i: int, state: LatentState, samples: SampleSet, config: DpConfig) -> BranchDistribution:
    """Branch probabilities of [phi_i | phi_(-i), X, theta].

    Args:
        i: Index of the data point being updated
        state: Current latent parameters
        samples: The data the state was fit to
        config: DP concentration and base distribution

    Returns:
        BranchDistribution normalized to sum to one
    """
    _check_state(state, samples)
    if not 0 <= i < samples.n:
        raise InvalidInputError(f"index {i} out of range for {samples.n} samples")
    log_weights = _GibbsContext(samples, config).branch_log_weights(i, state.means, np.log(state.variances))
    probabilities = np.exp(log_weights - logsumexp(log_weights))
    return BranchDistribution(index=i, base=float(probabilities[0]), copies=probabilities[1:])


def _sweep_in_place(
    means: np.ndarray,
    variances: np.ndarray,
    context: _GibbsContext,
    rng: np.random.Generator,
) -> None:
    log_variances = np.log(variances)
    location, precision_scale, shape, rate = context.posterior
    for i in range(means.shape[0]):
        log_weights = context.branch_log_weights(i, means, log_variances)
        choice = _pick(np.exp(log_weights - np.max(log_weights)), rng)
        if choice == 0:
            means[i], variances[i] = sample_nig_arrays(location[i], precision_scale[i], shape[i], rate[i], rng)
        else:
            means[i] = means[choice - 1]
            variances[i] = variances[choice - 1]
        log_variances[i] = np.log(variances[i])


def run_gibbs(
    state: LatentState,
    samples: SampleSet,
    config: DpConfig,
    rng: np.random.Generator,
    sweeps: int | None = None,
) -> LatentState:
    """Run several sequential sweeps and return the final state.

    Args:
        sweeps: Number of sweeps; defaults to config.gibbs_sweeps
    """
    _check_state(state, samples)
    sweeps = config.gibbs_sweeps if sweeps is None else sweeps
    if sweeps < 0:
        raise InvalidInputError(f"sweeps must be nonnegative, got {sweeps}")
    context = _GibbsContext(samples, config)
    means = np.array(state.means)
    variances = np.array(state.variances)
    for _ in range(sweeps):
        _sweep_in_place(means, variances, context, rng)
    logger.debug("Ran %d Gibbs sweeps over %d points", sweeps, samples.n)
    return LatentState(means=means, variances=variances)


def gibbs_sweep(
    state: LatentState,
    samples: SampleSet,
    config: DpConfig,
    rng: np.random.Generator,
) -> LatentState:
    """Update phi_1..phi_n once each, in order, drawing from their Gibbs conditionals."""
    return run_gibbs(state, samples, config, rng, sweeps=1)
