"""Experiment drivers behind the command-line tools.

This module handles:
- Single estimates with optional integrand standardization
- Coverage studies of DPMBQ credible intervals against the Monte Carlo t-interval
- Convergence of the Wasserstein distance in n, and its dependence on task complexity

Trial data come from SeedSequence(seed, spawn_key=(group, trial, DATA_KEY)); posterior draws for the
same trial use the prefix (group, trial), so every method sees the same data for a given trial.
"""

import logging
from collections.abc import Callable, Sequence
from typing import Any

import numpy as np
import pandas as pd

from quadrature.errors import InvalidInputError
from quadrature.models import GaussianKernel, SampleSet
from quadrature.sampler import (
    HyperPriors,
    IntegralPosterior,
    SamplerConfig,
    ideal_posterior,
    sample_integral_posterior,
    sample_kernel_means,
    substream,
)
from simulation.metrics import TrendFit, central_credible_interval, coverage_frequency, fit_loglog_slope, wasserstein_to_point
from simulation.models import TaskSpec
from simulation.testbed import (
    mc_t_interval,
    mixture_as_realisation,
    random_mixture,
    random_polynomial,
    sample_task,
    standard_task,
    task_truth,
)

logger = logging.getLogger(__name__)

DATA_KEY = 2**32 - 1
DPMBQ_METHOD = "dpmbq"
BASELINE_METHOD = "t-interval"
METHODS = (DPMBQ_METHOD, BASELINE_METHOD)

COVERAGE_COLUMNS = ["method", "n", "trials", "rate", "se"]
CONVERGENCE_COLUMNS = ["n", "rep", "wasserstein"]
COMPLEXITY_COLUMNS = ["parameter", "value", "rep", "wasserstein"]
KERNEL_MEAN_COLUMNS = ["draw", "x1", "kernel_mean"]

# (samples, truth, stream) -> Wasserstein distance of some posterior to the truth
DistanceFn = Callable[[SampleSet, float, tuple[int, ...]], float]


def level_key(level: float) -> str:
    return f"{level:g}"


def standardize(samples: SampleSet) -> tuple[SampleSet, float, float]:
    """Center and scale f(X) to sample mean 0 and sample sd 1.

    Returns:
        (standardized samples, center, scale); a constant or single-valued f keeps scale 1
    """
    center = float(np.mean(samples.values))
    scale = float(np.std(samples.values, ddof=1)) if samples.n > 1 else 0.0
    scale = scale if scale > 0 else 1.0
    scaled = SampleSet(locations=samples.locations, values=(samples.values - center) / scale)
    return scaled, center, scale


def estimate(
    samples: SampleSet,
    priors: HyperPriors,
    config: SamplerConfig,
    standardize_f: bool = False,
) -> IntegralPosterior:
    """Run the sampler, optionally on standardized values with draws mapped back affinely."""
    if not standardize_f:
        return sample_integral_posterior(samples, priors, config)
    scaled, center, scale = standardize(samples)
    posterior = sample_integral_posterior(scaled, priors, config)
    return IntegralPosterior(draws=center + scale * posterior.draws, failures=posterior.failures)


def reference_kernel(priors: HyperPriors, dim: int) -> GaussianKernel:
    """Kernel used for idealised comparisons: the fixed lengthscale, else the hyper-prior mean."""
    lengthscale = priors.fixed_lengthscale or priors.lengthscale_shape / priors.lengthscale_rate
    return GaussianKernel(amplitude=priors.amplitude, lengthscales=np.full(dim, lengthscale))


def estimate_report(
    posterior: IntegralPosterior,
    levels: Sequence[float],
    meta: dict[str, Any],
    task: TaskSpec | None = None,
    samples: SampleSet | None = None,
    priors: HyperPriors | None = None,
) -> dict[str, Any]:
    """Assemble the estimate report body; adds truth and idealised comparisons when a task is known."""
    report: dict[str, Any] = {
        "draws": posterior.draws.tolist(),
        "mean": posterior.mean,
        "sd": posterior.sd,
        "intervals": {level_key(level): list(central_credible_interval(posterior.draws, level)) for level in levels},
        "failures": posterior.failures,
    }
    if task is not None and samples is not None and priors is not None:
        truth = task_truth(task)
        ideal = ideal_posterior(
            samples,
            reference_kernel(priors, samples.d),
            mixture_as_realisation(task.distribution),
        )
        report["truth"] = truth
        report["wasserstein"] = wasserstein_to_point(posterior.draws, truth)
        report["ideal"] = {"mean": ideal.mean, "sd": ideal.sd}
    report["meta"] = meta
    return report


def kernel_mean_table(samples: SampleSet, priors: HyperPriors, config: SamplerConfig, grid: np.ndarray) -> pd.DataFrame:
    """Kernel-mean realisations on a one-dimensional grid, one row per (draw, grid point).

    Only the locations enter, so the table matches an estimate run with or without standardization.
    """
    if samples.d != 1:
        raise InvalidInputError(f"kernel-mean output needs one-dimensional samples, got d={samples.d}")
    grid = np.asarray(grid, dtype=float).ravel()
    means = sample_kernel_means(samples, priors, config, grid)
    return pd.DataFrame(
        {
            "draw": np.repeat(np.arange(config.outer_draws), grid.size),
            "x1": np.tile(grid, config.outer_draws),
            "kernel_mean": means.ravel(),
        },
        columns=KERNEL_MEAN_COLUMNS,
    )


def _trial_samples(task: TaskSpec, n: int, seed: int, group: int, trial: int) -> SampleSet:
    return sample_task(task, n, substream(seed, group, trial, DATA_KEY))


def _validate_levels(level: float) -> None:
    if not 0 < level < 1:
        raise InvalidInputError(f"level must be in (0, 1), got {level}")


def run_coverage(
    task: TaskSpec,
    ns: Sequence[int],
    trials: int,
    level: float,
    priors: HyperPriors,
    config: SamplerConfig,
    baseline_trials: int | None = None,
    methods: Sequence[str] = METHODS,
) -> pd.DataFrame:
    """
    Coverage of nominal `level` intervals for each method at each sample size.

    Args:
        task: Integration task with a known answer
        ns: Sample sizes
        trials: Repetitions for DPMBQ
        level: Nominal interval level
        priors: Hyper-priors for DPMBQ
        config: Sampler configuration; its seed drives all trial streams
        baseline_trials: Repetitions for the t-interval (defaults to `trials`)
        methods: Subset of ("dpmbq", "t-interval")

    Returns:
        DataFrame with columns method, n, trials, rate, se
    """
    _validate_levels(level)
    if trials < 1 or (baseline_trials is not None and baseline_trials < 1):
        raise InvalidInputError("trials must be positive")
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise InvalidInputError(f"Unknown method(s): {', '.join(sorted(unknown))}")
    truth = task_truth(task)
    baseline_trials = baseline_trials or trials

    rows = []
    for group, n in enumerate(ns):
        if n < 1:
            raise InvalidInputError(f"sample sizes must be positive, got {n}")
        if DPMBQ_METHOD in methods:
            covered = []
            for trial in range(trials):
                samples = _trial_samples(task, n, config.seed, group, trial)
                posterior = sample_integral_posterior(samples, priors, config, stream=(group, trial))
                lo, hi = central_credible_interval(posterior.draws, level)
                covered.append(lo <= truth <= hi)
            rate, se = coverage_frequency(np.array(covered))
            rows.append((DPMBQ_METHOD, n, trials, rate, se))
            logger.info("dpmbq coverage at n=%d: %.3f (se %.3f)", n, rate, se)
        if BASELINE_METHOD in methods:
            if n < 2:
                raise InvalidInputError("the t-interval needs n >= 2")
            covered = []
            for trial in range(baseline_trials):
                lo, hi = mc_t_interval(_trial_samples(task, n, config.seed, group, trial).values, level)
                covered.append(lo <= truth <= hi)
            rate, se = coverage_frequency(np.array(covered))
            rows.append((BASELINE_METHOD, n, baseline_trials, rate, se))
            logger.info("t-interval coverage at n=%d: %.3f (se %.3f)", n, rate, se)
    return pd.DataFrame(rows, columns=COVERAGE_COLUMNS)


def posterior_distance(priors: HyperPriors, config: SamplerConfig) -> DistanceFn:
    """Distance function that runs the full sampler for each trial."""

    def distance(samples: SampleSet, truth: float, stream: tuple[int, ...]) -> float:
        return wasserstein_to_point(sample_integral_posterior(samples, priors, config, stream=stream).draws, truth)

    return distance


def run_convergence(
    task: TaskSpec,
    n_grid: Sequence[int],
    reps: int,
    priors: HyperPriors,
    config: SamplerConfig,
    distance: DistanceFn | None = None,
) -> tuple[pd.DataFrame, TrendFit]:
    """
    Wasserstein distance of the posterior to the truth over a grid of sample sizes.

    Args:
        distance: Replacement for the sampler-based distance (samples, truth, stream) -> W

    Returns:
        (DataFrame with columns n, rep, wasserstein; log-log trend fitted to all runs)
    """
    if reps < 1:
        raise InvalidInputError(f"reps must be positive, got {reps}")
    if len(n_grid) < 2 or any(b <= a for a, b in zip(n_grid, n_grid[1:])) or n_grid[0] < 1:
        raise InvalidInputError(f"n grid must hold at least two strictly ascending positive sizes, got {list(n_grid)}")
    distance = distance or posterior_distance(priors, config)
    truth = task_truth(task)

    rows = []
    for group, n in enumerate(n_grid):
        for rep in range(reps):
            samples = _trial_samples(task, n, config.seed, group, rep)
            rows.append((n, rep, distance(samples, truth, (group, rep))))
        logger.info("Finished %d repetitions at n=%d", reps, n)
    frame = pd.DataFrame(rows, columns=CONVERGENCE_COLUMNS)
    return frame, fit_loglog_slope(frame["n"].to_numpy(), frame["wasserstein"].to_numpy())


def complexity_task(parameter: str, value: int, rng: np.random.Generator) -> TaskSpec:
    """Random task of a given complexity.

    parameter "m": a random m-component mixture with the standard integrand;
    parameter "q": N(0, 1) with a random degree-q polynomial.
    """
    if parameter == "m":
        return TaskSpec(name=f"m={value}", integrand=standard_task().integrand, distribution=random_mixture(value, rng))
    if parameter == "q":
        return TaskSpec(name=f"q={value}", integrand=random_polynomial(value, rng), distribution=standard_task().distribution)
    raise InvalidInputError(f"complexity parameter must be 'm' or 'q', got {parameter!r}")


def run_complexity(
    parameter: str,
    values: Sequence[int],
    reps: int,
    n: int,
    priors: HyperPriors,
    config: SamplerConfig,
    distance: DistanceFn | None = None,
) -> tuple[pd.DataFrame, TrendFit | None]:
    """
    Wasserstein distance as a function of mixture size m or polynomial degree q at fixed n.

    Each repetition draws a fresh random task and fresh data from one data substream.

    Returns:
        (DataFrame with columns parameter, value, rep, wasserstein; log-log trend in the
        parameter when every value and distance is positive, else None)
    """
    if reps < 1 or n < 1:
        raise InvalidInputError("reps and n must be positive")
    if not values:
        raise InvalidInputError("at least one complexity value is required")
    distance = distance or posterior_distance(priors, config)

    rows = []
    for group, value in enumerate(values):
        for rep in range(reps):
            rng = substream(config.seed, group, rep, DATA_KEY)
            task = complexity_task(parameter, value, rng)
            samples = sample_task(task, n, rng)
            rows.append((parameter, value, rep, distance(samples, task_truth(task), (group, rep))))
        logger.info("Finished %d repetitions at %s=%d", reps, parameter, value)
    frame = pd.DataFrame(rows, columns=COMPLEXITY_COLUMNS)

    trend = None
    if len(set(values)) > 1 and min(values) > 0 and (frame["wasserstein"] > 0).all():
        trend = fit_loglog_slope(frame["value"].to_numpy(), frame["wasserstein"].to_numpy())
    return frame, trend
