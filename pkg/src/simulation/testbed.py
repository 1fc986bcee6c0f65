"""Analytic test bed: Gaussian-mixture distributions, polynomial integrands and exact integrals.

This module handles:
- Raw Gaussian moments and closed-form integrals p(f)
- Sampling from mixtures and evaluating polynomials
- Named tasks and random task generators
- The Student-t Monte Carlo confidence interval used as a baseline
"""

import numpy as np
from numpy.polynomial import polynomial
from scipy import stats

from mixture.models import MixtureRealisation
from quadrature.errors import InvalidInputError
from quadrature.models import SampleSet

from .models import GaussianMixtureSpec, PolynomialSpec, TaskSpec

MAX_MOMENT_ORDER = 64

# Dirichlet concentration for random mixture weights
RANDOM_WEIGHT_CONCENTRATION = 2.0


def gaussian_raw_moment(order: int, mean: float, sd: float) -> float:
    """E[x^order] for x ~ N(mean, sd^2), via M_b = mean M_{b-1} + (b - 1) sd^2 M_{b-2}.

    Raises:
        InvalidInputError: If order is negative or above 64
    """
    if order < 0 or order > MAX_MOMENT_ORDER:
        raise InvalidInputError(f"moment order must be in [0, {MAX_MOMENT_ORDER}], got {order}")
    if sd < 0:
        raise InvalidInputError(f"sd must be nonnegative, got {sd}")
    previous, current = 1.0, float(mean)
    if order == 0:
        return previous
    variance = sd * sd
    for b in range(2, order + 1):
        previous, current = current, mean * current + (b - 1) * variance * previous
    return current


def true_integral(poly: PolynomialSpec, mix: GaussianMixtureSpec) -> float:
    """Exact integral of the polynomial against the mixture."""
    return float(
        sum(
            weight * sum(a * gaussian_raw_moment(b, mean, sd) for a, b in zip(poly.coefficients, poly.exponents))
            for weight, mean, sd in zip(mix.weights, mix.means, mix.sds)
        )
    )


def eval_polynomial(poly: PolynomialSpec, xs: np.ndarray) -> np.ndarray:
    """Evaluate the polynomial pointwise with Horner's scheme."""
    dense = np.zeros(poly.degree + 1)
    for a, b in zip(poly.coefficients, poly.exponents):
        dense[b] += a
    return polynomial.polyval(np.asarray(xs, dtype=float), dense)


def sample_mixture(mix: GaussianMixtureSpec, n: int, rng: np.random.Generator) -> np.ndarray:
    """Draw n points: a component index from the weights, then a normal draw from that component."""
    if n < 1:
        raise InvalidInputError(f"n must be positive, got {n}")
    components = rng.choice(mix.size, size=n, p=np.asarray(mix.weights))
    return rng.normal(np.asarray(mix.means)[components], np.asarray(mix.sds)[components])


def sample_task(task: TaskSpec, n: int, rng: np.random.Generator) -> SampleSet:
    """Draw n locations from the task distribution and evaluate the integrand there."""
    xs = sample_mixture(task.distribution, n, rng)
    return SampleSet(locations=xs.reshape(-1, 1), values=eval_polynomial(task.integrand, xs))


def task_truth(task: TaskSpec) -> float:
    return true_integral(task.integrand, task.distribution)


def mixture_as_realisation(mix: GaussianMixtureSpec) -> MixtureRealisation:
    """Express a known one-dimensional mixture in the form the kernel-mean formulas consume."""
    return MixtureRealisation(
        weights=np.asarray(mix.weights),
        means=np.asarray(mix.means).reshape(-1, 1),
        variances=np.asarray(mix.sds).reshape(-1, 1) ** 2,
    )


def standard_task() -> TaskSpec:
    """f(x) = 1 + x - 0.1 x^3 against N(0, 1); the integral is exactly 1."""
    return TaskSpec(
        name="standard",
        integrand=PolynomialSpec(coefficients=[1.0, 1.0, -0.1], exponents=[0, 1, 3]),
        distribution=GaussianMixtureSpec(weights=[1.0], means=[0.0], sds=[1.0]),
    )


def rare_event_task() -> TaskSpec:
    """Canonical hard task: 3% of the mass sits in a narrow bump at x = 2.

    The bump shifts the integral by only a few percent of the spread of f, so the Monte Carlo
    interval still covers about as often as its nominal level.
    """
    return TaskSpec(
        name="rare-event",
        integrand=PolynomialSpec(coefficients=[1.0, 1.0, -0.1], exponents=[0, 1, 3]),
        distribution=GaussianMixtureSpec(weights=[0.97, 0.03], means=[0.0, 2.0], sds=[0.5, 0.05]),
    )


def narrow_bump_task() -> TaskSpec:
    """10% of the mass in a bump at x = 2 next to a tight main component; the integral is 1.11985.

    Five samples miss the bump more than half of the time, and a bump-free sample has a small spread
    that excludes the truth, so the Monte Carlo interval is over-confident at small n.
    """
    return TaskSpec(
        name="narrow-bump",
        integrand=PolynomialSpec(coefficients=[1.0, 1.0, -0.1], exponents=[0, 1, 3]),
        distribution=GaussianMixtureSpec(weights=[0.9, 0.1], means=[0.0, 2.0], sds=[0.1, 0.05]),
    )



def random_mixture(m: int, rng: np.random.Generator) -> GaussianMixtureSpec:
    """Mixture with Dirichlet(2, ..., 2) weights, N(0, 1) means and Exp(1) sds."""
    if m < 1:
        raise InvalidInputError(f"mixture size must be positive, got {m}")
    weights = rng.dirichlet(np.full(m, RANDOM_WEIGHT_CONCENTRATION))
    weights = weights / weights.sum()
    return GaussianMixtureSpec(
        weights=weights.tolist(),
        means=rng.standard_normal(m).tolist(),
        sds=rng.exponential(1.0, size=m).tolist(),
    )


def random_polynomial(q: int, rng: np.random.Generator) -> PolynomialSpec:
    """Degree-q polynomial with independent N(0, 1) coefficients."""
    if q < 0:
        raise InvalidInputError(f"degree must be nonnegative, got {q}")
    return PolynomialSpec(coefficients=rng.standard_normal(q + 1).tolist(), exponents=list(range(q + 1)))


def mc_t_interval(values: np.ndarray, level: float) -> tuple[float, float]:
    """Student-t confidence interval mean +/- t_{(1+level)/2, n-1} s / sqrt(n).

    Args:
        values: Integrand values f(x_i)
        level: Nominal coverage in (0, 1)

    Returns:
        (lo, hi), symmetric about the sample mean

    Raises:
        InvalidInputError: If fewer than two values are given or level is outside (0, 1)
    """
    values = np.asarray(values, dtype=float).reshape(-1)
    if values.size < 2:
        raise InvalidInputError(f"the t-interval needs at least 2 values, got {values.size}")
    if not 0 < level < 1:
        raise InvalidInputError(f"level must be in (0, 1), got {level}")
    center = float(np.mean(values))
    half_width = float(stats.t.ppf(0.5 * (1 + level), values.size - 1) * np.std(values, ddof=1) / np.sqrt(values.size))
    return center - half_width, center + half_width
