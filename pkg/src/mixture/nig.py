"""Normal inverse-gamma conjugacy for the per-dimension Gaussian component model.

A component parameter phi = (mean, variance) has prior
N(mean | mu0, variance / lambda0) * IG(variance | alpha0, beta0), and a single
observation x ~ N(mean, variance) updates it in closed form.
"""

import numpy as np
from scipy.special import gammaln

from quadrature.errors import InvalidInputError, NumericalFailureError

from .models import NigParams

LOG_2PI = float(np.log(2.0 * np.pi))


def posterior_arrays(
    x: np.ndarray, prior: NigParams
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Elementwise single-observation NIG update.

    Returns:
        (location, precision_scale, shape, rate) arrays broadcast to the shape of x
    """
    x = np.asarray(x, dtype=float)
    precision_scale = np.full_like(x, prior.precision_scale + 1.0)
    location = (prior.precision_scale * prior.location + x) / precision_scale
    shape = np.full_like(x, prior.shape + 0.5)
    # Equal to beta0 + (lambda0 mu0^2 + x^2 - lambda1 mu1^2) / 2, without the cancellation.
    with np.errstate(over="ignore"):
        rate = prior.rate + 0.5 * prior.precision_scale * (x - prior.location) ** 2 / precision_scale
    if not np.all(np.isfinite(rate)):
        raise InvalidInputError(f"location too far from the base location for a finite NIG update: x={x}")
    if np.any(rate <= 0):
        raise NumericalFailureError(f"NIG update produced a nonpositive rate from x={x}")
    return location, precision_scale, shape, rate


def nig_posterior_update(x: float, prior: NigParams) -> NigParams:
    """Condition a NIG prior on one scalar observation.

    Args:
        x: Observed value
        prior: Prior parameters

    Returns:
        Posterior NigParams with lambda1 = lambda0 + 1 and alpha1 = alpha0 + 1/2
    """
    location, precision_scale, shape, rate = posterior_arrays(np.float64(x), prior)
    return NigParams(
        location=float(location),
        precision_scale=float(precision_scale),
        shape=float(shape),
        rate=float(rate),
    )


def log_base_marginal_weights(locations: np.ndarray, base: NigParams, concentration: float) -> np.ndarray:
    """log(alpha * integral of N(x | phi) P_b(dphi)) for every row of an n x d matrix.

    Per dimension the integral is the Student-t predictive
    (2 pi)^{-1/2} (lambda0 / lambda1)^{1/2} (beta0^alpha0 / beta1^alpha1) Gamma(alpha1) / Gamma(alpha0).
    """
    if concentration <= 0:
        raise InvalidInputError(f"concentration must be positive, got {concentration}")
    locations = np.atleast_2d(np.asarray(locations, dtype=float))
    _, precision_scale, shape, rate = posterior_arrays(locations, base)
    per_dim = (
        -0.5 * LOG_2PI
        + 0.5 * (np.log(base.precision_scale) - np.log(precision_scale))
        + base.shape * np.log(base.rate)
        - shape * np.log(rate)
        + gammaln(shape)
        - gammaln(base.shape)
    )
    return np.log(concentration) + np.sum(per_dim, axis=1)


def base_marginal_weight(x_row: np.ndarray, base: NigParams, concentration: float) -> float:
    """Weight of the fresh-draw branch in the Gibbs conditional for one data point.

    Args:
        x_row: The d coordinates of the data point
        base: NIG base distribution shared by every dimension
        concentration: DP concentration alpha

    Returns:
        alpha times the NIG predictive density at x_row
    """
    row = np.asarray(x_row, dtype=float).reshape(1, -1)
    return float(np.exp(log_base_marginal_weights(row, base, concentration)[0]))


def sample_nig_arrays(
    location: np.ndarray,
    precision_scale: np.ndarray,
    shape: np.ndarray,
    rate: np.ndarray,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (mean, variance) elementwise: variance ~ IG(shape, rate), mean ~ N(location, variance / precision_scale)."""
    variance = 1.0 / rng.gamma(shape, 1.0 / np.asarray(rate, dtype=float))
    mean = rng.normal(location, np.sqrt(variance / precision_scale))
    return np.asarray(mean, dtype=float), np.asarray(variance, dtype=float)


def sample_nig(params: NigParams, rng: np.random.Generator) -> tuple[float, float]:
    """Draw one (mean, variance) pair from a NIG distribution."""
    mean, variance = sample_nig_arrays(
        np.float64(params.location),
        np.float64(params.precision_scale),
        np.float64(params.shape),
        np.float64(params.rate),
        rng,
    )
    return float(mean), float(variance)
