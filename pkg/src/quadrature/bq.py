"""Gaussian-process Bayesian quadrature for a fixed kernel mean.

This module handles:
- Gram and cross-covariance matrices of the Gaussian kernel
- Cholesky factorization with escalating diagonal jitter
- The normal posterior over p(f) given mu(X) and the initial error p x p(k)

The GP prior mean is identically zero.
"""

import logging

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.linalg import LinAlgError, cho_solve, cholesky, solve_triangular

from .errors import InvalidInputError, NumericalFailureError
from .models import GaussianKernel, NormalPosterior, SampleSet

logger = logging.getLogger(__name__)

# Jitter policy, relative to the kernel amplitude
INITIAL_JITTER = 1e-10
MAX_JITTER = 1e-4
JITTER_GROWTH = 10.0

# Relative tolerance for clamping a slightly negative posterior variance
VARIANCE_CLAMP_TOLERANCE = 1e-8


def _as_locations(locations: np.ndarray, kernel: GaussianKernel) -> np.ndarray:
    array = np.asarray(locations, dtype=float)
    if array.ndim == 1:
        array = array.reshape(-1, 1) if kernel.dim == 1 else array.reshape(1, -1)
    if array.ndim != 2 or array.shape[1] != kernel.dim:
        raise InvalidInputError(
            f"locations have shape {array.shape} but the kernel has {kernel.dim} lengthscale(s)"
        )
    if array.shape[0] < 1:
        raise InvalidInputError("at least one location is required")
    return array


def cross_matrix(kernel: GaussianKernel, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """Evaluate k(left_i, right_j) for every pair of rows.

    Args:
        kernel: Gaussian kernel
        left: m x d matrix of locations
        right: n x d matrix of locations

    Returns:
        m x n matrix of kernel values
    """
    left = _as_locations(left, kernel)
    right = _as_locations(right, kernel)
    scaled = (left[:, None, :] - right[None, :, :]) / kernel.lengthscales
    return kernel.amplitude * np.exp(-0.5 * np.sum(scaled**2, axis=-1))


def gram_matrix(kernel: GaussianKernel, locations: np.ndarray) -> np.ndarray:
    """Build the n x n Gram matrix k(X, X).

    Mirrored entries come from negated differences, so the result is exactly symmetric
    and its diagonal is exactly the amplitude.

    Raises:
        InvalidInputError: If the location dimension does not match the kernel
    """
    return cross_matrix(kernel, locations, locations)


class JitteredCholesky(BaseModel):
    """Lower Cholesky factor of gram + jitter * I."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    factor: np.ndarray
    jitter: float

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        return cho_solve((self.factor, True), rhs, check_finite=False)

    def whiten(self, rhs: np.ndarray) -> np.ndarray:
        """Return L^{-1} rhs, so that whiten(a) . whiten(b) = a^T (gram + jitter I)^{-1} b."""
        return solve_triangular(self.factor, rhs, lower=True, check_finite=False)


def jittered_cholesky(gram: np.ndarray, scale: float | None = None) -> JitteredCholesky:
    """Factorize gram + jitter * I, escalating jitter until the factorization succeeds.

    Jitter starts at 1e-10 * scale and grows tenfold per failure up to 1e-4 * scale.

    Args:
        gram: Symmetric n x n matrix
        scale: Reference magnitude; defaults to the mean of the diagonal (the kernel amplitude)

    Returns:
        JitteredCholesky holding the factor and the jitter actually used

    Raises:
        NumericalFailureError: If the factorization fails at the maximum jitter
    """
    gram = np.asarray(gram, dtype=float)
    if gram.ndim != 2 or gram.shape[0] != gram.shape[1] or gram.shape[0] == 0:
        raise InvalidInputError(f"gram must be a non-empty square matrix, got shape {gram.shape}")
    if scale is None:
        scale = float(np.mean(np.diag(gram)))
    scale = scale if scale > 0 else 1.0

    identity = np.eye(gram.shape[0])
    jitter = INITIAL_JITTER * scale
    max_jitter = MAX_JITTER * scale
    while True:
        try:
            factor = cholesky(gram + jitter * identity, lower=True, check_finite=False)
            return JitteredCholesky(factor=factor, jitter=jitter)
        except LinAlgError:
            if jitter >= max_jitter * (1 - 1e-9):
                raise NumericalFailureError(
                    f"Cholesky factorization failed at maximum jitter {jitter:.3e}", jitter=jitter
                )
            jitter *= JITTER_GROWTH
            logger.debug("Cholesky failed, escalating jitter to %.3e", jitter)


def regularized_solve(gram: np.ndarray, rhs: np.ndarray, scale: float | None = None) -> np.ndarray:
    """Solve (gram + jitter * I) s = rhs through a jittered Cholesky factorization.

    Raises:
        NumericalFailureError: If no jitter up to the maximum yields a factorization
    """
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != np.shape(gram)[0]:
        raise InvalidInputError(f"rhs has length {rhs.shape[0]} but gram is {np.shape(gram)[0]} x {np.shape(gram)[0]}")
    return jittered_cholesky(gram, scale).solve(rhs)


def bq_posterior(
    samples: SampleSet,
    kernel: GaussianKernel,
    kernel_mean_at_x: np.ndarray,
    initial_error: float,
) -> NormalPosterior:
    """Closed-form posterior over p(f) for a known kernel mean.

    mean = f(X)^T K^{-1} mu(X) and variance = p x p(k) - mu(X)^T K^{-1} mu(X), with K jittered.
    Both are computed from the whitened vectors L^{-1} f(X) and L^{-1} mu(X), which keeps the
    quadratic form a sum of squares.

    Args:
        samples: Locations and integrand values
        kernel: Gaussian kernel defining K
        kernel_mean_at_x: mu evaluated at every sample location
        initial_error: p x p(k), the prior variance of the integral

    Returns:
        NormalPosterior over the integral

    Raises:
        InvalidInputError: If mu(X) has the wrong length or the initial error is negative
        NumericalFailureError: If factorization fails or the variance is clearly negative
    """
    kernel_mean_at_x = np.asarray(kernel_mean_at_x, dtype=float)
    if kernel_mean_at_x.shape != (samples.n,):
        raise InvalidInputError(f"kernel mean has shape {kernel_mean_at_x.shape}, expected ({samples.n},)")
    if initial_error < 0:
        raise InvalidInputError(f"initial error must be nonnegative, got {initial_error}")

    chol = jittered_cholesky(gram_matrix(kernel, samples.locations), scale=kernel.amplitude)
    white_mean = chol.whiten(kernel_mean_at_x)
    white_values = chol.whiten(samples.values)

    mean = float(white_values @ white_mean)
    variance = float(initial_error - white_mean @ white_mean)
    if variance < 0:
        if variance < -VARIANCE_CLAMP_TOLERANCE * initial_error:
            raise NumericalFailureError(
                f"posterior variance {variance:.3e} is negative beyond round-off", jitter=chol.jitter
            )
        variance = 0.0
    return NormalPosterior(mean=mean, variance=variance)
