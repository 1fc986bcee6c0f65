"""Closed-form kernel means and initial errors for a Gaussian kernel against a Gaussian mixture.

The kernel is amplitude * prod_d exp(-(x_d - x'_d)^2 / (2 lambda_d^2)), so every integral factorizes
over dimensions and the amplitude is applied once to the product.
"""

import numpy as np

from mixture.models import MixtureRealisation

from .errors import InvalidInputError
from .models import GaussianKernel


def _check_dims(realisation: MixtureRealisation, kernel: GaussianKernel) -> None:
    if realisation.dim != kernel.dim:
        raise InvalidInputError(
            f"mixture has dimension {realisation.dim} but the kernel has {kernel.dim} lengthscale(s)"
        )


def _component_factors(locations: np.ndarray, realisation: MixtureRealisation, kernel: GaussianKernel) -> np.ndarray:
    """n x N matrix of prod_d lambda_d / sqrt(s) * exp(-(x_d - m_jd)^2 / (2 s)), s = lambda_d^2 + v_jd."""
    spread = kernel.lengthscales**2 + realisation.variances
    diff = locations[:, None, :] - realisation.means[None, :, :]
    per_dim = kernel.lengthscales / np.sqrt(spread) * np.exp(-0.5 * diff**2 / spread)
    return np.prod(per_dim, axis=-1)


def kernel_mean_vector(
    locations: np.ndarray,
    realisation: MixtureRealisation,
    kernel: GaussianKernel,
) -> np.ndarray:
    """Evaluate mu(x) = integral of k(x, x') p(dx') at every row of locations.

    Args:
        locations: n x d matrix (a vector is read as n one-dimensional points)
        realisation: Gaussian mixture p
        kernel: Gaussian kernel

    Returns:
        Vector of n kernel-mean values

    Raises:
        InvalidInputError: If dimensions disagree
    """
    _check_dims(realisation, kernel)
    locations = np.asarray(locations, dtype=float)
    if locations.ndim == 1:
        locations = locations.reshape(-1, 1) if kernel.dim == 1 else locations.reshape(1, -1)
    if locations.ndim != 2 or locations.shape[1] != kernel.dim:
        raise InvalidInputError(f"locations have shape {locations.shape}, expected d = {kernel.dim}")
    factors = _component_factors(locations, realisation, kernel)
    return kernel.amplitude * np.sum(factors * realisation.weights, axis=1)


def kernel_mean_point(x: np.ndarray, realisation: MixtureRealisation, kernel: GaussianKernel) -> float:
    """Kernel mean at a single d-dimensional point."""
    row = np.asarray(x, dtype=float).reshape(1, -1)
    return float(kernel_mean_vector(row, realisation, kernel)[0])


def initial_error(realisation: MixtureRealisation, kernel: GaussianKernel) -> float:
    """Double integral p x p(k) of the kernel against the mixture in both arguments.

    Sums all N^2 component pairs directly.
    """
    _check_dims(realisation, kernel)
    spread = (
        kernel.lengthscales**2 + realisation.variances[:, None, :] + realisation.variances[None, :, :]
    )
    diff = realisation.means[:, None, :] - realisation.means[None, :, :]
    per_dim = kernel.lengthscales / np.sqrt(spread) * np.exp(-0.5 * diff**2 / spread)
    pair = np.prod(per_dim, axis=-1)
    weights = realisation.weights
    return float(kernel.amplitude * (weights @ pair @ weights))
