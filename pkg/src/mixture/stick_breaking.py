import numpy as np

from quadrature.errors import InvalidInputError

from .models import DpConfig, LatentState, MixtureRealisation
from .nig import sample_nig_arrays


def stick_weights(breaks: np.ndarray) -> np.ndarray:
    """Turn break proportions beta_1..beta_N into weights w_j = beta_j * prod_{j'<j} (1 - beta_j').

    The last break is forced to 1, so the weights sum to one.
    """
    breaks = np.array(breaks, dtype=float)
    if breaks.ndim != 1 or breaks.size == 0:
        raise InvalidInputError("breaks must be a non-empty vector")
    breaks[-1] = 1.0
    remaining = np.concatenate(([1.0], np.cumprod(1.0 - breaks[:-1])))
    return breaks * remaining


def stick_breaking_draw(
    state: LatentState,
    config: DpConfig,
    rng: np.random.Generator,
    breaks: np.ndarray | None = None,
) -> MixtureRealisation:
    """Draw a truncated realisation of p from [p | phi_1..phi_n].

    Breaks are Beta(1, alpha + n) with beta_N = 1. Each atom is a fresh base draw with
    probability alpha / (alpha + n) and otherwise a uniformly chosen latent phi_i.

    Args:
        state: Latent parameters after Gibbs sampling
        config: Concentration, base distribution and truncation level N
        rng: Random generator
        breaks: Fixed break proportions (length N) to use instead of Beta draws

    Returns:
        MixtureRealisation with N components
    """
    n, d = state.means.shape
    truncation = config.truncation
    concentration = config.concentration

    if breaks is None:
        breaks = rng.beta(1.0, concentration + n, size=truncation)
    elif np.shape(breaks) != (truncation,):
        raise InvalidInputError(f"expected {truncation} breaks, got shape {np.shape(breaks)}")
    weights = stick_weights(breaks)

    fresh = rng.random(truncation) < concentration / (concentration + n)
    picks = rng.integers(n, size=truncation)
    means = state.means[picks].copy()
    variances = state.variances[picks].copy()

    fresh_count = int(np.count_nonzero(fresh))
    if fresh_count:
        base = config.base
        shape = (fresh_count, d)
        means[fresh], variances[fresh] = sample_nig_arrays(
            np.full(shape, base.location),
            np.full(shape, base.precision_scale),
            np.full(shape, base.shape),
            np.full(shape, base.rate),
            rng,
        )
    return MixtureRealisation(weights=weights, means=means, variances=variances)
