"""Evaluation metrics for posteriors over an integral."""

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy import stats

from quadrature.errors import InvalidInputError


def _nonempty(draws: np.ndarray, name: str = "draws") -> np.ndarray:
    draws = np.asarray(draws, dtype=float).reshape(-1)
    if draws.size == 0:
        raise InvalidInputError(f"{name} must not be empty")
    return draws


def wasserstein_to_point(draws: np.ndarray, truth: float) -> float:
    """1-Wasserstein distance between the empirical posterior and a point mass at the truth."""
    return float(np.mean(np.abs(_nonempty(draws) - truth)))


def central_credible_interval(draws: np.ndarray, level: float) -> tuple[float, float]:
    """Empirical quantiles at (1 - level)/2 and (1 + level)/2.

    Quantiles interpolate linearly between order statistics at rank h = (n - 1) p + 1.
    """
    draws = _nonempty(draws)
    if not 0 <= level < 1:
        raise InvalidInputError(f"level must be in [0, 1), got {level}")
    lo, hi = np.quantile(draws, [0.5 * (1 - level), 0.5 * (1 + level)], method="linear")
    return float(lo), float(hi)


def coverage_frequency(covered: np.ndarray) -> tuple[float, float]:
    """Fraction of trials whose interval contained the truth, with its binomial standard error."""
    covered = np.asarray(covered, dtype=bool).reshape(-1)
    if covered.size == 0:
        raise InvalidInputError("coverage needs at least one trial")
    rate = float(np.mean(covered))
    return rate, float(np.sqrt(rate * (1 - rate) / covered.size))


class TrendFit(BaseModel):
    """Least-squares line through (log n, log W)."""

    model_config = ConfigDict(frozen=True)
    slope: float
    intercept: float
    slope_stderr: float

    def slope_interval(self, level: float = 0.95, points: int | None = None) -> tuple[float, float]:
        """Confidence interval for the slope; uses a t quantile when the number of points is known."""
        if points is not None and points > 2:
            quantile = float(stats.t.ppf(0.5 * (1 + level), points - 2))
        else:
            quantile = float(stats.norm.ppf(0.5 * (1 + level)))
        return self.slope - quantile * self.slope_stderr, self.slope + quantile * self.slope_stderr


def fit_loglog_slope(ns: np.ndarray, ws: np.ndarray) -> TrendFit:
    """Fit log W = intercept + slope * log n by ordinary least squares.

    Raises:
        InvalidInputError: If lengths differ, fewer than two points are given, or any value is nonpositive
    """
    ns = np.asarray(ns, dtype=float).reshape(-1)
    ws = np.asarray(ws, dtype=float).reshape(-1)
    if ns.size != ws.size or ns.size < 2:
        raise InvalidInputError(f"need two or more paired values, got {ns.size} and {ws.size}")
    if np.any(ns <= 0) or np.any(ws <= 0):
        raise InvalidInputError("log-log fitting requires positive values")
    if np.all(ns == ns[0]):
        raise InvalidInputError("log-log fitting needs at least two distinct n")
    log_n, log_w = np.log(ns), np.log(ws)
    if np.all(log_w == log_w[0]):
        return TrendFit(slope=0.0, intercept=float(log_w[0]), slope_stderr=0.0)
    fit = stats.linregress(log_n, log_w)
    return TrendFit(slope=float(fit.slope), intercept=float(fit.intercept), slope_stderr=float(fit.stderr))
