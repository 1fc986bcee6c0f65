import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from quadrature.models import FloatArray


class NigParams(BaseModel):
    """Normal inverse-gamma parameters (mu0, lambda0, alpha0, beta0) for one dimension."""

    model_config = ConfigDict(frozen=True)
    location: float = 0.0
    precision_scale: float = Field(default=1.0, gt=0)
    shape: float = Field(default=1.0, gt=0)
    rate: float = Field(default=1.0, gt=0)


class LatentState(BaseModel):
    """Gibbs state: one (mean, variance) pair per data point and dimension."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    means: FloatArray
    variances: FloatArray

    @model_validator(mode="after")
    def _check_shapes(self) -> "LatentState":
        if self.means.ndim != 2 or self.means.shape != self.variances.shape:
            raise ValueError(
                f"means {self.means.shape} and variances {self.variances.shape} must be matching n x d matrices"
            )
        if np.any(self.variances <= 0):
            raise ValueError("latent variances must be positive")
        return self

    @classmethod
    def initial(cls, locations: np.ndarray) -> "LatentState":
        """Start every point at its own location with unit variance."""
        locations = np.atleast_2d(np.asarray(locations, dtype=float))
        return cls(means=locations, variances=np.ones_like(locations))

    @property
    def n(self) -> int:
        return self.means.shape[0]


class MixtureRealisation(BaseModel):
    """One truncated draw p = sum_j w_j N(mean_j, diag(variance_j))."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    weights: FloatArray
    means: FloatArray
    variances: FloatArray

    @field_validator("means", "variances")
    @classmethod
    def _as_matrix(cls, value: np.ndarray) -> np.ndarray:
        return value.reshape(-1, 1) if value.ndim == 1 else value

    @model_validator(mode="after")
    def _check_components(self) -> "MixtureRealisation":
        if self.weights.ndim != 1 or self.weights.size == 0:
            raise ValueError("weights must be a non-empty vector")
        if self.means.shape != self.variances.shape or self.means.shape[0] != self.weights.size:
            raise ValueError(
                f"{self.weights.size} weights do not match means {self.means.shape} / variances {self.variances.shape}"
            )
        if np.any(self.weights < 0) or abs(float(np.sum(self.weights)) - 1.0) > 1e-10:
            raise ValueError("weights must be nonnegative and sum to one")
        # Zero variance is a point mass; allowed for hand-built mixtures.
        if np.any(self.variances < 0):
            raise ValueError("component variances must be nonnegative")
        return self

    @property
    def size(self) -> int:
        return self.weights.size

    @property
    def dim(self) -> int:
        return self.means.shape[1]


class DpConfig(BaseModel):
    """Dirichlet-process mixture settings; the base NIG is shared by every dimension."""

    model_config = ConfigDict(frozen=True)
    concentration: float = Field(default=1.0, gt=0)
    base: NigParams = NigParams()
    truncation: int = Field(default=500, ge=1)
    gibbs_sweeps: int = Field(default=100, ge=1)
