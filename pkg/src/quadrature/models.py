from typing import Annotated, Any

import numpy as np
from pydantic import BaseModel, BeforeValidator, ConfigDict, Field, PlainSerializer, field_validator, model_validator


def _readonly_float_array(value: Any) -> np.ndarray:
    array = np.array(value, dtype=float)
    array.flags.writeable = False
    return array


# Arrays are copied on validation and frozen, so models stay immutable.
FloatArray = Annotated[
    np.ndarray,
    BeforeValidator(_readonly_float_array),
    PlainSerializer(lambda array: array.tolist(), return_type=list),
]


class GaussianKernel(BaseModel):
    """Gaussian kernel k(x, x') = amplitude * exp(-sum_d (x_d - x'_d)^2 / (2 lengthscale_d^2))."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    amplitude: float = Field(default=1.0, gt=0)
    lengthscales: FloatArray

    @field_validator("lengthscales")
    @classmethod
    def _check_lengthscales(cls, value: np.ndarray) -> np.ndarray:
        value = value.reshape(-1) if value.ndim == 0 else value
        if value.ndim != 1 or value.size == 0:
            raise ValueError("lengthscales must be a non-empty vector")
        if not np.all(np.isfinite(value)) or np.any(value <= 0):
            raise ValueError("every lengthscale must be positive and finite")
        return value

    @property
    def dim(self) -> int:
        return self.lengthscales.size


class SampleSet(BaseModel):
    """The n locations X (n x d) and integrand values f(X) given to the estimator."""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)
    locations: FloatArray
    values: FloatArray

    @field_validator("locations")
    @classmethod
    def _as_matrix(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim == 1:
            value = value.reshape(-1, 1)
        if value.ndim != 2:
            raise ValueError("locations must be an n x d matrix")
        return value

    @field_validator("values")
    @classmethod
    def _as_vector(cls, value: np.ndarray) -> np.ndarray:
        if value.ndim != 1:
            raise ValueError("values must be a vector")
        return value

    @model_validator(mode="after")
    def _check_consistency(self) -> "SampleSet":
        if self.locations.shape[0] != self.values.shape[0]:
            raise ValueError(
                f"locations have {self.locations.shape[0]} rows but {self.values.shape[0]} values were given"
            )
        if self.locations.shape[0] < 1 or self.locations.shape[1] < 1:
            raise ValueError("a sample set needs at least one row and one dimension")
        if not (np.all(np.isfinite(self.locations)) and np.all(np.isfinite(self.values))):
            raise ValueError("sample locations and values must be finite")
        return self

    @property
    def n(self) -> int:
        return self.locations.shape[0]

    @property
    def d(self) -> int:
        return self.locations.shape[1]


class NormalPosterior(BaseModel):
    """Normal law N(mean, variance) over the value of an integral."""

    model_config = ConfigDict(frozen=True)
    mean: float
    variance: float = Field(ge=0)

    @property
    def sd(self) -> float:
        return float(np.sqrt(self.variance))

    def sample(self, rng: np.random.Generator) -> float:
        """Draw one value; a zero-variance posterior returns its mean exactly."""
        return self.mean + self.sd * float(rng.standard_normal())
