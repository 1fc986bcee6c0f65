from pydantic import BaseModel, ConfigDict, Field, model_validator


class GaussianMixtureSpec(BaseModel):
    """One-dimensional mixture p(dx) = sum_i weights_i N(dx; means_i, sds_i^2)."""

    model_config = ConfigDict(frozen=True, extra="forbid")
    weights: list[float]
    means: list[float]
    sds: list[float]

    @model_validator(mode="after")
    def _check_components(self) -> "GaussianMixtureSpec":
        size = len(self.weights)
        if size < 1 or len(self.means) != size or len(self.sds) != size:
            raise ValueError("weights, means and sds must be non-empty and of equal length")
        if any(w < 0 for w in self.weights) or abs(sum(self.weights) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights must be nonnegative and sum to 1, got {self.weights}")
        if any(s < 0 for s in self.sds):
            raise ValueError("mixture sds must be nonnegative")
        return self

    @property
    def size(self) -> int:
        return len(self.weights)


class PolynomialSpec(BaseModel):
    """Sparse polynomial f(x) = sum_t coefficients_t x^exponents_t."""

    model_config = ConfigDict(frozen=True, extra="forbid")
    coefficients: list[float]
    exponents: list[int]

    @model_validator(mode="after")
    def _check_terms(self) -> "PolynomialSpec":
        if len(self.coefficients) != len(self.exponents):
            raise ValueError("coefficients and exponents must have equal length")
        if any(b < 0 for b in self.exponents):
            raise ValueError("exponents must be nonnegative")
        if len(set(self.exponents)) != len(self.exponents):
            raise ValueError(f"exponents must be distinct, got {self.exponents}")
        return self

    @property
    def degree(self) -> int:
        return max(self.exponents, default=0)


class TaskSpec(BaseModel):
    """An integration task with a known answer: integrate `integrand` against `distribution`."""

    model_config = ConfigDict(frozen=True, extra="forbid")
    name: str = Field(default="task")
    integrand: PolynomialSpec
    distribution: GaussianMixtureSpec
