"""Tests for Gram matrices, jittered factorization and the BQ posterior."""

import numpy as np
import pytest
from assertpy import assert_that

from mixture.models import MixtureRealisation
from quadrature.bq import (
    INITIAL_JITTER,
    MAX_JITTER,
    bq_posterior,
    cross_matrix,
    gram_matrix,
    jittered_cholesky,
    regularized_solve,
)
from quadrature.errors import InvalidInputError, NumericalFailureError
from quadrature.kernel_means import initial_error, kernel_mean_vector
from quadrature.models import GaussianKernel, SampleSet
from quadrature.testing import rng_seed


def unit_kernel(dim: int = 1) -> GaussianKernel:
    return GaussianKernel(amplitude=1.0, lengthscales=np.ones(dim))


class TestGramMatrix:
    def test_single_point_is_amplitude(self):
        assert_that(gram_matrix(unit_kernel(), np.array([[0.0]])).tolist()).is_equal_to([[1.0]])

    def test_two_points_off_diagonal(self):
        gram = gram_matrix(unit_kernel(), np.array([0.0, 1.0]))

        assert_that(gram[0, 1]).is_close_to(np.exp(-0.5), 1e-12)
        assert_that(gram[1, 0]).is_equal_to(gram[0, 1])

    def test_anisotropic_two_dimensional(self):
        kernel = GaussianKernel(amplitude=2.0, lengthscales=[1.0, 2.0])
        gram = gram_matrix(kernel, np.array([[0.0, 0.0], [1.0, 2.0]]))

        assert_that(gram[0, 1]).is_close_to(2 * np.exp(-1.0), 1e-12)

    def test_symmetric_with_constant_diagonal(self, seeded_rng):
        kernel = GaussianKernel(amplitude=1.7, lengthscales=[0.4, 1.3])
        gram = gram_matrix(kernel, seeded_rng.normal(size=(8, 2)))

        assert_that(np.array_equal(gram, gram.T)).is_true()
        assert_that(np.all(np.diag(gram) == 1.7)).is_true()

    def test_dimension_mismatch_raises(self):
        with pytest.raises(InvalidInputError):
            gram_matrix(unit_kernel(2), np.zeros((3, 3)))

    def test_cross_matrix_shape(self):
        assert_that(cross_matrix(unit_kernel(), np.zeros((2, 1)), np.zeros((5, 1))).shape).is_equal_to((2, 5))


class TestJitteredCholesky:
    def test_well_conditioned_uses_initial_jitter(self):
        chol = jittered_cholesky(np.eye(3))

        assert_that(chol.jitter).is_close_to(INITIAL_JITTER, 1e-20)

    def test_identity_solve(self):
        solution = regularized_solve(np.eye(3), np.array([1.0, 2.0, 3.0]))

        assert_that(np.allclose(solution, [1.0, 2.0, 3.0], rtol=1e-6)).is_true()

    def test_singular_gram_solves_with_small_residual(self):
        gram = np.ones((2, 2))
        chol = jittered_cholesky(gram)
        solution = chol.solve(np.ones(2))
        residual = (gram + chol.jitter * np.eye(2)) @ solution - np.ones(2)

        assert_that(float(np.linalg.norm(residual))).is_less_than_or_equal_to(1e-8)

    def test_matches_dense_solver_on_distinct_points(self):
        gram = gram_matrix(unit_kernel(), np.linspace(-3, 3, 10))
        rhs = np.arange(10.0)
        chol = jittered_cholesky(gram)
        expected = np.linalg.solve(gram + chol.jitter * np.eye(10), rhs)

        assert_that(np.allclose(chol.solve(rhs), expected, rtol=1e-8, atol=1e-8 * np.abs(expected).max())).is_true()

    def test_indefinite_matrix_fails_at_max_jitter(self):
        with pytest.raises(NumericalFailureError) as error:
            jittered_cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))

        assert_that(error.value.jitter).is_close_to(MAX_JITTER, 1e-12)
        assert_that(str(error.value)).contains("jitter")

    def test_non_square_raises(self):
        with pytest.raises(InvalidInputError):
            jittered_cholesky(np.zeros((2, 3)))


class TestBqPosterior:
    def test_single_point_hand_values(self):
        samples = SampleSet(locations=[[0.0]], values=[2.0])
        posterior = bq_posterior(samples, unit_kernel(), np.array([0.707107]), 0.577350)

        assert_that(posterior.mean).is_close_to(1.414214, 1e-6)
        assert_that(posterior.variance).is_close_to(0.077350, 1e-6)

    def test_zero_values_give_zero_mean(self):
        samples = SampleSet(locations=[[0.0], [1.0]], values=[0.0, 0.0])
        posterior = bq_posterior(samples, unit_kernel(), np.array([0.5, 0.4]), 0.6)
        other = bq_posterior(
            SampleSet(locations=[[0.0], [1.0]], values=[3.0, -1.0]), unit_kernel(), np.array([0.5, 0.4]), 0.6
        )

        assert_that(posterior.mean).is_equal_to(0.0)
        assert_that(posterior.variance).is_equal_to(other.variance)

    def test_zero_kernel_mean_keeps_initial_error(self):
        samples = SampleSet(locations=[[0.0], [1.0]], values=[1.0, 2.0])
        posterior = bq_posterior(samples, unit_kernel(), np.zeros(2), 0.6)

        assert_that(posterior.mean).is_equal_to(0.0)
        assert_that(posterior.variance).is_equal_to(0.6)

    def test_duplicate_location_changes_little(self):
        kernel = unit_kernel()
        kernel_mean = np.array([0.6, 0.5])
        base = bq_posterior(SampleSet(locations=[[0.0], [1.5]], values=[1.0, 2.0]), kernel, kernel_mean, 0.58)
        duplicated = bq_posterior(
            SampleSet(locations=[[0.0], [1.5], [1.5]], values=[1.0, 2.0, 2.0]),
            kernel,
            np.array([0.6, 0.5, 0.5]),
            0.58,
        )

        assert_that(duplicated.mean).is_close_to(base.mean, 1e-6 * abs(base.mean))
        assert_that(duplicated.variance).is_close_to(base.variance, 1e-6 * base.variance)

    def test_tiny_negative_variance_is_clamped(self):
        # mu^T K^{-1} mu exceeds the initial error by about 2e-9, inside the clamp tolerance.
        samples = SampleSet(locations=[[0.0]], values=[1.0])
        posterior = bq_posterior(samples, unit_kernel(), np.array([1.0 + 1e-9]), 1.0)

        assert_that(posterior.variance).is_equal_to(0.0)

    def test_clearly_negative_variance_raises(self):
        samples = SampleSet(locations=[[0.0]], values=[1.0])

        with pytest.raises(NumericalFailureError):
            bq_posterior(samples, unit_kernel(), np.array([2.0]), 1.0)

    def test_wrong_kernel_mean_length_raises(self):
        samples = SampleSet(locations=[[0.0], [1.0]], values=[1.0, 2.0])

        with pytest.raises(InvalidInputError):
            bq_posterior(samples, unit_kernel(), np.zeros(3), 1.0)

    def test_negative_initial_error_raises(self):
        samples = SampleSet(locations=[[0.0]], values=[1.0])

        with pytest.raises(InvalidInputError):
            bq_posterior(samples, unit_kernel(), np.zeros(1), -1.0)

    def test_integrand_in_kernel_span_is_integrated_exactly(self):
        # f = sum_j c_j k(., x_j) integrates to sum_j c_j mu(x_j)
        kernel = unit_kernel()
        locations = np.linspace(-4.0, 4.0, 5).reshape(-1, 1)
        coefficients = np.array([0.3, -1.2, 2.0, 0.5, -0.7])
        realisation = MixtureRealisation(weights=[0.6, 0.4], means=[-0.5, 1.0], variances=[0.8, 0.3])
        kernel_mean = kernel_mean_vector(locations, realisation, kernel)
        samples = SampleSet(locations=locations, values=gram_matrix(kernel, locations) @ coefficients)

        posterior = bq_posterior(samples, kernel, kernel_mean, initial_error(realisation, kernel))

        assert_that(posterior.mean).is_close_to(float(coefficients @ kernel_mean), 1e-8)

    @rng_seed(23)
    def test_variance_stays_within_initial_error(self, seeded_rng):
        for _ in range(50):
            dim = int(seeded_rng.integers(1, 3))
            size = int(seeded_rng.integers(1, 6))
            amplitude = float(seeded_rng.uniform(0.5, 2.0))
            kernel = GaussianKernel(amplitude=amplitude, lengthscales=seeded_rng.uniform(0.3, 2.0, dim))
            weights = seeded_rng.dirichlet(np.ones(size))
            realisation = MixtureRealisation(
                weights=weights / weights.sum(),
                means=seeded_rng.normal(size=(size, dim)),
                variances=seeded_rng.uniform(0.1, 2.0, size=(size, dim)),
            )
            locations = seeded_rng.normal(size=(int(seeded_rng.integers(1, 11)), dim))
            samples = SampleSet(locations=locations, values=seeded_rng.normal(size=locations.shape[0]))
            error = initial_error(realisation, kernel)

            posterior = bq_posterior(samples, kernel, kernel_mean_vector(locations, realisation, kernel), error)

            assert_that(posterior.variance).is_between(0.0, error)
