"""Tests for the Dirichlet-process Gibbs conditional and sweeps."""

import numpy as np
import pytest
from assertpy import assert_that
from scipy import stats

from mixture.gibbs import gibbs_conditional, gibbs_sweep, run_gibbs
from mixture.models import DpConfig, LatentState, NigParams
from mixture.nig import base_marginal_weight
from quadrature.errors import InvalidInputError
from quadrature.models import SampleSet
from quadrature.testing import rng_seed

from .conftest import assert_probability_vector


def three_points() -> tuple[SampleSet, LatentState]:
    samples = SampleSet(locations=[[-0.5], [0.2], [1.4]], values=[0.0, 0.0, 0.0])
    state = LatentState(means=[[-0.4], [0.0], [1.0]], variances=[[0.5], [1.2], [0.8]])
    return samples, state


class TestGibbsConditional:
    def test_single_point_always_draws_from_base(self):
        samples = SampleSet(locations=[[0.3]], values=[1.0])
        branches = gibbs_conditional(0, LatentState.initial(samples.locations), samples, DpConfig())

        assert_that(branches.base).is_equal_to(1.0)
        assert_that(branches.copies.tolist()).is_equal_to([0.0])

    def test_probabilities_are_normalized_and_exclude_self(self):
        samples, state = three_points()
        branches = gibbs_conditional(1, state, samples, DpConfig())

        assert_probability_vector(branches.probabilities)
        assert_that(branches.copies[1]).is_equal_to(0.0)

    def test_matches_hand_computed_weights(self):
        samples, state = three_points()
        config = DpConfig(concentration=0.7)
        x = samples.locations[0, 0]
        unnormalized = [base_marginal_weight(np.array([x]), config.base, config.concentration)] + [
            0.0 if j == 0 else stats.norm.pdf(x, state.means[j, 0], np.sqrt(state.variances[j, 0])) for j in range(3)
        ]
        expected = np.array(unnormalized) / np.sum(unnormalized)

        assert_that(np.allclose(gibbs_conditional(0, state, samples, config).probabilities, expected, rtol=1e-12)).is_true()

    def test_distant_atom_is_almost_never_copied(self):
        samples = SampleSet(locations=[[0.0], [100.0]], values=[0.0, 0.0])
        state = LatentState.initial(samples.locations)
        branches = gibbs_conditional(0, state, samples, DpConfig(concentration=1.0, base=NigParams()))

        assert_that(branches.copies[1]).is_less_than(1e-10)

    @rng_seed(101)
    def test_branch_frequencies_match_probabilities(self, seeded_rng):
        samples, state = three_points()
        branches = gibbs_conditional(2, state, samples, DpConfig())
        picks = [branches.sample_branch(seeded_rng) for _ in range(100_000)]
        counts = np.array([picks.count(None)] + [picks.count(j) for j in range(3)])
        total_variation = 0.5 * np.abs(counts / counts.sum() - branches.probabilities).sum()

        assert_that(float(total_variation)).is_less_than(0.01)

    def test_extreme_latent_parameters_give_finite_probabilities(self):
        samples, _ = three_points()
        # A far-away mean, and a mean sitting exactly on x with the smallest positive variance
        state = LatentState(means=[[-0.4], [1e200], [-0.5]], variances=[[0.5], [1e-3], [5e-324]])
        branches = gibbs_conditional(0, state, samples, DpConfig())

        assert_that(bool(np.all(np.isfinite(branches.probabilities)))).is_true()
        assert_that(branches.copies[1]).is_equal_to(0.0)
        assert_that(branches.copies[2]).is_close_to(1.0, 1e-12)
        assert_probability_vector(branches.probabilities)

    def test_overflowing_location_raises(self):
        samples = SampleSet(locations=[[0.0], [1e155]], values=[0.0, 0.0])

        with pytest.raises(InvalidInputError):
            gibbs_conditional(0, LatentState.initial(samples.locations), samples, DpConfig())

    def test_index_out_of_range_raises(self):
        samples, state = three_points()

        with pytest.raises(InvalidInputError):
            gibbs_conditional(3, state, samples, DpConfig())


class TestGibbsSweeps:
    def test_same_seed_gives_identical_states(self):
        samples, state = three_points()
        first = run_gibbs(state, samples, DpConfig(), np.random.default_rng(9), sweeps=5)
        second = run_gibbs(state, samples, DpConfig(), np.random.default_rng(9), sweeps=5)

        assert_that(np.array_equal(first.means, second.means)).is_true()
        assert_that(np.array_equal(first.variances, second.variances)).is_true()

    @rng_seed(4)
    def test_zero_sweeps_returns_the_input_state(self, seeded_rng):
        samples, state = three_points()
        result = run_gibbs(state, samples, DpConfig(), seeded_rng, sweeps=0)

        assert_that(np.array_equal(result.means, state.means)).is_true()

    @rng_seed(6)
    def test_sweep_keeps_shape_and_positive_variances(self, seeded_rng):
        samples = SampleSet(locations=seeded_rng.normal(size=(6, 2)), values=np.zeros(6))
        state = gibbs_sweep(LatentState.initial(samples.locations), samples, DpConfig(), seeded_rng)

        assert_that(state.means.shape).is_equal_to((6, 2))
        assert_that(bool(np.all(state.variances > 0))).is_true()

    @rng_seed(8)
    def test_single_point_chain_samples_the_nig_posterior(self, seeded_rng):
        # With one point every update is a fresh draw, so the mean follows the posterior Student-t marginal.
        samples = SampleSet(locations=[[1.0]], values=[0.0])
        config = DpConfig()
        state = LatentState.initial(samples.locations)
        draws = []
        for _ in range(2000):
            state = gibbs_sweep(state, samples, config, seeded_rng)
            draws.append(state.means[0, 0])
        # Posterior after x = 1 under the default base: location 0.5, lambda 2, alpha 1.5, beta 1.25
        marginal = stats.t(df=3.0, loc=0.5, scale=np.sqrt(1.25 / (1.5 * 2.0)))

        assert_that(stats.kstest(draws, marginal.cdf).pvalue).is_greater_than(0.001)

    @rng_seed(12)
    def test_pooled_predictive_resembles_the_data(self, seeded_rng):
        data = stats.norm.ppf((np.arange(30) + 0.5) / 30).reshape(-1, 1)
        samples = SampleSet(locations=data, values=np.zeros(30))
        config = DpConfig()
        state = run_gibbs(LatentState.initial(data), samples, config, seeded_rng, sweeps=50)
        pooled = []
        for _ in range(40):
            state = gibbs_sweep(state, samples, config, seeded_rng)
            pooled.append(seeded_rng.normal(state.means[:, 0], np.sqrt(state.variances[:, 0])))

        assert_that(stats.kstest(np.concatenate(pooled), "norm").statistic).is_less_than(0.15)

    def test_state_shape_mismatch_raises(self):
        samples, _ = three_points()

        with pytest.raises(InvalidInputError):
            run_gibbs(LatentState.initial(np.zeros((2, 1))), samples, DpConfig(), np.random.default_rng(0))
