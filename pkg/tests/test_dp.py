import math

import numpy as np
import pytest

from app.dp import (
    DpPosterior,
    DpPrior,
    dirichlet_equivalent,
    dp_posterior,
    dp_summary,
    posterior_m_variance,
    posterior_mean_m,
    posterior_mean_pmf,
    posterior_partition_params,
    sample_base_mixture,
    sample_realization,
    support_size_estimate,
)
from app.estimators import Classification, dirichlet_posterior
from app.offspring import AgnosticFamily, FinitePmf, Poisson, calibrate_agnostic_base
from app.process import OffspringCounts, simulate_complete
from app.types import InvalidDataError, InvalidDistributionError


@pytest.fixture
def posterior(small_counts, agnostic_poisson) -> DpPosterior:
    return dp_posterior(DpPrior(1.0, agnostic_poisson), small_counts)


class TestPosterior:
    def test_atoms_and_concentration(self, posterior):
        assert posterior.atoms == (2, 1, 1)
        assert posterior.n_obs == 4
        assert posterior.concentration == 5.0
        assert posterior.data_weight == pytest.approx(0.8)

    def test_mean_pmf_mixes_data_and_base(self, posterior):
        lam = 0.6954
        assert posterior_mean_pmf(posterior, 0) == pytest.approx(0.4 + 0.2 * math.exp(-lam))
        assert posterior_mean_pmf(posterior, 5) == pytest.approx(
            0.2 * math.exp(-lam) * lam**5 / math.factorial(5)
        )

    def test_mean_pmf_sums_to_one(self, posterior):
        total = sum(posterior_mean_pmf(posterior, j) for j in range(40))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_mean_m(self, posterior):
        assert posterior_mean_m(posterior) == pytest.approx(0.8 * 0.75 + 0.2 * 0.6954)

    def test_variance(self, posterior):
        lam = 0.6954
        mean = posterior_mean_m(posterior)
        second = (5.0 + lam + lam * lam) / 5.0
        assert posterior_m_variance(posterior) == pytest.approx((second - mean**2) / 6.0)

    def test_prior_only(self, agnostic_poisson):
        post = dp_posterior(DpPrior(2.0, agnostic_poisson))
        assert post.n_obs == 0
        assert posterior_mean_m(post) == pytest.approx(0.6954)

    def test_update_from_no_atoms(self, small_counts, agnostic_poisson):
        empty = DpPosterior(1.0, (), agnostic_poisson)
        assert empty.update().atoms == ()
        assert empty.update(small_counts).atoms == (2, 1, 1)
        assert dp_posterior(DpPrior(1.0, agnostic_poisson), small_counts).n_obs == 4

    def test_update_equals_joint_posterior(self, small_counts, agnostic_poisson):
        prior = DpPrior(1.0, agnostic_poisson)
        other = OffspringCounts.from_rows([[0, 0, 0, 1], [3]])
        assert dp_posterior(prior, small_counts).update(other) == dp_posterior(
            prior, small_counts, other
        )

    def test_negative_pmf_index(self, posterior):
        with pytest.raises(ValueError):
            posterior_mean_pmf(posterior, -1)

    @pytest.mark.parametrize("a", [0.0, -1.0, float("inf")])
    def test_concentration_must_be_positive(self, a, agnostic_poisson):
        with pytest.raises(InvalidDistributionError):
            DpPrior(a, agnostic_poisson)

    def test_summary(self, posterior, seed):
        summary = dp_summary(posterior)
        assert summary.p_supercritical is None
        assert summary.classification is Classification.SUBCRITICAL_OR_CRITICAL
        sampled = dp_summary(posterior, rng=seed, draws=200)
        assert 0.0 <= sampled.p_supercritical < 0.5


class TestDirichletEquivalent:
    def test_finite_base(self):
        prior = DpPrior(2.0, FinitePmf((0.5, 0.25, 0.25)))
        assert dirichlet_equivalent(prior, 2).alpha.tolist() == [1.0, 0.5, 0.5]

    def test_empty_cells_get_floor(self):
        prior = DpPrior(2.0, FinitePmf((0.5, 0.25, 0.25)))
        assert dirichlet_equivalent(prior, 3, eps=1e-4).alpha.tolist() == [1.0, 0.5, 0.5, 1e-4]

    def test_infinite_base_is_rejected(self, agnostic_poisson):
        with pytest.raises(InvalidDistributionError, match="outside"):
            dirichlet_equivalent(DpPrior(1.0, agnostic_poisson), 3)

    def test_partition_cells(self, posterior):
        lam = 0.6954
        alpha = posterior_partition_params(posterior, 2).alpha
        assert alpha[0] == pytest.approx(2.0 + math.exp(-lam))
        assert alpha[1] == pytest.approx(1.0 + lam * math.exp(-lam))
        assert alpha[2] == pytest.approx(1.0 + 1.0 - (1.0 + lam) * math.exp(-lam))
        assert alpha.sum() == pytest.approx(posterior.concentration)


class TestRealizations:
    def test_realization_is_a_distribution(self, posterior, seed):
        law = sample_realization(posterior, rng=seed)
        assert math.fsum(law.probs) == pytest.approx(1.0, abs=1e-12)

    def test_reproducible(self, posterior, seed):
        assert sample_realization(posterior, rng=seed) == sample_realization(posterior, rng=seed)

    def test_average_mean_matches_posterior(self, posterior, seed):
        draws = 2_000
        generator = seed.generator()
        means = np.array(
            [sample_realization(posterior, rng=generator).mean() for _ in range(draws)]
        )
        sd = math.sqrt(posterior_m_variance(posterior) / draws)
        assert means.mean() == pytest.approx(posterior_mean_m(posterior), abs=4 * sd)

    def test_average_cells_match_the_partition_marginal(self, posterior, seed):
        generator = seed.generator()
        cells = np.zeros(4)
        draws = 2_000
        for _ in range(draws):
            law = sample_realization(posterior, rng=generator)
            head = np.array([law.pmf(j) for j in range(3)])
            cells += np.append(head, 1.0 - head.sum())
        expected = posterior_partition_params(posterior, 3).mean_vector()
        assert cells / draws == pytest.approx(expected, abs=0.02)

    def test_point_mass_base(self, seed):
        post = DpPosterior(1.0, (0, 5), FinitePmf((0.0, 1.0)))
        assert sample_realization(post, rng=seed).probs == (0.0, 1.0)

    def test_bad_tolerance(self, posterior):
        with pytest.raises(ValueError):
            sample_realization(posterior, truncation_tol=1.5)

    def test_mixture_follows_data_when_concentration_vanishes(self, seed):
        post = DpPosterior(1e-9, (0, 0, 10), Poisson(1.0))
        assert set(sample_base_mixture(post, 500, seed).tolist()) == {2}

    @pytest.mark.slow
    def test_agnostic_discrete_base_median(self, seed):
        base, a = calibrate_agnostic_base(AgnosticFamily.DISCRETE, 4)
        assert a == pytest.approx(1.5)
        post = dp_posterior(DpPrior(a, base))
        generator = seed.generator()
        means = [sample_realization(post, rng=generator).mean() for _ in range(40_000)]
        assert np.median(means) == pytest.approx(1.0, abs=0.05)

    @pytest.mark.parametrize("family", [AgnosticFamily.POISSON, AgnosticFamily.GEOMETRIC])
    @pytest.mark.parametrize("a", [1.0, 10.0])
    def test_agnostic_base_is_the_prior_mean_law(self, family, a):
        # E[G] = G_0, so the expected offspring law keeps median one
        base, _ = calibrate_agnostic_base(family)
        post = dp_posterior(DpPrior(a, base))
        cdf = np.cumsum([posterior_mean_pmf(post, j) for j in range(3)])
        # the geometric base has G_0(X <= 1) = 1/2 up to rounding
        assert cdf[0] < 0.5 <= cdf[1] + 1e-12
        assert posterior_mean_m(post) == pytest.approx(base.mean())


class TestSupportSize:
    def test_recovers_observed_support(self, seed):
        post = DpPosterior(1.0, (160, 120, 80, 40), Poisson(0.6954))
        assert support_size_estimate(post, draws=30, rng=seed) == 4

    def test_needs_a_sample_size(self, agnostic_poisson):
        with pytest.raises(InvalidDataError):
            support_size_estimate(dp_posterior(DpPrior(1.0, agnostic_poisson)), draws=5)

    def test_explicit_sample_size(self, seed):
        post = DpPosterior(1.0, (0, 50), FinitePmf((0.0, 1.0)))
        assert support_size_estimate(post, draws=5, sample_size=20, rng=seed) == 1


class TestConjugacy:
    @pytest.mark.parametrize(
        "probs",
        [(0.5, 0.5), (0.2, 0.3, 0.5), (0.1, 0.2, 0.3, 0.2, 0.1, 0.1)],
    )
    @pytest.mark.parametrize("a", [0.5, 1.0, 7.0])
    def test_mean_pmf_matches_dirichlet_update(self, seed, probs, a):
        base = FinitePmf(probs)
        prior = DpPrior(a, base)
        counts = simulate_complete(base, 2, 3, seed)
        post = dp_posterior(prior, counts)
        equivalent = dirichlet_posterior(dirichlet_equivalent(prior, base.k), counts)
        expected = equivalent.mean_vector()
        for j in range(base.k + 1):
            assert posterior_mean_pmf(post, j) == pytest.approx(expected[j], rel=1e-12)
