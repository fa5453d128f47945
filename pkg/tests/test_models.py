"""
Unit tests for data models.

Tests distributions, resource PMFs, the probing cost schedule, the
environment, round realizations and action profiles.
"""

import numpy as np
import pytest

from src.core.models import (
    ActionProfile,
    DiscreteDistribution,
    Environment,
    ProbingCost,
    ResourcePMF,
    RoundRealization,
)
from src.utils.exceptions import ValidationError


class TestDiscreteDistribution:
    """Tests for DiscreteDistribution."""

    def test_mean(self):
        """Mean is the probability-weighted support."""
        dist = DiscreteDistribution((0.1, 0.4, 1.0), (0.5, 0.25, 0.25))
        assert dist.mean() == pytest.approx(0.05 + 0.1 + 0.25)

    def test_bernoulli(self):
        """Bernoulli puts p on 1 and 1-p on 0."""
        dist = DiscreteDistribution.bernoulli(0.3)
        assert dist.support == (0.0, 1.0)
        assert dist.probs == pytest.approx((0.7, 0.3))
        assert dist.mean() == pytest.approx(0.3)

    def test_cdf(self):
        """cdf sums the mass at or below x."""
        dist = DiscreteDistribution((0.2, 0.5), (0.4, 0.6))
        assert dist.cdf(0.1) == 0.0
        assert dist.cdf(0.2) == pytest.approx(0.4)
        assert dist.cdf(1.0) == pytest.approx(1.0)

    def test_probs_must_sum_to_one(self):
        """Probabilities summing away from 1 are rejected."""
        with pytest.raises(ValidationError):
            DiscreteDistribution((0.0, 1.0), (0.5, 0.4))

    def test_support_outside_unit_interval(self):
        """Support values must lie in [0, 1]."""
        with pytest.raises(ValidationError):
            DiscreteDistribution((0.5, 1.5), (0.5, 0.5))

    def test_support_must_ascend(self):
        """Support must be strictly ascending."""
        with pytest.raises(ValidationError):
            DiscreteDistribution((0.5, 0.5), (0.5, 0.5))

    def test_length_mismatch(self):
        """support and probs must have the same length."""
        with pytest.raises(ValidationError):
            DiscreteDistribution((0.5,), (0.5, 0.5))

    def test_sample_stays_in_support(self):
        """Samples only take support values."""
        dist = DiscreteDistribution((0.1, 0.7), (0.3, 0.7))
        draws = dist.sample(np.random.default_rng(0), size=500)
        assert set(np.unique(draws)) <= {0.1, 0.7}
        assert np.mean(draws == 0.7) == pytest.approx(0.7, abs=0.07)

    def test_zero_probability_point_never_drawn(self):
        """A support point with probability 0 is never sampled."""
        dist = DiscreteDistribution((0.0, 0.5, 1.0), (0.5, 0.0, 0.5))
        draws = dist.sample(np.random.default_rng(1), size=1000)
        assert 0.5 not in set(draws.tolist())


class TestResourcePMF:
    """Tests for ResourcePMF."""

    def test_survival(self):
        """survival(i) = P(D >= i), 1 at i <= 1, 0 beyond D_max."""
        pmf = ResourcePMF((0.2, 0.3, 0.5))
        assert pmf.survival(0) == 1.0
        assert pmf.survival(1) == 1.0
        assert pmf.survival(2) == pytest.approx(0.8)
        assert pmf.survival(3) == pytest.approx(0.5)
        assert pmf.survival(4) == 0.0

    def test_survival_vector_pads_with_zero(self):
        """survival_vector extends past D_max with zeros."""
        pmf = ResourcePMF((0.2, 0.8))
        assert pmf.survival_vector(4) == pytest.approx([1.0, 0.8, 0.0, 0.0])

    def test_point_mass(self):
        """point_mass puts all mass on d."""
        pmf = ResourcePMF.point_mass(2, 4)
        assert pmf.probs == (0.0, 1.0, 0.0, 0.0)
        assert pmf.mean() == pytest.approx(2.0)

    def test_point_mass_out_of_range(self):
        """Resource counts live in 1..D_max."""
        with pytest.raises(ValidationError):
            ResourcePMF.point_mass(0, 3)

    def test_sample_range(self):
        """Samples lie in 1..D_max."""
        pmf = ResourcePMF.uniform(5)
        draws = pmf.sample(np.random.default_rng(2), size=200)
        assert draws.min() >= 1
        assert draws.max() <= 5

    def test_invalid_pmf(self):
        """Negative probabilities are rejected."""
        with pytest.raises(ValidationError):
            ResourcePMF((1.2, -0.2))


class TestProbingCost:
    """Tests for ProbingCost."""

    def test_linear(self):
        """linear(I) gives alpha(i) = i / I."""
        cost = ProbingCost.linear(4)
        assert cost.I == 4
        assert cost(0) == 0.0
        assert cost(2) == pytest.approx(0.5)
        assert cost(4) == 1.0

    def test_endpoints_required(self):
        """alpha must start at 0 and end at 1."""
        with pytest.raises(ValidationError):
            ProbingCost((0.0, 0.5))
        with pytest.raises(ValidationError):
            ProbingCost((0.1, 1.0))

    def test_nondecreasing(self):
        """alpha must be nondecreasing."""
        with pytest.raises(ValidationError):
            ProbingCost((0.0, 0.6, 0.4, 1.0))

    def test_budget_at_least_one(self):
        """A single entry leaves no room for I >= 1."""
        with pytest.raises(ValidationError):
            ProbingCost((0.0,))


class TestEnvironment:
    """Tests for Environment."""

    def test_dimensions(self, probing_env):
        """M, K, D_max and I come from the components."""
        assert probing_env.M == 3
        assert probing_env.K == 2
        assert probing_env.D_max == 2
        assert probing_env.I == 2

    def test_mu_and_survival(self, probing_env):
        """mu holds the reward means; survival[m, i] = P(D_m >= i + 1)."""
        assert probing_env.mu[0] == pytest.approx([0.5, 0.5])
        assert probing_env.mu[1] == pytest.approx([0.05, 0.05])
        assert probing_env.survival[0] == pytest.approx([1.0, 0.0])

    def test_arrays_are_read_only(self, probing_env):
        """Cached arrays cannot be written."""
        with pytest.raises(ValueError):
            probing_env.mu[0, 0] = 1.0

    def test_ragged_rewards_rejected(self):
        """Every arm needs K reward distributions."""
        point = DiscreteDistribution.point_mass(0.5)
        with pytest.raises(ValidationError):
            Environment(
                resource_pmfs=(ResourcePMF((1.0,)), ResourcePMF((1.0,))),
                reward_dists=((point, point), (point,)),
                probing_cost=ProbingCost.linear(1),
            )

    def test_pmf_lengths_must_agree(self):
        """Every resource PMF spans the same 1..D_max."""
        point = DiscreteDistribution.point_mass(0.5)
        with pytest.raises(ValidationError):
            Environment(
                resource_pmfs=(ResourcePMF((1.0,)), ResourcePMF((0.5, 0.5))),
                reward_dists=((point,), (point,)),
                probing_cost=ProbingCost.linear(1),
            )


class TestRoundRealization:
    """Tests for RoundRealization."""

    def test_arrays_copied_and_frozen(self):
        """The realization keeps read-only copies of its inputs."""
        n = np.array([1, 2])
        x = np.array([[0.1, 0.2], [0.3, 0.4]])
        realization = RoundRealization(n, x)
        n[0] = 5
        assert realization.N[0] == 1
        with pytest.raises(ValueError):
            realization.X[0, 0] = 1.0

    def test_resource_count_positive(self):
        """Resource counts below 1 are rejected."""
        with pytest.raises(ValidationError):
            RoundRealization(np.array([0]), np.array([[0.5]]))

    def test_check_against_environment(self, worked_env):
        """check rejects draws outside the environment's supports."""
        RoundRealization(np.array([1, 1]), np.array([[1.0], [0.4]])).check(worked_env)
        with pytest.raises(ValidationError):
            RoundRealization(np.array([1, 1]), np.array([[0.5], [0.4]])).check(worked_env)
        with pytest.raises(ValidationError):
            RoundRealization(np.array([2, 1]), np.array([[1.0], [0.4]])).check(worked_env)


class TestActionProfile:
    """Tests for ActionProfile."""

    def test_from_choices(self):
        """Per-play choices become per-arm play sets; None stays unassigned."""
        profile = ActionProfile.from_choices([1, None, 1, 0], M=3)
        assert profile.as_lists() == [[3], [0, 2], []]
        assert profile.arm_of(1) is None
        assert profile.arm_of(2) == 1

    def test_disjoint(self):
        """A play cannot pull two arms."""
        with pytest.raises(ValidationError):
            ActionProfile((frozenset({0}), frozenset({0, 1})), K=2)

    def test_play_index_range(self):
        """Play indices must be below K."""
        with pytest.raises(ValidationError):
            ActionProfile((frozenset({2}),), K=2)

    def test_empty(self):
        """empty assigns nothing."""
        profile = ActionProfile.empty(2, 3)
        assert profile.M == 2
        assert all(not plays for plays in profile.plays)
