"""
Unit tests for online estimators.
"""

import math

import numpy as np
import pytest

from src.core.estimators import ArmObservation, Estimators, confidence_radius, update_estimates
from src.core.models import ProbingCost
from src.utils.exceptions import ValidationError


class TestConfidenceRadius:
    """Tests for confidence_radius."""

    def test_known_values(self):
        """n=1 gives 1.8282 and n=100 gives 0.1637 at delta=0.05."""
        assert confidence_radius(1, 0.05) == pytest.approx(1.8282, abs=1e-4)
        assert confidence_radius(100, 0.05) == pytest.approx(0.1637, abs=1e-4)

    def test_unobserved_is_infinite(self):
        """No observations, no confidence."""
        assert math.isinf(confidence_radius(0, 0.05))

    def test_shrinks_with_observations(self):
        """More observations, tighter radius."""
        radii = [confidence_radius(n, 0.1) for n in (1, 10, 100, 1000)]
        assert radii == sorted(radii, reverse=True)

    @pytest.mark.parametrize("delta", [0.0, 1.0, -0.1])
    def test_delta_range(self, delta):
        """delta must lie strictly between 0 and 1."""
        with pytest.raises(ValidationError):
            confidence_radius(5, delta)

    def test_negative_count(self):
        """Counts cannot be negative."""
        with pytest.raises(ValidationError):
            confidence_radius(-1, 0.05)


class TestEstimators:
    """Tests for Estimators and update_estimates."""

    def test_initial_state(self):
        """Uniform PMFs, point-mass-at-1 rewards, sentinel radii."""
        est = Estimators.empty(M=2, K=3, D_max=4, delta=0.05)
        assert est.p_hat[0] == pytest.approx([0.25] * 4)
        assert est.F_hat(1, 2).support == (1.0,)
        assert np.all(est.epsilon == 30.0)
        assert np.all(est.mu_hat == 0.0)
        assert not est.observed_arms.any()

    def test_update(self):
        """Resource counts and rewards are folded into the right cells."""
        est = Estimators.empty(M=2, K=2, D_max=3)
        est = update_estimates(
            est,
            [
                ArmObservation(0, 2, {0: 1.0, 1: 0.0}),
                ArmObservation(0, 2, {0: 0.0}),
                ArmObservation(1, 3, {}),
            ],
        )
        assert est.p_hat[0] == pytest.approx([0.0, 1.0, 0.0])
        assert est.p_hat[1] == pytest.approx([0.0, 0.0, 1.0])
        assert est.n[0].tolist() == [2, 1]
        assert est.mu_hat[0] == pytest.approx([0.5, 0.0])
        assert est.epsilon[0, 1] == pytest.approx(confidence_radius(1, 0.05))
        assert est.epsilon[1, 0] == est.sentinel

    def test_update_is_pure(self):
        """The input state is left untouched."""
        est = Estimators.empty(M=1, K=1, D_max=2)
        updated = update_estimates(est, [ArmObservation(0, 1, {0: 0.5})])
        assert est.n[0, 0] == 0
        assert est.histograms == {}
        assert updated.n[0, 0] == 1

    def test_empirical_distribution(self):
        """F_hat normalizes the reward histogram."""
        est = update_estimates(
            Estimators.empty(M=1, K=1, D_max=1),
            [ArmObservation(0, 1, {0: 0.2}), ArmObservation(0, 1, {0: 0.2}), ArmObservation(0, 1, {0: 0.6})],
        )
        dist = est.F_hat(0, 0)
        assert dist.support == (0.2, 0.6)
        assert dist.probs == pytest.approx((2 / 3, 1 / 3))

    def test_ucb_clamp(self):
        """Clamped UCB never exceeds 1."""
        est = update_estimates(Estimators.empty(M=1, K=1, D_max=1), [ArmObservation(0, 1, {0: 0.9})])
        assert est.ucb()[0, 0] > 1.0
        assert est.ucb(clamp=True)[0, 0] == 1.0

    def test_belief_environment(self):
        """The belief environment uses p_hat and F_hat."""
        est = update_estimates(Estimators.empty(M=2, K=1, D_max=2), [ArmObservation(1, 2, {0: 0.3})])
        env = est.belief_environment(ProbingCost.linear(2))
        assert env.mu[1, 0] == pytest.approx(0.3)
        assert env.mu[0, 0] == pytest.approx(1.0)
        assert env.resource_pmfs[0].probs == pytest.approx((0.5, 0.5))
        assert env.resource_pmfs[1].probs == pytest.approx((0.0, 1.0))

    @pytest.mark.parametrize(
        "observation",
        [
            ArmObservation(2, 1, {}),
            ArmObservation(0, 4, {}),
            ArmObservation(0, 1, {0: 1.5}),
        ],
    )
    def test_invalid_observations(self, observation):
        """Out-of-range arms, resource counts and rewards are rejected."""
        with pytest.raises(ValidationError):
            update_estimates(Estimators.empty(M=2, K=1, D_max=3), [observation])


class TestConcentration:
    """Statistical checks on the confidence radius and the resource PMF estimate."""

    def test_radius_covers_bernoulli_means(self):
        """
        Over 10^4 Bernoulli(0.5) streams of length 100, the mean falls above
        mu_hat + epsilon at some step in at most 6% of the streams.
        """
        rng = np.random.default_rng(11)
        draws = rng.integers(0, 2, size=(10_000, 100))
        steps = np.arange(1, 101)
        mu_hat = np.cumsum(draws, axis=1) / steps
        radius = np.array([confidence_radius(int(n), 0.05) for n in steps])
        violated = np.any(0.5 - mu_hat >= radius, axis=1)
        assert violated.mean() <= 0.06

    def test_pmf_estimate_concentrates(self):
        """max_d |p_hat - p| stays below the DKW radius in all but a delta fraction of trials."""
        rng = np.random.default_rng(12)
        probs = np.array([0.35, 0.25, 0.2, 0.15, 0.05])
        t, delta, trials = 500, 0.05, 10_000
        threshold = math.sqrt((2.0 / t) * math.log(4.0 / delta))
        counts = rng.multinomial(t, probs, size=trials)
        p_hat = counts / t
        misses = np.max(np.abs(p_hat - probs), axis=1) >= threshold
        assert misses.mean() <= delta + 0.01

        for row in counts[:5]:
            draws = np.repeat(np.arange(1, 6), row)
            est = update_estimates(
                Estimators.empty(M=1, K=1, D_max=5),
                [ArmObservation(0, int(d), {}) for d in draws],
            )
            assert est.p_hat[0] == pytest.approx(row / t)
