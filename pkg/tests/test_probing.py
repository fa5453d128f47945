"""
Unit tests for offline probing: expectations, greedy probing and the
exhaustive oracle.
"""

import numpy as np
import pytest

from src.core.harness import ZETA
from src.core.probing import (
    Exact,
    ExpectationEngine,
    MonteCarlo,
    ProbeSetScorer,
    R_of,
    exhaustive_optimal_probe,
    f_prob,
    f_total,
    greedy_probe,
)
from src.core.synthetic import random_environment
from src.utils.exceptions import (
    ExpectationLimitError,
    OracleInfeasibleError,
    ProbingBudgetError,
    ValidationError,
)


class TestExpectations:
    """Tests for f_prob, f_total and R under Exact."""

    def test_worked_example(self, worked_env):
        """f_prob({0}) = 0.5, f_total({0}) = 0.7, R({0}) = 0.63."""
        assert f_prob({0}, worked_env) == pytest.approx(0.5)
        assert f_total({0}, worked_env) == pytest.approx(0.7)
        assert R_of({0}, worked_env) == pytest.approx(0.63)

    def test_empty_set(self, worked_env):
        """f_prob of nothing is 0; R(empty) is the unprobed optimum."""
        assert f_prob(set(), worked_env) == 0.0
        assert R_of(set(), worked_env) == pytest.approx(0.5)

    def test_full_budget_scores_zero(self, worked_env):
        """alpha(I) = 1 makes R vanish."""
        assert R_of({0, 1}, worked_env) == 0.0

    def test_budget_exceeded(self, make_env):
        """R rejects |S| > I."""
        env = make_env([[0.1], [0.2], [0.3]], alpha=(0.0, 1.0))
        with pytest.raises(ProbingBudgetError):
            R_of({0, 1}, env)

    def test_probing_env(self, probing_env):
        """Probing the coin-flip arm: R({0}) = 0.73125 beats R(empty) = 0.55."""
        engine = ExpectationEngine(probing_env, Exact())
        assert engine.f_prob({0}) == pytest.approx(0.75)
        assert engine.R(set()) == pytest.approx(0.55)
        assert engine.R({0}) == pytest.approx(0.73125)

    def test_outcome_limit(self, worked_env):
        """Exact refuses to enumerate beyond its limit."""
        with pytest.raises(ExpectationLimitError):
            f_total({0}, worked_env, Exact(max_outcomes=1))

    def test_monte_carlo_close_to_exact(self, probing_env):
        """A large shared bank lands near the exact value."""
        estimate = f_total({0}, probing_env, MonteCarlo(W=20000, seed=3))
        assert estimate == pytest.approx(0.8125, abs=0.02)

    def test_monte_carlo_reproducible(self, probing_env):
        """The same seed gives the same estimate."""
        a = f_prob({0}, probing_env, MonteCarlo(W=50, seed=9))
        b = f_prob({0}, probing_env, MonteCarlo(W=50, seed=9))
        assert a == b

    def test_monte_carlo_requires_samples(self):
        """W must be at least 1."""
        with pytest.raises(ValidationError):
            MonteCarlo(W=0)

    @pytest.mark.parametrize("seed", range(4))
    def test_per_sample_fallback_agrees(self, seed):
        """Per-sample matching gives the same values as the subset tables."""
        env = random_environment(
            np.random.default_rng(seed), M=3, K=2, D_max=3, budget=2, max_joint_outcomes=2000
        )
        tables = ExpectationEngine(env, Exact())
        fallback = ExpectationEngine(env, Exact(), pair_limit=1)
        for probe_set in ({0}, {1}, {0, 2}):
            assert fallback.f_total(probe_set) == pytest.approx(tables.f_total(probe_set), abs=1e-9)
            assert fallback.f_prob(probe_set) == pytest.approx(tables.f_prob(probe_set), abs=1e-9)


class TestGreedyProbe:
    """Tests for greedy_probe."""

    def test_falls_back_to_empty(self, worked_env):
        """
        The only stage scores 0.9 * f_prob({0}) = 0.45 < f_unprobed(empty) = 0.5,
        so greedy probes nothing.
        """
        plan = greedy_probe(worked_env)
        assert plan.probe_set == frozenset()
        assert plan.value == pytest.approx(0.5)
        assert [sorted(s.probe_set) for s in plan.stages] == [[], [0]]

    def test_probes_when_worthwhile(self, probing_env):
        """0.9 * 0.75 = 0.675 beats 0.55, so greedy probes arm 0."""
        plan = greedy_probe(probing_env)
        assert plan.sorted_set == [0]
        assert plan.value == pytest.approx(0.73125)

    def test_stages_are_nested(self):
        """Each greedy stage adds one arm to the previous one."""
        env = random_environment(
            np.random.default_rng(4), M=4, K=2, D_max=2, budget=4, max_joint_outcomes=3000
        )
        plan = greedy_probe(env)
        for prev, cur in zip(plan.stages, plan.stages[1:]):
            assert prev.probe_set < cur.probe_set
            assert len(cur.probe_set) == len(prev.probe_set) + 1
        assert len(plan.stages) == min(env.I - 1, env.M) + 1

    @pytest.mark.parametrize("seed", range(200))
    def test_approximation_ratio(self, seed):
        """R(greedy) >= zeta * R(S*) on random instances."""
        rng = np.random.default_rng(1000 + seed)
        M, K, D_max = (int(rng.integers(1, hi + 1)) for hi in (4, 3, 3))
        env = random_environment(rng, M=M, K=K, D_max=D_max, max_joint_outcomes=2000)
        engine = ExpectationEngine(env, Exact())
        plan = greedy_probe(env, engine=engine)
        optimum = exhaustive_optimal_probe(env, engine=engine)
        assert plan.value >= ZETA * optimum.value - 1e-9
        assert plan.value <= optimum.value + 1e-9


class TestExhaustiveOptimalProbe:
    """Tests for exhaustive_optimal_probe."""

    def test_worked_example(self, worked_env):
        """S* = {0} with R(S*) = 0.63."""
        plan = exhaustive_optimal_probe(worked_env)
        assert plan.sorted_set == [0]
        assert plan.value == pytest.approx(0.63)

    def test_ties_prefer_smaller_set(self, make_env):
        """With nothing to learn, the empty set wins ties."""
        env = make_env([[0.5], [0.5]], alpha=(0.0, 0.0, 1.0))
        plan = exhaustive_optimal_probe(env)
        assert plan.probe_set == frozenset()

    def test_arm_gate(self, worked_env):
        """More arms than the gate is infeasible."""
        with pytest.raises(OracleInfeasibleError):
            exhaustive_optimal_probe(worked_env, max_arms=1)


class TestProbeSetScorer:
    """Tests for ProbeSetScorer."""

    def test_prefers_exact(self, probing_env):
        """Small instances are scored exactly."""
        scorer = ProbeSetScorer(probing_env)
        assert isinstance(scorer.method, Exact)
        assert scorer({0}) == pytest.approx(0.73125)
        assert scorer.optimum().sorted_set == [0]

    def test_falls_back_to_monte_carlo(self, probing_env):
        """A tiny outcome limit switches the whole scorer to Monte Carlo."""
        scorer = ProbeSetScorer(probing_env, max_outcomes=1, samples=64, evaluation_seed=5)
        assert isinstance(scorer.method, MonteCarlo)
        assert scorer.method.W == 64
        assert scorer.method.seed == 5

    def test_explicit_monte_carlo(self, worked_env):
        """prefer_exact=False always uses Monte Carlo."""
        scorer = ProbeSetScorer(worked_env, prefer_exact=False, samples=10)
        assert isinstance(scorer.method, MonteCarlo)


def _small_instance(seed):
    rng = np.random.default_rng(seed)
    M, K, D_max = (int(rng.integers(1, hi + 1)) for hi in (4, 3, 3))
    return rng, random_environment(rng, M=M, K=K, D_max=D_max, max_joint_outcomes=2000)


def _random_subset(rng, M):
    return {m for m in range(M) if rng.random() < 0.5}


class TestObjectiveProperties:
    """Structural properties of the expectation-level objectives."""

    @pytest.mark.parametrize("seed", range(100))
    def test_f_prob_monotone(self, seed):
        """Adding arms to the probing set never lowers f_prob."""
        rng, env = _small_instance(200 + seed)
        engine = ExpectationEngine(env, Exact())
        small = _random_subset(rng, env.M)
        large = small | _random_subset(rng, env.M)
        assert engine.f_prob(small) <= engine.f_prob(large) + 1e-9

    @pytest.mark.parametrize("seed", range(100))
    def test_f_unprobed_decreasing(self, seed):
        """Excluding more arms never raises f_unprobed."""
        rng, env = _small_instance(300 + seed)
        engine = ExpectationEngine(env, Exact())
        small = _random_subset(rng, env.M)
        large = small | _random_subset(rng, env.M)
        assert engine.f_unprobed(small) >= engine.f_unprobed(large) - 1e-9

    @pytest.mark.parametrize("seed", range(100))
    def test_f_prob_submodular(self, seed):
        """f_prob(S) + f_prob(T) >= f_prob(S | T) + f_prob(S & T)."""
        rng, env = _small_instance(400 + seed)
        engine = ExpectationEngine(env, Exact())
        s, t = _random_subset(rng, env.M), _random_subset(rng, env.M)
        lhs = engine.f_prob(s) + engine.f_prob(t)
        rhs = engine.f_prob(s | t) + engine.f_prob(s & t)
        assert lhs >= rhs - 1e-9

    @pytest.mark.parametrize("seed", range(100))
    def test_total_decomposes(self, seed):
        """f_total(S) <= f_prob(S) + f_unprobed(S)."""
        rng, env = _small_instance(500 + seed)
        engine = ExpectationEngine(env, Exact())
        s = _random_subset(rng, env.M)
        assert engine.f_total(s) <= engine.f_prob(s) + engine.f_unprobed(s) + 1e-9

    @pytest.mark.parametrize("seed", range(100))
    def test_greedy_never_below_fallback(self, seed):
        """The greedy plan beats probing nothing and every stage it considered."""
        _, env = _small_instance(600 + seed)
        engine = ExpectationEngine(env, Exact())
        plan = greedy_probe(env, engine=engine)
        assert plan.value >= engine.f_unprobed(set()) - 1e-9
        for stage in plan.stages:
            assert stage.scaled <= plan.value + 1e-9

    def test_f_total_two_outcomes(self, worked_env):
        """E[max(X, 0.4)] with X uniform on {0, 1} is 0.7."""
        assert f_total({0}, worked_env) == pytest.approx(0.7)
        assert f_total(set(), worked_env) == pytest.approx(0.5)

    def test_single_budget_never_probes(self, make_env):
        """With I = 1 the only candidate is the empty set."""
        env = make_env([[([0.0, 1.0], [0.5, 0.5])], [0.4]], alpha=(0.0, 1.0))
        assert greedy_probe(env).probe_set == frozenset()
        assert exhaustive_optimal_probe(env).probe_set == frozenset()
