"""
Offline probing: expected objectives over probe realizations, greedy
probing, and the exhaustive oracle.

    f_prob(S)      E[best assignment using probed arms only]
    f_unprobed(S)  best expected assignment using arms outside S only
    f_total(S)     E[best assignment with S realized, the rest in expectation]
    R(S)           (1 - alpha(|S|)) * f_total(S)

Expectations are taken either exactly, by enumerating the joint support of
the probed arms, or by Monte Carlo over a sample bank shared by every
candidate set (common random numbers).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Collection, Optional, Union

import numpy as np

from src.core.assignment import (
    Excluded,
    Probed,
    Unprobed,
    best_assignment_values,
    optimal_assignment,
    probed_subset_table,
    subset_pair_count,
    unprobed_subset_table,
)
from src.core.models import Environment
from src.utils.exceptions import (
    ExpectationLimitError,
    OracleInfeasibleError,
    ProbingBudgetError,
    ValidationError,
)
from src.utils.logging import get_logger


DEFAULT_OUTCOME_LIMIT = 100_000
DEFAULT_PAIR_LIMIT = 20_000
DEFAULT_ORACLE_MAX_ARMS = 12
GAIN_TOL = 1e-12

logger = get_logger()


@dataclass(frozen=True)
class Exact:
    """Enumerate the joint support of the probed arms."""

    max_outcomes: int = DEFAULT_OUTCOME_LIMIT


@dataclass(frozen=True)
class MonteCarlo:
    """Average over W sampled realizations drawn from a recorded seed."""

    W: int = 200
    seed: int = 0

    def __post_init__(self) -> None:
        if self.W < 1:
            raise ValidationError("Monte Carlo sample count must be >= 1", field="W", value=self.W)


ExpectationMethod = Union[Exact, MonteCarlo]


@dataclass(frozen=True)
class GreedyStage:
    """One nested greedy set with its f_prob value and overhead-scaled value."""

    probe_set: frozenset[int]
    f_prob: float
    scaled: float


@dataclass(frozen=True)
class ProbePlan:
    """A chosen probing set, its R(S) estimate and how it was evaluated."""

    probe_set: frozenset[int]
    value: float
    method: ExpectationMethod
    stages: tuple[GreedyStage, ...] = field(default=())

    @property
    def sorted_set(self) -> list[int]:
        return sorted(self.probe_set)


# =============================================================================
# EXPECTATION ENGINE
# =============================================================================


class ExpectationEngine:
    """
    Caches expectation-level objectives for one environment and one method.

    Exact mode builds each arm's outcome list (resource count x reward
    vector, with probabilities) and combines probed arms by product.
    MonteCarlo mode draws a single bank of W realizations for all arms.
    """

    def __init__(
        self,
        env: Environment,
        method: ExpectationMethod,
        pair_limit: int = DEFAULT_PAIR_LIMIT,
    ):
        self.env = env
        self.method = method
        self._use_tables = subset_pair_count(env.K) <= pair_limit
        self._cache: dict[tuple[str, frozenset[int]], float] = {}
        self._unprobed_tables = (
            [unprobed_subset_table(env.mu[m], env.survival[m]) for m in range(env.M)]
            if self._use_tables
            else []
        )
        self._probed_tables: dict[int, np.ndarray] = {}
        self._outcomes: dict[int, tuple[np.ndarray, np.ndarray, np.ndarray]] = {}
        if isinstance(method, MonteCarlo):
            self._draw_bank(method)

    # ------------------------------------------------------------------
    # Outcome sources
    # ------------------------------------------------------------------

    def _draw_bank(self, method: MonteCarlo) -> None:
        env = self.env
        rng = np.random.default_rng(method.seed)
        W = method.W
        u_n = rng.random((W, env.M))
        u_x = rng.random((W, env.M, env.K))
        self._bank_N = np.empty((W, env.M), dtype=np.int64)
        self._bank_X = np.empty((W, env.M, env.K))
        for m, pmf in enumerate(env.resource_pmfs):
            cum = np.cumsum(pmf.probs)
            cum[-1] = 1.0
            self._bank_N[:, m] = np.minimum(np.searchsorted(cum, u_n[:, m], side="right"), env.D_max - 1) + 1
            for k, dist in enumerate(env.reward_dists[m]):
                cum = np.cumsum(dist.probs)
                cum[-1] = 1.0
                idx = np.minimum(np.searchsorted(cum, u_x[:, m, k], side="right"), len(dist.support) - 1)
                self._bank_X[:, m, k] = np.asarray(dist.support)[idx]

    def _arm_outcomes(self, m: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(probs, N, X) over the arm's joint support, zero-probability points dropped."""
        if m not in self._outcomes:
            env = self.env
            n_vals = [(d + 1, p) for d, p in enumerate(env.resource_pmfs[m].probs) if p > 0.0]
            per_play = [
                [(v, p) for v, p in zip(dist.support, dist.probs) if p > 0.0]
                for dist in env.reward_dists[m]
            ]
            probs, ns, xs = [], [], []
            for n, pn in n_vals:
                for combo in itertools.product(*per_play):
                    probs.append(pn * math.prod(p for _, p in combo))
                    ns.append(n)
                    xs.append([v for v, _ in combo])
            self._outcomes[m] = (
                np.array(probs),
                np.array(ns, dtype=np.int64),
                np.array(xs, dtype=float).reshape(len(xs), env.K),
            )
        return self._outcomes[m]

    def arm_outcome_count(self, m: int) -> int:
        env = self.env
        count = sum(1 for p in env.resource_pmfs[m].probs if p > 0.0)
        for dist in env.reward_dists[m]:
            count *= sum(1 for p in dist.probs if p > 0.0)
        return count

    def joint_outcome_count(self, probe_set: Collection[int]) -> int:
        return math.prod(self.arm_outcome_count(m) for m in probe_set)

    def _joint(self, probe_set: list[int]) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Weights (n,), N (n, |S|), X (n, |S|, K) over the probed arms' joint support."""
        if isinstance(self.method, MonteCarlo):
            W = self.method.W
            return (
                np.full(W, 1.0 / W),
                self._bank_N[:, probe_set],
                self._bank_X[:, probe_set, :],
            )
        total = self.joint_outcome_count(probe_set)
        if total > self.method.max_outcomes:
            raise ExpectationLimitError(total, self.method.max_outcomes)
        per_arm = [self._arm_outcomes(m) for m in probe_set]
        grids = np.meshgrid(*[np.arange(len(p)) for p, _, _ in per_arm], indexing="ij")
        idx = [g.ravel() for g in grids]
        weights = np.ones(total)
        ns = np.empty((total, len(probe_set)), dtype=np.int64)
        xs = np.empty((total, len(probe_set), self.env.K))
        for j, ((p, n, x), ix) in enumerate(zip(per_arm, idx)):
            weights *= p[ix]
            ns[:, j] = n[ix]
            xs[:, j, :] = x[ix]
        return weights, ns, xs

    # ------------------------------------------------------------------
    # Objectives
    # ------------------------------------------------------------------

    def _probed_table(self, m: int) -> np.ndarray:
        """Subset table of arm m over the Monte Carlo bank (cached per arm)."""
        if m not in self._probed_tables:
            self._probed_tables[m] = probed_subset_table(self._bank_N[:, m], self._bank_X[:, m, :])
        return self._probed_tables[m]

    def _expected_value(self, probe_set: frozenset[int], include_unprobed: bool) -> float:
        env = self.env
        arms = sorted(probe_set)
        rest = [m for m in range(env.M) if m not in probe_set] if include_unprobed else []
        if not arms:
            return self._deterministic_value(rest)

        if self._use_tables:
            if isinstance(self.method, MonteCarlo):
                tables = [self._probed_table(m) for m in arms]
                weights = np.full(self.method.W, 1.0 / self.method.W)
            else:
                weights, ns, xs = self._joint(arms)
                tables = [probed_subset_table(ns[:, j], xs[:, j, :]) for j in range(len(arms))]
            tables += [self._unprobed_tables[m] for m in rest]
            values = best_assignment_values(tables, env.K, weights.shape[0])
            return float(np.dot(weights, values))

        weights, ns, xs = self._joint(arms)
        values = np.empty(weights.shape[0])
        for w in range(weights.shape[0]):
            modes = []
            for m in range(env.M):
                if m in probe_set:
                    j = arms.index(m)
                    modes.append(Probed(int(ns[w, j]), xs[w, j]))
                elif m in rest:
                    modes.append(Unprobed(env.mu[m], env.resource_pmfs[m]))
                else:
                    modes.append(Excluded())
            values[w] = optimal_assignment(modes, env.K, canonical=False)[1]
        return float(np.dot(weights, values))

    def _deterministic_value(self, arms: list[int]) -> float:
        env = self.env
        if not arms:
            return 0.0
        if self._use_tables:
            return float(best_assignment_values([self._unprobed_tables[m] for m in arms], env.K, 1)[0])
        modes = [
            Unprobed(env.mu[m], env.resource_pmfs[m]) if m in arms else Excluded()
            for m in range(env.M)
        ]
        return optimal_assignment(modes, env.K, canonical=False)[1]

    def _cached(self, kind: str, probe_set: Collection[int], compute) -> float:
        key = (kind, frozenset(probe_set))
        if key not in self._cache:
            self._cache[key] = compute(key[1])
        return self._cache[key]

    def f_prob(self, probe_set: Collection[int]) -> float:
        return self._cached("prob", probe_set, lambda s: self._expected_value(s, include_unprobed=False))

    def f_unprobed(self, probe_set: Collection[int]) -> float:
        return self._cached(
            "unprobed",
            probe_set,
            lambda s: self._deterministic_value([m for m in range(self.env.M) if m not in s]),
        )

    def f_total(self, probe_set: Collection[int]) -> float:
        return self._cached("total", probe_set, lambda s: self._expected_value(s, include_unprobed=True))

    def R(self, probe_set: Collection[int]) -> float:
        size = len(probe_set)
        if size > self.env.I:
            raise ProbingBudgetError(size, self.env.I)
        scale = 1.0 - self.env.probing_cost(size)
        if scale == 0.0:
            return 0.0
        return scale * self.f_total(probe_set)


def _engine(env: Environment, method: ExpectationMethod) -> ExpectationEngine:
    return ExpectationEngine(env, method)


def f_prob(probe_set: Collection[int], env: Environment, method: ExpectationMethod = Exact()) -> float:
    """Expected value of the best assignment restricted to the probed arms."""
    return _engine(env, method).f_prob(probe_set)


def f_total(probe_set: Collection[int], env: Environment, method: ExpectationMethod = Exact()) -> float:
    """Expected value of the best assignment with the probed arms' draws revealed."""
    return _engine(env, method).f_total(probe_set)


def R_of(probe_set: Collection[int], env: Environment, method: ExpectationMethod = Exact()) -> float:
    """Overhead-scaled objective (1 - alpha(|S|)) * f_total(S); rejects |S| > I."""
    return _engine(env, method).R(probe_set)


# =============================================================================
# GREEDY PROBING
# =============================================================================


def greedy_probe(
    env: Environment,
    method: ExpectationMethod = Exact(),
    engine: Optional[ExpectationEngine] = None,
) -> ProbePlan:
    """
    Grow nested sets S_1 c ... c S_{I-1} by largest f_prob gain (ties to
    the lowest arm), keep the size maximizing (1 - alpha(i)) * f_prob(S_i),
    and fall back to the empty set when that loses to f_unprobed(empty).
    """
    engine = engine or ExpectationEngine(env, method)
    cost = env.probing_cost
    current: frozenset[int] = frozenset()
    stages = [GreedyStage(current, 0.0, 0.0)]

    for _ in range(min(env.I - 1, env.M)):
        best_arm, best_value = None, -math.inf
        for m in range(env.M):
            if m in current:
                continue
            value = engine.f_prob(current | {m})
            if value > best_value + GAIN_TOL:
                best_arm, best_value = m, value
        current = current | {best_arm}
        stages.append(GreedyStage(current, best_value, (1.0 - cost(len(current))) * best_value))

    chosen = stages[0]
    for stage in stages[1:]:
        if stage.scaled > chosen.scaled + GAIN_TOL:
            chosen = stage

    baseline = engine.f_unprobed(frozenset())
    probe_set = chosen.probe_set if chosen.scaled >= baseline else frozenset()
    plan = ProbePlan(probe_set, engine.R(probe_set), method, tuple(stages))
    logger.debug(
        "greedy_probe_selected",
        probe_set=plan.sorted_set,
        value=plan.value,
        f_unprobed_empty=baseline,
    )
    return plan


def exhaustive_optimal_probe(
    env: Environment,
    method: ExpectationMethod = Exact(),
    max_arms: int = DEFAULT_ORACLE_MAX_ARMS,
    engine: Optional[ExpectationEngine] = None,
) -> ProbePlan:
    """
    argmax of R(S) over every S with |S| <= I; ties go to the smaller set,
    then the lexicographically smaller one.
    """
    if env.M > max_arms:
        raise OracleInfeasibleError(env.M, max_arms)
    engine = engine or ExpectationEngine(env, method)
    best_set: frozenset[int] = frozenset()
    best_value = engine.R(best_set)
    for size in range(1, min(env.I, env.M) + 1):
        for combo in itertools.combinations(range(env.M), size):
            value = engine.R(combo)
            if value > best_value + GAIN_TOL:
                best_set, best_value = frozenset(combo), value
    logger.debug("exhaustive_probe_selected", probe_set=sorted(best_set), value=best_value)
    return ProbePlan(best_set, best_value, method)


# =============================================================================
# SCORING
# =============================================================================


class ProbeSetScorer:
    """
    R(S) under a fixed environment with one evaluation method for all sets.

    Exact is used when every set the oracle visits fits the outcome limit;
    otherwise MonteCarlo over a bank drawn from the evaluation seed.
    """

    def __init__(
        self,
        env: Environment,
        prefer_exact: bool = True,
        samples: int = 200,
        evaluation_seed: int = 0,
        max_outcomes: int = DEFAULT_OUTCOME_LIMIT,
        pair_limit: int = DEFAULT_PAIR_LIMIT,
    ):
        self.env = env
        exact = Exact(max_outcomes)
        if prefer_exact and self._exact_feasible(env, exact):
            self.method: ExpectationMethod = exact
        else:
            self.method = MonteCarlo(samples, evaluation_seed)
        self.engine = ExpectationEngine(env, self.method, pair_limit=pair_limit)

    @staticmethod
    def _exact_feasible(env: Environment, method: Exact) -> bool:
        probe = ExpectationEngine(env, method)
        largest = sorted((probe.arm_outcome_count(m) for m in range(env.M)), reverse=True)
        # Size-I sets are scored 0 without enumeration.
        worst = math.prod(largest[: max(0, min(env.I - 1, env.M))])
        return worst <= method.max_outcomes

    def __call__(self, probe_set: Collection[int]) -> float:
        return self.engine.R(probe_set)

    def optimum(self, max_arms: int = DEFAULT_ORACLE_MAX_ARMS) -> ProbePlan:
        return exhaustive_optimal_probe(self.env, self.method, max_arms=max_arms, engine=self.engine)
