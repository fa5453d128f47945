"""
Online policies: OLPA and the three baselines.

Every policy shares one round loop (BasePolicy.run):

    1. draw the round's realization
    2. choose a probing set and observe the probed arms
    3. choose an action profile
    4. execute it, observe served plays and the resource counts of used arms

Policies differ only in steps 2 and 3:

    olpa        greedy probing on estimates, UCB-optimistic optimal assignment
    nonprobing  never probes, UCB-optimistic optimal assignment
    rr          random probing set, random assignment
    gr          greedy probing on estimates, random assignment

Random streams are split from one seed: the environment stream is shared
by all policies run with that seed, so they face identical realizations.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, ClassVar, Optional

import numpy as np

from src.core.assignment import ArmMode, Probed, Unprobed, optimal_assignment
from src.core.estimators import ArmObservation, Estimators, update_estimates
from src.core.models import ActionProfile, Environment, ResourcePMF, RoundRealization
from src.core.probing import (
    DEFAULT_PAIR_LIMIT,
    ExpectationEngine,
    MonteCarlo,
    ProbeSetScorer,
    greedy_probe,
)
from src.core.rewards import realized_reward, sample_round, total_reward
from src.utils.exceptions import ValidationError
from src.utils.logging import get_logger


@dataclass(frozen=True)
class PolicySettings:
    """
    Knobs shared by every policy.

    Attributes:
        delta: confidence parameter of the UCB radius
        W: Monte Carlo samples per greedy f_prob evaluation
        infinity_factor: sentinel radius = infinity_factor * K
        clamp_ucb: clamp UCB means to 1.0
        pair_limit: largest 3^K handled by the batched assignment evaluator
    """

    delta: float = 0.05
    W: int = 200
    infinity_factor: float = 10.0
    clamp_ucb: bool = False
    pair_limit: int = DEFAULT_PAIR_LIMIT


@dataclass(frozen=True)
class RoundLog:
    """
    One executed round.

    Attributes:
        t: round number, starting at 1
        probe_set: arms probed
        profile: executed action profile
        realized_reward: overhead-scaled sum of the served plays' rewards
        score: R(probe_set) under the true environment (nan when unscored)
        decision_value: expected value of the executed decision given the
            probed draws, under the true environment
        observations: observations folded into the estimators this round
    """

    t: int
    probe_set: frozenset[int]
    profile: ActionProfile
    realized_reward: float
    score: float
    decision_value: float
    observations: tuple[ArmObservation, ...]


@dataclass
class RandomStreams:
    """Independent generators split from one run seed."""

    environment: np.random.Generator
    policy: np.random.Generator
    estimation: np.random.Generator

    @classmethod
    def from_seed(cls, seed: int) -> RandomStreams:
        env_seq, policy_seq, est_seq = np.random.SeedSequence(seed).spawn(3)
        return cls(
            np.random.default_rng(env_seq),
            np.random.default_rng(policy_seq),
            np.random.default_rng(est_seq),
        )


Scorer = Callable[[frozenset[int]], float]


class BasePolicy(ABC):
    """
    Round loop shared by all policies.

    Subclasses implement choose_probe_set and choose_assignment.
    """

    name: ClassVar[str] = "base"

    def __init__(self, env: Environment, settings: Optional[PolicySettings] = None):
        self.env = env
        self.settings = settings or PolicySettings()
        self._log = get_logger().bind(policy=self.name)

    @abstractmethod
    def choose_probe_set(self, est: Estimators, streams: RandomStreams) -> frozenset[int]:
        """Pick the arms to probe before any assignment."""

    @abstractmethod
    def choose_assignment(
        self,
        est: Estimators,
        probe_set: frozenset[int],
        realization: RoundRealization,
        streams: RandomStreams,
    ) -> ActionProfile:
        """Pick the action profile once probed arms are observed."""

    # ------------------------------------------------------------------
    # Shared building blocks
    # ------------------------------------------------------------------

    def greedy_probe_set(self, est: Estimators, streams: RandomStreams) -> frozenset[int]:
        belief = est.belief_environment(self.env.probing_cost)
        seed = int(streams.estimation.integers(0, 2**63 - 1))
        method = MonteCarlo(self.settings.W, seed)
        engine = ExpectationEngine(belief, method, pair_limit=self.settings.pair_limit)
        return greedy_probe(belief, method, engine=engine).probe_set

    def ucb_assignment(
        self, est: Estimators, probe_set: frozenset[int], realization: RoundRealization
    ) -> ActionProfile:
        ucb = est.ucb(clamp=self.settings.clamp_ucb)
        p_hat = est.p_hat
        modes: list[ArmMode] = []
        for m in range(self.env.M):
            if m in probe_set:
                modes.append(Probed(int(realization.N[m]), realization.X[m]))
            else:
                modes.append(Unprobed(ucb[m], ResourcePMF(tuple(p_hat[m] / p_hat[m].sum()))))
        return optimal_assignment(modes, self.env.K)[0]

    def random_assignment(self, streams: RandomStreams) -> ActionProfile:
        """Each play picks one of the M arms or stays unassigned, uniformly."""
        M = self.env.M
        picks = streams.policy.integers(0, M + 1, size=self.env.K)
        return ActionProfile.from_choices((int(p) if p < M else None for p in picks), M)

    # ------------------------------------------------------------------
    # Round loop
    # ------------------------------------------------------------------

    def run(self, horizon: int, seed: int, scorer: Optional[Scorer] = None) -> list[RoundLog]:
        if horizon < 0:
            raise ValidationError("horizon must be >= 0", field="T", value=horizon)
        env = self.env
        streams = RandomStreams.from_seed(seed)
        est = Estimators.empty(
            env.M,
            env.K,
            env.D_max,
            delta=self.settings.delta,
            sentinel=self.settings.infinity_factor * env.K,
        )
        log = self._log.bind(seed=seed)
        log.info("run_started", horizon=horizon)

        logs: list[RoundLog] = []
        for t in range(1, horizon + 1):
            realization = sample_round(env, streams.environment)

            probe_set = frozenset(self.choose_probe_set(est, streams))
            if len(probe_set) > max(0, env.I - 1):
                raise ValidationError(
                    "policy probed more than I-1 arms", details={"t": t, "size": len(probe_set)}
                )
            probe_obs = [
                ArmObservation(
                    m,
                    int(realization.N[m]),
                    {k: float(realization.X[m, k]) for k in range(env.K)},
                )
                for m in sorted(probe_set)
            ]
            est = update_estimates(est, probe_obs)

            profile = self.choose_assignment(est, probe_set, realization, streams)
            reward, served = realized_reward(env, probe_set, profile, realization)
            assign_obs = [
                ArmObservation(
                    m,
                    int(realization.N[m]),
                    {k: float(realization.X[m, k]) for k in plays},
                )
                for m, plays in sorted(served.items())
                if m not in probe_set
            ]
            est = update_estimates(est, assign_obs)

            score = scorer(probe_set) if scorer is not None else float("nan")
            logs.append(
                RoundLog(
                    t=t,
                    probe_set=probe_set,
                    profile=profile,
                    realized_reward=reward,
                    score=score,
                    decision_value=total_reward(env, probe_set, profile, realization),
                    observations=tuple(probe_obs + assign_obs),
                )
            )
            log.debug(
                "round_completed",
                t=t,
                probe_set=sorted(probe_set),
                profile=profile.as_lists(),
                realized_reward=reward,
            )

        log.info("run_finished", horizon=horizon)
        return logs


class OLPAPolicy(BasePolicy):
    """Greedy probing on estimates, then UCB-optimistic optimal assignment."""

    name = "olpa"

    def choose_probe_set(self, est, streams):
        return self.greedy_probe_set(est, streams)

    def choose_assignment(self, est, probe_set, realization, streams):
        return self.ucb_assignment(est, probe_set, realization)


class NonProbingPolicy(BasePolicy):
    """OLPA with probing disabled."""

    name = "nonprobing"

    def choose_probe_set(self, est, streams):
        return frozenset()

    def choose_assignment(self, est, probe_set, realization, streams):
        return self.ucb_assignment(est, probe_set, realization)


class RandomProbingRandomAssignment(BasePolicy):
    """Probe-set size uniform on 0..I-1, a uniform set of that size, random assignment."""

    name = "rr"

    def choose_probe_set(self, est, streams):
        size = min(int(streams.policy.integers(0, max(1, self.env.I))), self.env.M)
        if size == 0:
            return frozenset()
        return frozenset(int(m) for m in streams.policy.choice(self.env.M, size=size, replace=False))

    def choose_assignment(self, est, probe_set, realization, streams):
        return self.random_assignment(streams)


class GreedyProbingRandomAssignment(BasePolicy):
    """Greedy probing as OLPA, then random assignment."""

    name = "gr"

    def choose_probe_set(self, est, streams):
        return self.greedy_probe_set(est, streams)

    def choose_assignment(self, est, probe_set, realization, streams):
        return self.random_assignment(streams)


POLICIES: dict[str, type[BasePolicy]] = {
    cls.name: cls
    for cls in (
        OLPAPolicy,
        NonProbingPolicy,
        RandomProbingRandomAssignment,
        GreedyProbingRandomAssignment,
    )
}


def make_policy(name: str, env: Environment, settings: Optional[PolicySettings] = None) -> BasePolicy:
    try:
        return POLICIES[name.lower()](env, settings)
    except KeyError as e:
        raise ValidationError(f"unknown policy {name!r}", field="policy", value=name) from e


def olpa_run(
    env: Environment,
    horizon: int,
    delta: float = 0.05,
    W: int = 200,
    seed: int = 0,
    scorer: Optional[Scorer] = None,
) -> list[RoundLog]:
    """Run OLPA for `horizon` rounds; rounds are scored by R(S_t) under env."""
    scorer = scorer or ProbeSetScorer(env)
    return OLPAPolicy(env, PolicySettings(delta=delta, W=W)).run(horizon, seed, scorer)


def run_baseline(
    policy: str,
    env: Environment,
    horizon: int,
    delta: float = 0.05,
    W: int = 200,
    seed: int = 0,
    scorer: Optional[Scorer] = None,
) -> list[RoundLog]:
    """Run one of nonprobing, rr, gr."""
    if policy.lower() not in ("nonprobing", "rr", "gr"):
        raise ValidationError(f"{policy!r} is not a baseline", field="policy", value=policy)
    scorer = scorer or ProbeSetScorer(env)
    return make_policy(policy, env, PolicySettings(delta=delta, W=W)).run(horizon, seed, scorer)
