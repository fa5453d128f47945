"""
Round sampling and the per-arm reward primitives.

    probed_arm_reward    - realized value of an arm whose draws are known
    expected_arm_reward  - expected value of an arm served under its resource PMF
    total_reward         - both combined, scaled by the probing overhead
"""

from __future__ import annotations

from typing import Collection, Sequence

import numpy as np

from src.core.models import ActionProfile, Environment, ResourcePMF, RoundRealization
from src.utils.exceptions import ProbingBudgetError


def sample_round(env: Environment, rng: np.random.Generator) -> RoundRealization:
    """Draw N[m] from each resource PMF and X[m, k] from each reward distribution."""
    n = np.array([pmf.sample(rng) for pmf in env.resource_pmfs], dtype=np.int64)
    x = np.array(
        [[dist.sample(rng) for dist in row] for row in env.reward_dists],
        dtype=float,
    )
    return RoundRealization(n, x)


def served_plays(plays: Collection[int], priority: Sequence[float], units: int) -> list[int]:
    """
    Plays that receive a resource unit: the min(units, |plays|) plays with the
    largest priority value, ties to the lower play index.
    """
    ordered = sorted(plays, key=lambda k: (-float(priority[k]), k))
    return ordered[: max(0, min(int(units), len(ordered)))]


def probed_arm_reward(plays: Collection[int], x: Sequence[float], n: int) -> float:
    """Sum of the min(n, |plays|) largest rewards among the arm's plays."""
    return float(sum(float(x[k]) for k in served_plays(plays, x, n)))


def expected_arm_reward(plays: Collection[int], mu: Sequence[float], pmf: ResourcePMF) -> float:
    """Sum over i of the i-th largest mean times P(D >= i)."""
    if not plays:
        return 0.0
    ordered = np.sort(np.asarray([float(mu[k]) for k in plays]))[::-1]
    return float(np.dot(ordered, pmf.survival_vector(len(ordered))))


def _check_budget(env: Environment, probe_set: Collection[int]) -> None:
    if len(probe_set) > env.I:
        raise ProbingBudgetError(len(probe_set), env.I)


def total_reward(
    env: Environment,
    probe_set: Collection[int],
    profile: ActionProfile,
    realization: RoundRealization,
) -> float:
    """(1 - alpha(|S|)) * (probed arms' realized sums + unprobed arms' expected sums)."""
    _check_budget(env, probe_set)
    probed = set(probe_set)
    total = 0.0
    for m in range(env.M):
        plays = profile[m]
        if not plays:
            continue
        if m in probed:
            total += probed_arm_reward(plays, realization.X[m], int(realization.N[m]))
        else:
            total += expected_arm_reward(plays, env.mu[m], env.resource_pmfs[m])
    return (1.0 - env.probing_cost(len(probed))) * total


def realized_reward(
    env: Environment,
    probe_set: Collection[int],
    profile: ActionProfile,
    realization: RoundRealization,
) -> tuple[float, dict[int, list[int]]]:
    """
    Execute a profile against a realization.

    Probed arms serve their highest realized rewards; unprobed arms serve the
    plays with the highest true means. Returns the overhead-scaled reward and
    the served plays per arm.
    """
    _check_budget(env, probe_set)
    probed = set(probe_set)
    served: dict[int, list[int]] = {}
    total = 0.0
    for m in range(env.M):
        plays = profile[m]
        if not plays:
            continue
        priority = realization.X[m] if m in probed else env.mu[m]
        served[m] = served_plays(plays, priority, int(realization.N[m]))
        total += float(sum(realization.X[m, k] for k in served[m]))
    return (1.0 - env.probing_cost(len(probed))) * total, served
