"""
Online estimators: empirical resource PMFs, per-(arm, play) reward
histograms and means, and confidence radii.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Optional

import numpy as np

from src.core.models import DiscreteDistribution, Environment, ProbingCost, ResourcePMF
from src.utils.exceptions import ValidationError


def confidence_radius(n: int, delta: float) -> float:
    """sqrt((1 + n) * ln(sqrt(n + 1) / delta) / (2 n^2)); infinite when n = 0."""
    if not 0.0 < delta < 1.0:
        raise ValidationError("delta must lie in (0, 1)", field="delta", value=delta)
    if n < 0:
        raise ValidationError("count must be >= 0", field="n", value=n)
    if n == 0:
        return math.inf
    return math.sqrt((1 + n) * math.log(math.sqrt(n + 1) / delta) / (2 * n * n))


@dataclass(frozen=True)
class ArmObservation:
    """What was seen on one arm: its resource count (if observed) and per-play rewards."""

    arm: int
    resources: Optional[int]
    rewards: Mapping[int, float] = field(default_factory=dict)


@dataclass(frozen=True, eq=False)
class Estimators:
    """
    Estimator state. Treated as immutable: update_estimates returns a copy.

    Attributes:
        resource_counts: M x D_max observed resource-count frequencies
        arm_obs: per-arm number of resource observations
        n: M x K reward observation counts
        reward_sums: M x K running sums of observed rewards
        histograms: (m, k) -> {reward value: count}
        delta: confidence parameter
        sentinel: finite radius standing in for +inf
    """

    resource_counts: np.ndarray
    arm_obs: np.ndarray
    n: np.ndarray
    reward_sums: np.ndarray
    histograms: Mapping[tuple[int, int], Mapping[float, int]]
    delta: float
    sentinel: float

    @classmethod
    def empty(cls, M: int, K: int, D_max: int, delta: float = 0.05, sentinel: Optional[float] = None) -> Estimators:
        if not 0.0 < delta < 1.0:
            raise ValidationError("delta must lie in (0, 1)", field="delta", value=delta)
        return cls(
            resource_counts=np.zeros((M, D_max), dtype=np.int64),
            arm_obs=np.zeros(M, dtype=np.int64),
            n=np.zeros((M, K), dtype=np.int64),
            reward_sums=np.zeros((M, K)),
            histograms={},
            delta=delta,
            sentinel=float(sentinel if sentinel is not None else 10.0 * K),
        )

    @property
    def M(self) -> int:
        return self.n.shape[0]

    @property
    def K(self) -> int:
        return self.n.shape[1]

    @property
    def D_max(self) -> int:
        return self.resource_counts.shape[1]

    @property
    def observed_arms(self) -> np.ndarray:
        return self.arm_obs > 0

    @property
    def p_hat(self) -> np.ndarray:
        """Per-arm empirical PMF; uniform over 1..D_max until the arm is observed."""
        out = np.full((self.M, self.D_max), 1.0 / self.D_max)
        seen = self.observed_arms
        out[seen] = self.resource_counts[seen] / self.arm_obs[seen, None]
        return out

    @property
    def mu_hat(self) -> np.ndarray:
        out = np.zeros((self.M, self.K))
        seen = self.n > 0
        out[seen] = self.reward_sums[seen] / self.n[seen]
        return out

    @property
    def epsilon(self) -> np.ndarray:
        """Confidence radii, with the sentinel where nothing was observed."""
        out = np.full((self.M, self.K), self.sentinel)
        for (m, k), count in np.ndenumerate(self.n):
            if count > 0:
                out[m, k] = confidence_radius(int(count), self.delta)
        return out

    def ucb(self, clamp: bool = False) -> np.ndarray:
        values = self.mu_hat + self.epsilon
        return np.minimum(values, 1.0) if clamp else values

    def F_hat(self, m: int, k: int) -> DiscreteDistribution:
        """Empirical reward distribution; point mass at 1.0 before any observation."""
        hist = self.histograms.get((m, k))
        if not hist:
            return DiscreteDistribution.point_mass(1.0)
        support = sorted(hist)
        total = sum(hist.values())
        return DiscreteDistribution(tuple(support), tuple(hist[v] / total for v in support))

    def resource_pmf(self, m: int) -> ResourcePMF:
        row = self.p_hat[m]
        return ResourcePMF(tuple(row / row.sum()))

    def belief_environment(self, probing_cost: ProbingCost) -> Environment:
        """Environment built from (p_hat, F_hat), the input of greedy probing online."""
        return Environment(
            resource_pmfs=tuple(self.resource_pmf(m) for m in range(self.M)),
            reward_dists=tuple(
                tuple(self.F_hat(m, k) for k in range(self.K)) for m in range(self.M)
            ),
            probing_cost=probing_cost,
        )


def update_estimates(est: Estimators, observations: Iterable[ArmObservation]) -> Estimators:
    """
    Fold observations into a copy of the estimator state.

    A resource count updates the arm's PMF over its own observation count;
    each reward updates the (arm, play) count, sum and histogram.
    """
    resource_counts = est.resource_counts.copy()
    arm_obs = est.arm_obs.copy()
    n = est.n.copy()
    sums = est.reward_sums.copy()
    histograms = {key: dict(hist) for key, hist in est.histograms.items()}

    for obs in observations:
        m = obs.arm
        if not 0 <= m < est.M:
            raise ValidationError("arm index out of range", field="arm", value=m)
        if obs.resources is not None:
            d = int(obs.resources)
            if not 1 <= d <= est.D_max:
                raise ValidationError("resource count outside 1..D_max", field="resources", value=d)
            resource_counts[m, d - 1] += 1
            arm_obs[m] += 1
        for k, x in obs.rewards.items():
            x = float(x)
            if not 0.0 <= x <= 1.0:
                raise ValidationError("reward outside [0, 1]", field="rewards", value=x)
            n[m, k] += 1
            sums[m, k] += x
            hist = histograms.setdefault((m, int(k)), {})
            hist[x] = hist.get(x, 0) + 1

    return replace(
        est,
        resource_counts=resource_counts,
        arm_obs=arm_obs,
        n=n,
        reward_sums=sums,
        histograms=histograms,
    )
