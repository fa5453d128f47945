"""
Data models for the PUCS simulator.

Ground-truth environment types (reward distributions, resource PMFs, probing
cost schedule) plus the per-round realization and action profile. All types
are immutable after construction and validated eagerly; downstream code
assumes validity.

Indices are 0-based: arms m in range(M), plays k in range(K). Resource
counts keep their natural support 1..D_max.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Optional, Sequence

import numpy as np

from src.utils.exceptions import ValidationError


PROB_TOL = 1e-9


def _check_probs(probs: Sequence[float], field_name: str) -> None:
    if len(probs) == 0:
        raise ValidationError(f"{field_name} must not be empty", field=field_name)
    arr = np.asarray(probs, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0):
        raise ValidationError(f"{field_name} must be finite and nonnegative", field=field_name, value=probs)
    if abs(float(arr.sum()) - 1.0) > PROB_TOL:
        raise ValidationError(
            f"{field_name} must sum to 1 (got {float(arr.sum())!r})", field=field_name, value=probs
        )


@dataclass(frozen=True)
class DiscreteDistribution:
    """A finite reward distribution on [0, 1]."""

    support: tuple[float, ...]
    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "support", tuple(float(v) for v in self.support))
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        if len(self.support) != len(self.probs):
            raise ValidationError(
                "support and probs must have the same length",
                details={"support": len(self.support), "probs": len(self.probs)},
            )
        _check_probs(self.probs, "probs")
        for v in self.support:
            if not (0.0 <= v <= 1.0):
                raise ValidationError("support values must lie in [0, 1]", field="support", value=self.support)
        if any(b <= a for a, b in zip(self.support, self.support[1:])):
            raise ValidationError("support must be strictly ascending", field="support", value=self.support)

    @classmethod
    def point_mass(cls, value: float) -> DiscreteDistribution:
        return cls((value,), (1.0,))

    @classmethod
    def bernoulli(cls, p: float) -> DiscreteDistribution:
        """Support {0, 1} with P(1) = p."""
        return cls((0.0, 1.0), (1.0 - p, p))

    def mean(self) -> float:
        return float(np.dot(self.support, self.probs))

    def cdf(self, x: float) -> float:
        return float(sum(p for v, p in zip(self.support, self.probs) if v <= x))

    @cached_property
    def _cumulative(self) -> np.ndarray:
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        return cum

    @cached_property
    def _support_array(self) -> np.ndarray:
        return np.asarray(self.support, dtype=float)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray | float:
        """Inverse-CDF sampling."""
        u = rng.random(size)
        idx = np.searchsorted(self._cumulative, u, side="right")
        idx = np.minimum(idx, len(self.support) - 1)
        values = self._support_array[idx]
        return float(values) if size is None else values


@dataclass(frozen=True)
class ResourcePMF:
    """PMF of an arm's resource count over 1..D_max (probs[d-1] = P(D = d))."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "probs", tuple(float(p) for p in self.probs))
        _check_probs(self.probs, "resource_pmf")

    @classmethod
    def point_mass(cls, d: int, d_max: int) -> ResourcePMF:
        if not 1 <= d <= d_max:
            raise ValidationError("resource count outside 1..D_max", field="d", value=d)
        probs = [0.0] * d_max
        probs[d - 1] = 1.0
        return cls(tuple(probs))

    @classmethod
    def uniform(cls, d_max: int) -> ResourcePMF:
        return cls(tuple([1.0 / d_max] * d_max))

    @property
    def d_max(self) -> int:
        return len(self.probs)

    def mean(self) -> float:
        return float(np.dot(np.arange(1, self.d_max + 1), self.probs))

    def survival(self, i: int) -> float:
        """P(D >= i); 1 for i <= 1 and 0 beyond D_max."""
        if i <= 1:
            return 1.0
        if i > self.d_max:
            return 0.0
        return float(min(1.0, sum(self.probs[i - 1 :])))

    def survival_vector(self, length: int) -> np.ndarray:
        """survival(1), ..., survival(length)."""
        tail = np.cumsum(np.asarray(self.probs, dtype=float)[::-1])[::-1]
        out = np.zeros(length, dtype=float)
        n = min(length, self.d_max)
        out[:n] = np.minimum(tail[:n], 1.0)
        if length > 0:
            out[0] = 1.0
        return out

    @cached_property
    def _cumulative(self) -> np.ndarray:
        cum = np.cumsum(self.probs)
        cum[-1] = 1.0
        return cum

    def sample(self, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray | int:
        u = rng.random(size)
        idx = np.minimum(np.searchsorted(self._cumulative, u, side="right"), self.d_max - 1)
        return int(idx) + 1 if size is None else idx.astype(np.int64) + 1


@dataclass(frozen=True)
class ProbingCost:
    """
    Probing overhead schedule: alpha[i] is the fraction of reward lost when
    i arms are probed. I = len(alpha) - 1 is the probing budget.
    """

    alpha: tuple[float, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "alpha", tuple(float(a) for a in self.alpha))
        a = self.alpha
        if len(a) < 2:
            raise ValidationError("alpha needs at least two entries (I >= 1)", field="alpha", value=a)
        if a[0] != 0.0 or a[-1] != 1.0:
            raise ValidationError("alpha must start at 0 and end at 1", field="alpha", value=a)
        if any(not (0.0 <= v <= 1.0) for v in a):
            raise ValidationError("alpha values must lie in [0, 1]", field="alpha", value=a)
        if any(b < x for x, b in zip(a, a[1:])):
            raise ValidationError("alpha must be nondecreasing", field="alpha", value=a)

    @classmethod
    def linear(cls, budget: int) -> ProbingCost:
        """alpha(i) = i / I."""
        if budget < 1:
            raise ValidationError("probing budget must be >= 1", field="I", value=budget)
        return cls(tuple(i / budget for i in range(budget + 1)))

    @property
    def I(self) -> int:  # noqa: E743
        return len(self.alpha) - 1

    def __call__(self, size: int) -> float:
        return self.alpha[size]


@dataclass(frozen=True)
class Environment:
    """
    Ground-truth world: M arms with resource PMFs, an M x K grid of reward
    distributions and the probing cost schedule.
    """

    resource_pmfs: tuple[ResourcePMF, ...]
    reward_dists: tuple[tuple[DiscreteDistribution, ...], ...]
    probing_cost: ProbingCost

    def __post_init__(self) -> None:
        object.__setattr__(self, "resource_pmfs", tuple(self.resource_pmfs))
        object.__setattr__(self, "reward_dists", tuple(tuple(row) for row in self.reward_dists))
        if not self.resource_pmfs:
            raise ValidationError("environment needs at least one arm", field="M")
        if len(self.reward_dists) != len(self.resource_pmfs):
            raise ValidationError(
                "reward_dists must have one row per arm",
                details={"rows": len(self.reward_dists), "M": len(self.resource_pmfs)},
            )
        k = len(self.reward_dists[0])
        if k < 1:
            raise ValidationError("environment needs at least one play", field="K")
        if any(len(row) != k for row in self.reward_dists):
            raise ValidationError("every reward_dists row must have K entries", field="reward_dists")
        d_max = self.resource_pmfs[0].d_max
        if any(p.d_max != d_max for p in self.resource_pmfs):
            raise ValidationError("every resource PMF must span 1..D_max", field="resource_pmfs")

    @property
    def M(self) -> int:
        return len(self.resource_pmfs)

    @property
    def K(self) -> int:
        return len(self.reward_dists[0])

    @property
    def D_max(self) -> int:
        return self.resource_pmfs[0].d_max

    @property
    def I(self) -> int:  # noqa: E743
        return self.probing_cost.I

    @cached_property
    def mu(self) -> np.ndarray:
        """M x K matrix of reward means."""
        out = np.array([[d.mean() for d in row] for row in self.reward_dists], dtype=float)
        out.setflags(write=False)
        return out

    @cached_property
    def survival(self) -> np.ndarray:
        """M x K matrix: survival[m, i] = P(D_m >= i + 1)."""
        out = np.vstack([p.survival_vector(self.K) for p in self.resource_pmfs])
        out.setflags(write=False)
        return out

    @cached_property
    def pmf(self) -> np.ndarray:
        """M x D_max matrix of resource probabilities."""
        out = np.array([p.probs for p in self.resource_pmfs], dtype=float)
        out.setflags(write=False)
        return out


@dataclass(frozen=True, eq=False)
class RoundRealization:
    """Sampled resource counts N (length M) and rewards X (M x K) for one round."""

    N: np.ndarray
    X: np.ndarray

    def __post_init__(self) -> None:
        n = np.array(self.N, dtype=np.int64)
        x = np.array(self.X, dtype=float)
        if n.ndim != 1 or x.ndim != 2 or x.shape[0] != n.shape[0]:
            raise ValidationError(
                "N must be length M and X must be M x K",
                details={"N": list(n.shape), "X": list(x.shape)},
            )
        if np.any(n < 1):
            raise ValidationError("resource counts must be >= 1", field="N", value=n.tolist())
        n.setflags(write=False)
        x.setflags(write=False)
        object.__setattr__(self, "N", n)
        object.__setattr__(self, "X", x)

    def check(self, env: Environment) -> None:
        """Verify every draw lies in the support of the environment's distributions."""
        if self.N.shape[0] != env.M or self.X.shape[1] != env.K:
            raise ValidationError("realization dimensions do not match the environment")
        if np.any(self.N > env.D_max):
            raise ValidationError("resource count above D_max", field="N", value=self.N.tolist())
        for m in range(env.M):
            for k in range(env.K):
                if float(self.X[m, k]) not in env.reward_dists[m][k].support:
                    raise ValidationError(
                        "reward draw outside its distribution's support",
                        details={"arm": m, "play": k, "value": float(self.X[m, k])},
                    )


@dataclass(frozen=True)
class ActionProfile:
    """Disjoint play sets, one per arm: plays[m] is the set of plays pulling arm m."""

    plays: tuple[frozenset[int], ...]
    K: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "plays", tuple(frozenset(int(k) for k in c) for c in self.plays))
        seen: set[int] = set()
        for m, c in enumerate(self.plays):
            for k in c:
                if not 0 <= k < self.K:
                    raise ValidationError(
                        "play index out of range", details={"arm": m, "play": k, "K": self.K}
                    )
                if k in seen:
                    raise ValidationError("play assigned to more than one arm", details={"play": k})
                seen.add(k)

    @classmethod
    def empty(cls, M: int, K: int) -> ActionProfile:
        return cls(tuple(frozenset() for _ in range(M)), K)

    @classmethod
    def from_choices(cls, choices: Iterable[Optional[int]], M: int) -> ActionProfile:
        """Build from a per-play arm choice (None = unassigned)."""
        choices = list(choices)
        sets: list[set[int]] = [set() for _ in range(M)]
        for k, m in enumerate(choices):
            if m is not None:
                if not 0 <= m < M:
                    raise ValidationError("arm index out of range", details={"play": k, "arm": m})
                sets[m].add(k)
        return cls(tuple(frozenset(s) for s in sets), len(choices))

    @property
    def M(self) -> int:
        return len(self.plays)

    def __getitem__(self, m: int) -> frozenset[int]:
        return self.plays[m]

    def arm_of(self, k: int) -> Optional[int]:
        for m, c in enumerate(self.plays):
            if k in c:
                return m
        return None

    def as_lists(self) -> list[list[int]]:
        return [sorted(c) for c in self.plays]
