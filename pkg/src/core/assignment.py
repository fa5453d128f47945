"""
Optimal play-to-arm assignment.

Every assignment question reduces to a maximum-weight bipartite matching
between plays and (arm, slot) pairs:

    Probed arm m     min(N_m, K) slots; play k weighs X[m, k] in each
    Unprobed arm m   K slots; play k in slot i weighs mu[m, k] * P(D_m >= i)
    Excluded arm     no slots

After matching, plays inside an unprobed arm are re-ordered by descending
mean (V-monotone repair), which never lowers the value because the slot
discounts are nonincreasing.

For expectations over many realizations, `best_assignment_values` computes
the same optimum from per-arm subset tables with a max-plus subset
convolution, vectorized across samples.
"""

from __future__ import annotations

import math

from dataclasses import dataclass
from functools import lru_cache
from typing import Collection, Optional, Sequence, Union

import numpy as np
from scipy.optimize import linear_sum_assignment

from src.core.models import ActionProfile, Environment, ResourcePMF, RoundRealization
from src.core.rewards import expected_arm_reward, probed_arm_reward
from src.utils.exceptions import ValidationError


MATCH_TOL = 1e-9
# Largest positional tie-break that stays above float rounding of the weights.
_BONUS_DIGITS = 4.5


# =============================================================================
# ARM MODES
# =============================================================================


@dataclass(frozen=True, eq=False)
class Probed:
    """Arm whose resource count N and rewards X are known this round."""

    N: int
    X: np.ndarray

    def __post_init__(self) -> None:
        if int(self.N) < 1:
            raise ValidationError("probed resource count must be >= 1", field="N", value=self.N)
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "X", np.asarray(self.X, dtype=float))


@dataclass(frozen=True, eq=False)
class Unprobed:
    """Arm served in expectation: per-play means and its resource PMF."""

    mu: np.ndarray
    pmf: ResourcePMF

    def __post_init__(self) -> None:
        object.__setattr__(self, "mu", np.asarray(self.mu, dtype=float))


@dataclass(frozen=True)
class Excluded:
    """Arm that may receive no plays."""


ArmMode = Union[Probed, Unprobed, Excluded]


@dataclass(frozen=True)
class Matching:
    """Matched (left, right) edges and their total weight."""

    edges: tuple[tuple[int, int], ...]
    value: float


# =============================================================================
# MATCHING
# =============================================================================


def _best_value(w: np.ndarray) -> float:
    """Optimal total weight when every row may stay unmatched."""
    rows, cols = w.shape
    if rows == 0 or cols == 0:
        return 0.0
    padded = np.hstack([w, np.zeros((rows, rows))])
    r, c = linear_sum_assignment(padded, maximize=True)
    return float(padded[r, c].sum())


def _lexicographic_bonus(n_rows: int, n_cols: int) -> Optional[np.ndarray]:
    """
    Positional tie-break weights, or None when they would drown in rounding.

    Row i taking column j scores (n_cols + 1) ** (n_rows - 1 - i) * (n_cols - j),
    so among equal-weight matchings the maximum bonus is the one whose column
    vector (unmatched counted as n_cols) is lexicographically smallest.
    """
    base = n_cols + 1
    if n_rows * math.log10(base) > _BONUS_DIGITS:
        return None
    place = base ** np.arange(n_rows - 1, -1, -1, dtype=float)
    return place[:, None] * (n_cols - np.arange(n_cols, dtype=float))[None, :]


def max_weight_matching(weights: np.ndarray, canonical: bool = True) -> Matching:
    """
    Maximum-weight bipartite matching; vertices may stay unmatched.

    Rows are padded with zero-weight "unmatched" columns so a row is only
    matched when its edge does not lower the total. With canonical=True the
    lexicographically smallest optimal edge list is returned: rows are
    fixed in order, each to the smallest column that keeps the optimum.
    The tie-break rides on a single solve over perturbed weights; shapes too
    large for the perturbation fall back to fixing rows one at a time.
    """
    w = np.asarray(weights, dtype=float)
    if w.ndim != 2:
        raise ValidationError("weights must be a 2-D matrix", field="weights")
    if not np.all(np.isfinite(w)):
        raise ValidationError("weights must be finite", field="weights")
    n_rows, n_cols = w.shape
    if n_rows == 0 or n_cols == 0:
        return Matching((), 0.0)

    bonus = _lexicographic_bonus(n_rows, n_cols) if canonical else np.zeros_like(w)
    if bonus is None:
        return _row_by_row_matching(w)

    scale = max(1.0, n_rows * float(np.abs(w).max()))
    step = MATCH_TOL * scale / float(bonus.max() + 1.0) if canonical else 0.0
    padded = np.hstack([w + step * bonus, np.zeros((n_rows, n_rows))])
    r, c = linear_sum_assignment(padded, maximize=True)
    edges = tuple(sorted((int(i), int(j)) for i, j in zip(r, c) if j < n_cols))
    return Matching(edges, float(sum(w[i, j] for i, j in edges)))


def _row_by_row_matching(w: np.ndarray) -> Matching:
    """Canonical matching by fixing each row to its smallest optimum-keeping column."""
    n_rows, n_cols = w.shape
    edges: list[tuple[int, int]] = []
    free_cols = list(range(n_cols))
    remaining = _best_value(w)
    for i in range(n_rows):
        rest_rows = list(range(i + 1, n_rows))
        tol = MATCH_TOL * max(1.0, abs(remaining))
        chosen: Optional[int] = None
        for c in free_cols:
            others = [x for x in free_cols if x != c]
            rest = _best_value(w[np.ix_(rest_rows, others)]) if rest_rows and others else 0.0
            if w[i, c] + rest >= remaining - tol:
                chosen = c
                remaining = rest
                break
        if chosen is None:
            remaining = (
                _best_value(w[np.ix_(rest_rows, free_cols)]) if rest_rows and free_cols else 0.0
            )
            continue
        edges.append((i, chosen))
        free_cols.remove(chosen)

    return Matching(tuple(edges), float(sum(w[i, j] for i, j in edges)))


# =============================================================================
# SLOT REDUCTION
# =============================================================================


def _survival(pmf: ResourcePMF, K: int) -> np.ndarray:
    return pmf.survival_vector(K)


def slot_matching(
    modes: Sequence[ArmMode], K: int, canonical: bool = True
) -> tuple[Matching, list[tuple[int, int]]]:
    """
    Build the plays x (arm, slot) weight matrix and match it.

    Returns the matching and the column labels as (arm, slot) pairs.
    """
    columns: list[tuple[int, int]] = []
    blocks: list[np.ndarray] = []
    for m, mode in enumerate(modes):
        if isinstance(mode, Probed):
            if mode.X.shape != (K,):
                raise ValidationError("probed reward vector must have length K", details={"arm": m})
            slots = min(mode.N, K)
            blocks.append(np.repeat(mode.X.reshape(K, 1), slots, axis=1))
            columns.extend((m, i) for i in range(slots))
        elif isinstance(mode, Unprobed):
            if mode.mu.shape != (K,):
                raise ValidationError("mean vector must have length K", details={"arm": m})
            blocks.append(np.outer(mode.mu, _survival(mode.pmf, K)))
            columns.extend((m, i) for i in range(K))
    if not blocks:
        return Matching((), 0.0), columns
    return max_weight_matching(np.hstack(blocks), canonical=canonical), columns


def profile_value(modes: Sequence[ArmMode], profile: ActionProfile) -> float:
    """Objective of a profile: probed sums plus expected unprobed sums."""
    total = 0.0
    for m, mode in enumerate(modes):
        plays = profile[m]
        if not plays:
            continue
        if isinstance(mode, Probed):
            total += probed_arm_reward(plays, mode.X, mode.N)
        elif isinstance(mode, Unprobed):
            total += expected_arm_reward(plays, mode.mu, mode.pmf)
        else:
            raise ValidationError("excluded arm received plays", details={"arm": m})
    return total


def optimal_assignment(
    modes: Sequence[ArmMode], K: int, canonical: bool = True
) -> tuple[ActionProfile, float]:
    """
    Profile maximizing the probed plus expected-unprobed objective over
    disjoint play sets; excluded arms receive nothing.
    """
    matching, columns = slot_matching(modes, K, canonical=canonical)
    sets: list[set[int]] = [set() for _ in modes]
    for play, col in matching.edges:
        arm, _slot = columns[col]
        sets[arm].add(play)
    profile = ActionProfile(tuple(frozenset(s) for s in sets), K)
    # V-monotone repair: the per-arm objective sorts means descending, so
    # the profile value is the repaired value.
    return profile, profile_value(modes, profile)


def probed_modes(
    probe_set: Collection[int], realization: RoundRealization, others: str, env: Optional[Environment] = None
) -> list[ArmMode]:
    """Probed arms from the realization; the rest Excluded or Unprobed from env."""
    probed = set(probe_set)
    modes: list[ArmMode] = []
    for m in range(realization.N.shape[0]):
        if m in probed:
            modes.append(Probed(int(realization.N[m]), realization.X[m]))
        elif others == "unprobed" and env is not None:
            modes.append(Unprobed(env.mu[m], env.resource_pmfs[m]))
        else:
            modes.append(Excluded())
    return modes


def h_prob(probe_set: Collection[int], realization: RoundRealization, K: int) -> float:
    """Optimal value when plays may only select probed arms."""
    if not probe_set:
        return 0.0
    return optimal_assignment(probed_modes(probe_set, realization, "excluded"), K)[1]


def h_total(
    probe_set: Collection[int], realization: RoundRealization, env: Environment
) -> tuple[ActionProfile, float]:
    """Optimal profile with probed arms realized and the rest in expectation."""
    return optimal_assignment(probed_modes(probe_set, realization, "unprobed", env), env.K)


def f_unprobed(probe_set: Collection[int], env: Environment) -> float:
    """Optimal expected value when plays may only select arms outside the set."""
    excluded = set(probe_set)
    modes: list[ArmMode] = [
        Excluded() if m in excluded else Unprobed(env.mu[m], env.resource_pmfs[m])
        for m in range(env.M)
    ]
    return optimal_assignment(modes, env.K)[1]


# =============================================================================
# BATCHED VALUES
# =============================================================================


@lru_cache(maxsize=16)
def _subset_structure(K: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, tuple[np.ndarray, ...]]:
    """
    (set, subset) pairs sorted by set, the group starts for reduceat, and
    the plays of every mask.
    """
    rest, sub, starts = [], [], []
    for mask in range(1 << K):
        starts.append(len(sub))
        s = mask
        while True:
            rest.append(mask ^ s)
            sub.append(s)
            if s == 0:
                break
            s = (s - 1) & mask
    plays = tuple(np.array([k for k in range(K) if mask >> k & 1], dtype=np.int64) for mask in range(1 << K))
    return np.array(rest), np.array(sub), np.array(starts), plays


def subset_pair_count(K: int) -> int:
    return 3**K


def probed_subset_table(N: np.ndarray, X: np.ndarray) -> np.ndarray:
    """
    Value of serving every play subset from a probed arm, per sample.

    N: (W,) resource counts, X: (W, K) rewards -> (W, 2^K).
    """
    N = np.asarray(N, dtype=np.int64)
    X = np.asarray(X, dtype=float)
    W, K = X.shape
    _, _, _, plays = _subset_structure(K)
    table = np.zeros((W, 1 << K))
    rows = np.arange(W)
    for mask in range(1, 1 << K):
        p = plays[mask]
        ordered = -np.sort(-X[:, p], axis=1)
        cum = np.concatenate([np.zeros((W, 1)), np.cumsum(ordered, axis=1)], axis=1)
        table[:, mask] = cum[rows, np.minimum(N, len(p))]
    return table


def unprobed_subset_table(mu: np.ndarray, survival: np.ndarray) -> np.ndarray:
    """Expected value of every play subset on an unprobed arm -> (2^K,)."""
    mu = np.asarray(mu, dtype=float)
    K = mu.shape[0]
    _, _, _, plays = _subset_structure(K)
    table = np.zeros(1 << K)
    for mask in range(1, 1 << K):
        ordered = np.sort(mu[plays[mask]])[::-1]
        table[mask] = float(np.dot(ordered, survival[: len(ordered)]))
    return table


def best_assignment_values(tables: Sequence[np.ndarray], K: int, samples: int) -> np.ndarray:
    """
    Optimal assignment value per sample from per-arm subset tables.

    Each table is (samples, 2^K) or (2^K,) for sample-independent arms.
    best[mask] holds the best value of giving exactly the plays in mask to
    the arms seen so far; each arm extends it by max over subsets.
    """
    rest, sub, starts, _ = _subset_structure(K)
    n_masks = 1 << K
    if not tables:
        return np.zeros(samples)
    chunk = max(1, 2_000_000 // len(sub))
    out = np.empty(samples)
    for lo in range(0, samples, chunk):
        hi = min(samples, lo + chunk)
        best = np.full((hi - lo, n_masks), -np.inf)
        best[:, 0] = 0.0
        for table in tables:
            t = table[lo:hi] if table.ndim == 2 else np.broadcast_to(table, (hi - lo, n_masks))
            cand = best[:, rest] + t[:, sub]
            best = np.maximum.reduceat(cand, starts, axis=1)
        out[lo:hi] = best.max(axis=1)
    return out
