"""
Synthetic environments.

    random_environment   small random instances for property checks and the
                         offline report
    preset_environment   stand-ins for experiment settings (a)-(d), built on a
                         synthetic pickup grid through the same distance-based
                         path as real trip data
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from src.config.settings import SETTING_PRESETS
from src.core.ingest import (
    DEFAULT_CELL_SIZE,
    GridCell,
    RewardModel,
    build_environment,
    sample_vehicles,
)
from src.core.models import DiscreteDistribution, Environment, ProbingCost, ResourcePMF
from src.utils.exceptions import ValidationError


# (M, K, D_max, reward model)
PRESETS: dict[str, tuple[int, int, int, RewardModel]] = {
    name: (p["M"], p["K"], p["D_max"], RewardModel(p["reward_model"]))
    for name, p in SETTING_PRESETS.items()
}

# Passenger counts in city taxi data are dominated by single riders
PASSENGER_PROFILE = (0.70, 0.14, 0.05, 0.03, 0.04, 0.02, 0.02)

REWARD_GRID = np.round(np.linspace(0.0, 1.0, 11), 2)


def random_alpha(rng: np.random.Generator, budget: int) -> ProbingCost:
    """alpha(0) = 0, alpha(I) = 1, sorted uniform values in between."""
    inner = np.sort(rng.uniform(0.0, 1.0, size=budget - 1)) if budget > 1 else np.array([])
    return ProbingCost(tuple([0.0, *inner.tolist(), 1.0]))


def _arm_outcomes(pmf: ResourcePMF, dists: tuple[DiscreteDistribution, ...]) -> int:
    count = sum(1 for p in pmf.probs if p > 0.0)
    for d in dists:
        count *= sum(1 for p in d.probs if p > 0.0)
    return count


def random_environment(
    rng: np.random.Generator,
    M: int,
    K: int,
    D_max: int,
    max_support: int = 3,
    budget: Optional[int] = None,
    alpha: Optional[ProbingCost] = None,
    max_joint_outcomes: Optional[int] = None,
) -> Environment:
    """
    Random instance: Dirichlet resource PMFs, rewards on a 0.1 grid with up
    to max_support points, random nondecreasing alpha.

    max_joint_outcomes bounds the product of every arm's outcome count, so
    exact expectations over any probing set stay cheap; arms beyond the
    bound fall back to point-mass rewards.
    """
    if M < 1 or K < 1 or D_max < 1 or max_support < 1:
        raise ValidationError("M, K, D_max and max_support must be >= 1")
    budget = budget if budget is not None else int(rng.integers(1, M + 1))
    cost = alpha if alpha is not None else random_alpha(rng, budget)

    pmfs = []
    rows = []
    joint = 1
    for _ in range(M):
        pmf = ResourcePMF(tuple(rng.dirichlet(np.ones(D_max))))
        row = []
        for _ in range(K):
            size = int(rng.integers(1, max_support + 1))
            support = np.sort(rng.choice(REWARD_GRID, size=size, replace=False))
            probs = rng.dirichlet(np.ones(size))
            row.append(DiscreteDistribution(tuple(support.tolist()), tuple(probs.tolist())))
        row = tuple(row)
        count = _arm_outcomes(pmf, row)
        if max_joint_outcomes is not None and joint * count > max_joint_outcomes:
            row = tuple(DiscreteDistribution.point_mass(d.support[-1]) for d in row)
            count = _arm_outcomes(pmf, row)
            if joint * count > max_joint_outcomes:
                pmf = ResourcePMF.point_mass(int(rng.integers(1, D_max + 1)), D_max)
                count = 1
        joint *= count
        pmfs.append(pmf)
        rows.append(row)
    return Environment(tuple(pmfs), tuple(rows), cost)


def passenger_pmf(rng: np.random.Generator, D_max: int, concentration: float = 50.0) -> ResourcePMF:
    """Dirichlet perturbation of the single-rider-heavy passenger profile."""
    base = np.array(PASSENGER_PROFILE[:D_max] + (0.02,) * max(0, D_max - len(PASSENGER_PROFILE)))
    base = base / base.sum()
    probs = rng.dirichlet(base * concentration)
    probs = np.maximum(probs, 0.0)
    return ResourcePMF(tuple(probs / probs.sum()))


def synthetic_cells(rng: np.random.Generator, M: int, D_max: int, span: int = 12) -> list[GridCell]:
    """M distinct cells on a span x span block of 0.01-degree bins."""
    if M > span * span:
        raise ValidationError("grid block too small for M cells", field="M", value=M)
    origin_lat, origin_lon = 4070, -7400
    picks = rng.choice(span * span, size=M, replace=False)
    cells = []
    for rank, p in enumerate(sorted(int(x) for x in picks)):
        lat_bin = origin_lat + p // span
        lon_bin = origin_lon + p % span
        cells.append(
            GridCell(
                lat_bin=lat_bin,
                lon_bin=lon_bin,
                pmf=passenger_pmf(rng, D_max),
                centroid=((lat_bin + 0.5) * DEFAULT_CELL_SIZE, (lon_bin + 0.5) * DEFAULT_CELL_SIZE),
                trips=1000 - rank,
            )
        )
    return cells


def preset_shape(setting: str) -> tuple[int, int, int, RewardModel]:
    """(M, K, D_max, reward model) declared by a setting."""
    try:
        return PRESETS[setting]
    except KeyError as e:
        raise ValidationError(f"unknown setting {setting!r}", field="setting", value=setting) from e


def preset_environment(
    setting: str,
    probing_cost: ProbingCost,
    seed: int = 0,
    M: Optional[int] = None,
    K: Optional[int] = None,
    D_max: Optional[int] = None,
    reward_model: Optional[RewardModel] = None,
) -> Environment:
    """
    Synthetic environment shaped like experiment setting (a), (b), (c) or (d).

    Explicit M, K, D_max or reward_model replace the setting's own values.
    """
    shape = preset_shape(setting)
    M = M if M is not None else shape[0]
    K = K if K is not None else shape[1]
    D_max = D_max if D_max is not None else shape[2]
    model = RewardModel(reward_model) if reward_model is not None else shape[3]
    rng = np.random.default_rng(seed)
    cells = synthetic_cells(rng, M, D_max)
    vehicles = sample_vehicles(cells, K, rng)
    return build_environment(cells, vehicles, model, probing_cost)
