"""
Taxi-trip ingestion: parse pickup records, bin them into a 0.01-degree grid,
derive per-cell passenger-count PMFs and build a distance-based environment.

Arms are the busiest grid cells; plays are vehicles with fixed positions.
Reward means fall linearly with the grid-coordinate Manhattan distance
between a vehicle and a cell: mu = 1 - d / d_max_pair.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import IO, Mapping, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.core.models import DiscreteDistribution, Environment, ProbingCost, ResourcePMF
from src.utils.exceptions import DataFileError, IngestError, ValidationError
from src.utils.logging import get_logger


DEFAULT_COLUMNS = {
    "lat": "pickup_latitude",
    "lon": "pickup_longitude",
    "passengers": "passenger_count",
}
DEFAULT_CELL_SIZE = 0.01
DEFAULT_D_MAX_CAP = 7
FOUR_LEVELS = (0.1, 0.4, 0.7, 1.0)

logger = get_logger()


class RewardModel(str, Enum):
    """Reward distribution family built from a target mean."""

    BERNOULLI = "bernoulli"
    FOUR_LEVEL = "four_level"


@dataclass(frozen=True)
class TripRecord:
    """One pickup: coordinates in degrees and a positive passenger count."""

    pickup_lat: float
    pickup_lon: float
    passenger_count: int


@dataclass
class ParseResult:
    """Result of parsing a trips CSV."""

    records: list[TripRecord]
    dropped: int

    @property
    def total_rows(self) -> int:
        return len(self.records) + self.dropped


@dataclass(frozen=True)
class GridCell:
    """A grid bin with its passenger-count PMF over 1..D_max."""

    lat_bin: int
    lon_bin: int
    pmf: ResourcePMF
    centroid: tuple[float, float]
    trips: int


@dataclass(frozen=True)
class Vehicle:
    """A play's fixed position."""

    lat: float
    lon: float


# =============================================================================
# PARSING
# =============================================================================


def parse_trips(
    source: Union[str, Path, IO[str]],
    columns: Optional[Mapping[str, str]] = None,
) -> ParseResult:
    """
    Read pickup records from a CSV with a header.

    Rows with non-numeric or non-finite coordinates, or a passenger count
    that is not an integer >= 1, are dropped and counted.

    Raises:
        IngestError: a mapped column is missing (names the column)
        DataFileError: the file cannot be read
    """
    colmap = {**DEFAULT_COLUMNS, **(columns or {})}
    try:
        frame = pd.read_csv(source, dtype=str, keep_default_na=False, skipinitialspace=True)
    except FileNotFoundError as e:
        raise DataFileError(f"Trips file not found: {source}", path=str(source)) from e
    except pd.errors.EmptyDataError as e:
        raise DataFileError(f"Trips file has no header: {source}", path=str(source)) from e
    except (OSError, pd.errors.ParserError) as e:
        raise DataFileError(f"Cannot read trips file {source}: {e}", path=str(source)) from e

    frame.columns = [c.strip() for c in frame.columns]
    for key in ("lat", "lon", "passengers"):
        if colmap[key] not in frame.columns:
            raise IngestError(f"Missing column '{colmap[key]}' in trips CSV", column=colmap[key])

    lat = pd.to_numeric(frame[colmap["lat"]], errors="coerce")
    lon = pd.to_numeric(frame[colmap["lon"]], errors="coerce")
    passengers = pd.to_numeric(frame[colmap["passengers"]], errors="coerce")

    valid = (
        np.isfinite(lat.to_numpy(dtype=float))
        & np.isfinite(lon.to_numpy(dtype=float))
        & np.isfinite(passengers.to_numpy(dtype=float))
    )
    pcount = passengers.to_numpy(dtype=float)
    valid &= np.where(np.isfinite(pcount), pcount >= 1, False)
    valid &= np.where(np.isfinite(pcount), np.floor(pcount) == pcount, False)

    records = [
        TripRecord(float(a), float(b), int(c))
        for a, b, c in zip(lat[valid], lon[valid], passengers[valid])
    ]
    dropped = int(len(frame) - len(records))
    logger.info("trips_parsed", records=len(records), dropped=dropped)
    return ParseResult(records, dropped)


# =============================================================================
# GRID
# =============================================================================


def grid_bin(coord: float, cell_size: float = DEFAULT_CELL_SIZE) -> int:
    """floor(coord / cell_size), robust to representation error at bin edges."""
    return int(math.floor(round(coord / cell_size, 9)))


def build_grid(
    records: Sequence[TripRecord],
    cell_size: float = DEFAULT_CELL_SIZE,
    d_max_cap: int = DEFAULT_D_MAX_CAP,
) -> list[GridCell]:
    """
    Bin records into cells and normalize clamped passenger counts into a PMF
    over 1..d_max_cap. Cells come back sorted by (lat_bin, lon_bin).
    """
    if not records:
        raise IngestError("No trip records to bin")
    if d_max_cap < 1:
        raise ValidationError("d_max_cap must be >= 1", field="d_max_cap", value=d_max_cap)

    frame = pd.DataFrame(
        {
            "lat_bin": [grid_bin(r.pickup_lat, cell_size) for r in records],
            "lon_bin": [grid_bin(r.pickup_lon, cell_size) for r in records],
            "lat": [r.pickup_lat for r in records],
            "lon": [r.pickup_lon for r in records],
            "d": [min(r.passenger_count, d_max_cap) for r in records],
        }
    )
    cells = []
    for (lat_bin, lon_bin), group in frame.groupby(["lat_bin", "lon_bin"], sort=True):
        counts = np.bincount(group["d"].to_numpy(), minlength=d_max_cap + 1)[1:]
        cells.append(
            GridCell(
                lat_bin=int(lat_bin),
                lon_bin=int(lon_bin),
                pmf=ResourcePMF(tuple(counts / counts.sum())),
                centroid=(float(group["lat"].mean()), float(group["lon"].mean())),
                trips=int(len(group)),
            )
        )
    logger.info("grid_built", cells=len(cells), cell_size=cell_size, d_max=d_max_cap)
    return cells


def select_top_cells(cells: Sequence[GridCell], M: int) -> list[GridCell]:
    """Top-M cells by trip count; ties by (lat_bin, lon_bin)."""
    if len(cells) < M:
        raise IngestError(f"Need at least {M} grid cells, found {len(cells)}", details={"cells": len(cells)})
    ranked = sorted(cells, key=lambda c: (-c.trips, c.lat_bin, c.lon_bin))
    return ranked[:M]


def sample_vehicles(
    cells: Sequence[GridCell],
    K: int,
    rng: np.random.Generator,
    cell_size: float = DEFAULT_CELL_SIZE,
) -> list[Vehicle]:
    """K positions uniform over the bounding box of the selected cells."""
    lat_lo = min(c.lat_bin for c in cells) * cell_size
    lat_hi = (max(c.lat_bin for c in cells) + 1) * cell_size
    lon_lo = min(c.lon_bin for c in cells) * cell_size
    lon_hi = (max(c.lon_bin for c in cells) + 1) * cell_size
    lats = rng.uniform(lat_lo, lat_hi, size=K)
    lons = rng.uniform(lon_lo, lon_hi, size=K)
    return [Vehicle(float(a), float(b)) for a, b in zip(lats, lons)]


# =============================================================================
# ENVIRONMENT
# =============================================================================


def four_level_distribution(target: float) -> tuple[DiscreteDistribution, bool]:
    """
    Two-point mix of the levels bracketing the target mean. Targets below
    the lowest level clamp to a point mass there; the flag reports clamping.
    """
    levels = FOUR_LEVELS
    if target <= levels[0]:
        probs = [1.0, 0.0, 0.0, 0.0]
        return DiscreteDistribution(levels, tuple(probs)), target < levels[0]
    if target >= levels[-1]:
        return DiscreteDistribution(levels, (0.0, 0.0, 0.0, 1.0)), False
    upper = next(i for i, v in enumerate(levels) if v >= target)
    lower = upper - 1
    w_up = (target - levels[lower]) / (levels[upper] - levels[lower])
    probs = [0.0] * len(levels)
    probs[lower] = 1.0 - w_up
    probs[upper] = w_up
    return DiscreteDistribution(levels, tuple(probs)), False


def reward_distribution(mean: float, model: RewardModel) -> tuple[DiscreteDistribution, bool]:
    if RewardModel(model) == RewardModel.BERNOULLI:
        return DiscreteDistribution.bernoulli(mean), False
    return four_level_distribution(mean)


def distance_means(cells: Sequence[GridCell], vehicles: Sequence[Vehicle], cell_size: float = DEFAULT_CELL_SIZE) -> np.ndarray:
    """M x K means 1 - d / d_max_pair over grid-coordinate Manhattan distances."""
    dist = np.array(
        [
            [
                abs(c.lat_bin - grid_bin(v.lat, cell_size)) + abs(c.lon_bin - grid_bin(v.lon, cell_size))
                for v in vehicles
            ]
            for c in cells
        ],
        dtype=float,
    )
    d_max_pair = dist.max() if dist.size else 0.0
    if d_max_pair == 0.0:
        return np.ones_like(dist)
    return 1.0 - dist / d_max_pair


def build_environment(
    cells: Sequence[GridCell],
    vehicles: Sequence[Vehicle],
    reward_model: RewardModel,
    probing_cost: ProbingCost,
    cell_size: float = DEFAULT_CELL_SIZE,
) -> Environment:
    """Arms from cells (their PMFs), plays from vehicles, rewards from distances."""
    if not cells:
        raise IngestError("No grid cells to build arms from")
    if not vehicles:
        raise IngestError("No vehicles to build plays from")
    means = distance_means(cells, vehicles, cell_size)
    rows = []
    for m, cell in enumerate(cells):
        row = []
        for k in range(len(vehicles)):
            dist, clamped = reward_distribution(float(means[m, k]), reward_model)
            if clamped:
                logger.warning("four_level_target_clamped", arm=m, play=k, target=float(means[m, k]))
            row.append(dist)
        rows.append(tuple(row))
    return Environment(
        resource_pmfs=tuple(c.pmf for c in cells),
        reward_dists=tuple(rows),
        probing_cost=probing_cost,
    )


@dataclass
class IngestSummary:
    """What an ingest run produced."""

    environment: Environment
    cells: list[GridCell]
    vehicles: list[Vehicle]
    records: int
    dropped: int
    total_cells: int = 0
    metadata: dict = field(default_factory=dict)


def ingest_trips(
    source: Union[str, Path, IO[str]],
    M: int,
    K: int,
    probing_cost: ProbingCost,
    reward_model: RewardModel = RewardModel.BERNOULLI,
    seed: int = 0,
    columns: Optional[Mapping[str, str]] = None,
    cell_size: float = DEFAULT_CELL_SIZE,
    d_max_cap: int = DEFAULT_D_MAX_CAP,
) -> IngestSummary:
    """Parse, bin, select the top-M cells, place K vehicles and build the environment."""
    parsed = parse_trips(source, columns)
    cells = build_grid(parsed.records, cell_size, d_max_cap)
    top = select_top_cells(cells, M)
    vehicles = sample_vehicles(top, K, np.random.default_rng(seed), cell_size)
    env = build_environment(top, vehicles, reward_model, probing_cost, cell_size)
    return IngestSummary(
        environment=env,
        cells=top,
        vehicles=vehicles,
        records=len(parsed.records),
        dropped=parsed.dropped,
        total_cells=len(cells),
        metadata={
            "normalization": "1 - d / d_max_pair (grid Manhattan)",
            "cell_size": cell_size,
            "d_max_cap": d_max_cap,
            "vehicle_seed": seed,
            "reward_model": RewardModel(reward_model).value,
        },
    )
