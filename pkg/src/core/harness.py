"""
Experiment harness: zeta-approximation regret and multi-seed orchestration.

Each (algorithm, seed) cell runs independently, possibly in a worker
process; results are merged in configuration order so the CSV is identical
whatever the degree of parallelism.
"""

from __future__ import annotations

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from src.config.settings import (
    AppConfig,
    EnvironmentSource,
    ExpectationMode,
    ExperimentConfig,
    ScoringMode,
    get_config,
)
from src.core.env_store import environment_to_dict, load_environment
from src.core.exports import RegretExporter
from src.core.ingest import RewardModel, ingest_trips
from src.core.models import Environment, ProbingCost
from src.core.policies import PolicySettings, make_policy
from src.core.probing import ProbePlan, ProbeSetScorer
from src.core.synthetic import preset_environment, random_environment
from src.utils.logging import get_logger, setup_logging


ZETA = (math.e - 1.0) / (2.0 * math.e - 1.0)

logger = get_logger()


@dataclass(frozen=True)
class RegretTrace:
    """Per-round scores and zeta-regret of one (algorithm, seed) run."""

    algo: str
    seed: int
    round_scores: tuple[float, ...]
    optimal: float
    round_regret: tuple[float, ...]
    cumulative: tuple[float, ...]
    fingerprint: str = ""
    zeta: float = ZETA

    @property
    def total(self) -> float:
        return self.cumulative[-1] if self.cumulative else 0.0

    @property
    def cumulative_gap(self) -> tuple[float, ...]:
        """Running sum of R(S*) - score, the unscaled shortfall against the optimum."""
        gaps = [self.optimal - s for s in self.round_scores]
        return tuple(float(x) for x in np.cumsum(gaps)) if gaps else ()


def zeta_regret(
    round_scores: Sequence[float],
    optimal: float,
    zeta: float = ZETA,
    algo: str = "",
    seed: int = 0,
    fingerprint: str = "",
) -> RegretTrace:
    """Per-round zeta * R(S*) - R(S_t) and its running sum; negative values allowed."""
    scores = tuple(float(s) for s in round_scores)
    regret = tuple(zeta * optimal - s for s in scores)
    cumulative = tuple(float(x) for x in np.cumsum(regret)) if regret else ()
    return RegretTrace(algo, seed, scores, float(optimal), regret, cumulative, fingerprint, zeta)


@dataclass
class ExperimentResult:
    """Artifacts and traces of run_experiment."""

    traces: list[RegretTrace]
    optimal: ProbePlan
    summary: dict[str, dict[int, float]]
    csv_path: Optional[Path] = None
    summary_path: Optional[Path] = None
    manifest_path: Optional[Path] = None
    metadata: dict = field(default_factory=dict)


# =============================================================================
# ENVIRONMENT RESOLUTION
# =============================================================================


def build_experiment_environment(config: ExperimentConfig) -> tuple[Environment, dict]:
    """Environment plus provenance metadata for a resolved config."""
    cost = ProbingCost(tuple(config.alpha_table()))
    if config.source == EnvironmentSource.FILE:
        env = load_environment(Path(config.env_path))
        return env, {"source": "file", "env_path": config.env_path}
    if config.source == EnvironmentSource.DATASET:
        summary = ingest_trips(
            config.dataset_path,
            M=config.M,
            K=config.K,
            probing_cost=cost,
            reward_model=RewardModel(config.reward_model),
            seed=config.env_seed,
            columns=config.columns,
            d_max_cap=config.D_max,
        )
        return summary.environment, {"source": "dataset", **summary.metadata}
    if config.setting:
        env = preset_environment(
            config.setting,
            cost,
            seed=config.env_seed,
            M=config.M,
            K=config.K,
            D_max=config.D_max,
            reward_model=RewardModel(config.reward_model),
        )
        return env, {"source": "synthetic", "setting": config.setting, "env_seed": config.env_seed}
    env = random_environment(
        np.random.default_rng(config.env_seed), config.M, config.K, config.D_max, alpha=cost
    )
    return env, {"source": "synthetic", "setting": None, "env_seed": config.env_seed}


# =============================================================================
# CELLS
# =============================================================================


@dataclass(frozen=True)
class _Cell:
    algo: str
    seed: int
    env: Environment
    horizon: int
    settings: PolicySettings
    scoring: str
    prefer_exact: bool
    samples: int
    evaluation_seed: int
    max_outcomes: int
    optimal: float
    fingerprint: str


def _run_cell(cell: _Cell) -> RegretTrace:
    scorer = ProbeSetScorer(
        cell.env,
        prefer_exact=cell.prefer_exact,
        samples=cell.samples,
        evaluation_seed=cell.evaluation_seed,
        max_outcomes=cell.max_outcomes,
        pair_limit=cell.settings.pair_limit,
    )
    policy = make_policy(cell.algo, cell.env, cell.settings)
    logs = policy.run(cell.horizon, cell.seed, scorer)
    if cell.scoring == ScoringMode.DECISION.value:
        scores = [log.decision_value for log in logs]
    else:
        scores = [log.score for log in logs]
    return zeta_regret(scores, cell.optimal, ZETA, cell.algo, cell.seed, cell.fingerprint)


def _init_worker(environment: str, level: str, fmt: str) -> None:
    setup_logging(environment=environment, log_level=level, json_output=_json_flag(fmt))


def _json_flag(fmt: str) -> Optional[bool]:
    return {"json": True, "console": False}.get(fmt)


def _worker_count(jobs: Optional[int], cells: int) -> int:
    if not jobs:
        jobs = os.cpu_count() or 1
    return max(1, min(jobs, cells))


# =============================================================================
# EXPERIMENT
# =============================================================================


def run_experiment(
    config: ExperimentConfig,
    app: Optional[AppConfig] = None,
    write: bool = True,
) -> ExperimentResult:
    """
    Run every (algorithm, seed) cell for T rounds and score each round
    against the exhaustive optimum R(S*) of the true environment.

    Writes regret.csv, summary.md and manifest.json into config.out.
    """
    app = app or get_config()
    config = config.resolved(app)
    fingerprint = config.fingerprint()
    log = logger.bind(fingerprint=fingerprint[:12])

    env, env_meta = build_experiment_environment(config)
    prefer_exact = config.method == ExpectationMode.EXACT
    scorer = ProbeSetScorer(
        env,
        prefer_exact=prefer_exact,
        samples=config.W,
        evaluation_seed=app.simulation.evaluation_seed,
        max_outcomes=app.simulation.exact_outcome_limit,
        pair_limit=app.simulation.pattern_limit,
    )
    optimum = scorer.optimum(max_arms=app.simulation.oracle_max_arms)
    log.info(
        "experiment_started",
        M=env.M,
        K=env.K,
        T=config.T,
        algorithms=config.algorithms,
        seeds=len(config.seeds),
        optimal_set=optimum.sorted_set,
        optimal=optimum.value,
        scoring_method=type(scorer.method).__name__,
    )

    settings = PolicySettings(
        delta=config.delta,
        W=config.W,
        infinity_factor=app.simulation.infinity_factor,
        clamp_ucb=app.simulation.clamp_ucb,
        pair_limit=app.simulation.pattern_limit,
    )
    cells = [
        _Cell(
            algo=algo,
            seed=seed,
            env=env,
            horizon=config.T,
            settings=settings,
            scoring=ScoringMode(config.scoring).value,
            prefer_exact=prefer_exact,
            samples=config.W,
            evaluation_seed=app.simulation.evaluation_seed,
            max_outcomes=app.simulation.exact_outcome_limit,
            optimal=optimum.value,
            fingerprint=fingerprint,
        )
        for algo in config.algorithms
        for seed in config.seeds
    ]

    workers = _worker_count(config.jobs, len(cells))
    if workers == 1:
        traces = [_run_cell(c) for c in cells]
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(app.environment, app.logging.level, app.logging.format),
        ) as pool:
            traces = list(pool.map(_run_cell, cells))

    exporter = RegretExporter(traces, config.algorithms)
    summary = exporter.summary(exporter.reached_checkpoints(config.checkpoints))
    metadata = {
        "fingerprint": fingerprint,
        "config": config.model_dump(mode="json"),
        "environment": env_meta,
        "optimal_set": optimum.sorted_set,
        "optimal_score": optimum.value,
        "scoring_method": type(scorer.method).__name__,
        "zeta": ZETA,
        "delta": config.delta,
        "seeds": list(config.seeds),
    }
    result = ExperimentResult(traces, optimum, summary, metadata=metadata)

    if write:
        out = Path(config.out)
        out.mkdir(parents=True, exist_ok=True)
        result.csv_path = out / "regret.csv"
        result.summary_path = out / "summary.md"
        result.manifest_path = out / "manifest.json"
        result.csv_path.write_text(exporter.to_csv(), encoding="utf-8")
        result.summary_path.write_text(
            exporter.to_markdown_summary(
                config.checkpoints, optimum.value, optimum.sorted_set, ZETA, fingerprint, config.seeds
            ),
            encoding="utf-8",
        )
        manifest = {**metadata, "environment_document": environment_to_dict(env)}
        result.manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        log.info("experiment_written", csv=str(result.csv_path), rows=sum(len(t.round_scores) for t in traces))

    log.info("experiment_finished", summary={a: {str(c): v for c, v in row.items()} for a, row in summary.items()})
    return result
