#!/usr/bin/env python3
"""
PUCS simulator CLI - ingestion, offline probing analysis, online experiments.

Usage:
    pucs ingest TRIPS.csv [--out FILE] [--seed N] [-M M] [-K K] [--d-max D] [-I I]
    pucs offline [--env FILE | --config FILE | --setting S] [--method exact|montecarlo]
    pucs online [--config FILE] [--algos LIST] [--seeds N] [--T T] [--out DIR] [--jobs N]

Shared flags: --config PATH, --seed N, --out PATH, --jobs N.
Precedence: flags > --config JSON > config.yaml defaults.
Log level: PUCS_LOG=error|info|debug (or --verbose).

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.

Examples:
    pucs ingest trips.csv --out envs/nyc.json -M 3 -K 2 --d-max 5 --seed 7
    pucs offline --env envs/nyc.json
    pucs online --setting a --algos olpa,nonprobing,rr,gr --seeds 20 --T 3000
"""

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

# Add parent to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent.parent))

from src.config.settings import (
    ExperimentConfig,
    get_config,
    load_experiment_config,
)
from src.core.env_store import load_environment, save_environment
from src.core.exports import RegretExporter
from src.core.harness import ZETA, build_experiment_environment, run_experiment
from src.core.ingest import DEFAULT_COLUMNS, RewardModel, ingest_trips
from src.core.models import ProbingCost
from src.core.probing import Exact, MonteCarlo, exhaustive_optimal_probe, greedy_probe
from src.utils.exceptions import ConfigurationError, PucsError
from src.utils.logging import get_logger, setup_logging


logger = get_logger()


def _alpha_override(value: Optional[str]) -> Any:
    """'linear' or a comma-separated table."""
    if value is None or value == "linear":
        return value
    try:
        return [float(v) for v in value.split(",")]
    except ValueError as e:
        raise ConfigurationError(f"--alpha must be 'linear' or comma-separated numbers: {value}", config_key="alpha") from e


def _experiment_config(args, use_preset: bool = True, **extra) -> ExperimentConfig:
    overrides = {
        "setting": getattr(args, "setting", None),
        "M": getattr(args, "M", None),
        "K": getattr(args, "K", None),
        "D_max": getattr(args, "d_max", None),
        "I": getattr(args, "I", None),
        "alpha": _alpha_override(getattr(args, "alpha", None)),
        "reward_model": getattr(args, "reward_model", None),
        "delta": getattr(args, "delta", None),
        "W": getattr(args, "W", None),
        "method": getattr(args, "method", None),
        "out": getattr(args, "out", None),
        "jobs": getattr(args, "jobs", None),
        **extra,
    }
    config = load_experiment_config(Path(args.config) if args.config else None, overrides)
    if not use_preset or getattr(args, "random", False):
        config = config.model_copy(update={"setting": None})
    return config.resolved()


# =============================================================================
# COMMANDS
# =============================================================================


def cmd_ingest(args) -> int:
    """Build an environment JSON from a taxi-trip CSV."""
    config = _experiment_config(args, use_preset=False)
    columns = {
        "lat": args.lat_col or DEFAULT_COLUMNS["lat"],
        "lon": args.lon_col or DEFAULT_COLUMNS["lon"],
        "passengers": args.passengers_col or DEFAULT_COLUMNS["passengers"],
    }
    seed = args.seed if args.seed is not None else config.env_seed
    summary = ingest_trips(
        args.csv,
        M=config.M,
        K=config.K,
        probing_cost=ProbingCost(tuple(config.alpha_table())),
        reward_model=RewardModel(config.reward_model),
        seed=seed,
        columns=columns,
        d_max_cap=config.D_max,
    )

    out = Path(args.out) if args.out else Path("environment.json")
    if out.suffix.lower() != ".json":
        out = out / "environment.json"
    save_environment(
        summary.environment,
        out,
        metadata={**summary.metadata, "source_csv": Path(args.csv).name, "records": summary.records},
    )

    print("# Ingest\n")
    print("| Metric | Value |")
    print("|--------|-------|")
    print(f"| Records kept | {summary.records} |")
    print(f"| Records dropped | {summary.dropped} |")
    print(f"| Grid cells | {summary.total_cells} |")
    print(f"| Arms (top cells) | {len(summary.cells)} |")
    print(f"| Plays (vehicles) | {len(summary.vehicles)} |")
    print(f"\n**Saved** to {out}")
    return 0


def cmd_offline(args) -> int:
    """Compare greedy probing with the exhaustive optimum."""
    app = get_config()
    if args.env:
        env = load_environment(Path(args.env))
        source = args.env
    else:
        config = _experiment_config(args, env_seed=args.seed)
        env, meta = build_experiment_environment(config)
        source = f"synthetic setting={meta.get('setting')}"

    if args.method == "montecarlo":
        seed = args.seed if args.seed is not None else app.simulation.evaluation_seed
        method = MonteCarlo(args.W or app.simulation.monte_carlo_samples, seed)
    else:
        method = Exact(app.simulation.exact_outcome_limit)

    plan = greedy_probe(env, method)
    optimum = exhaustive_optimal_probe(env, method, max_arms=app.simulation.oracle_max_arms)
    ratio = 1.0 if optimum.value <= 0.0 else plan.value / optimum.value
    exact = isinstance(method, Exact)
    passed = ratio >= ZETA - 1e-9

    print("# Offline probing\n")
    print(f"**Environment:** {source} (M={env.M}, K={env.K}, D_max={env.D_max}, I={env.I})")
    print(f"**Method:** {type(method).__name__}\n")
    print("| Quantity | Value |")
    print("|----------|-------|")
    print(f"| S^pr (greedy) | {plan.sorted_set} |")
    print(f"| R(S^pr) | {plan.value:.6f} |")
    print(f"| S* (exhaustive) | {optimum.sorted_set} |")
    print(f"| R(S*) | {optimum.value:.6f} |")
    print(f"| ratio | {ratio:.6f} |")
    print(f"| zeta | {ZETA:.6f} |")

    print("\n## Greedy stages\n")
    print("| Size | Set | f_prob | (1-alpha) f_prob |")
    print("|------|-----|--------|------------------|")
    for stage in plan.stages:
        print(f"| {len(stage.probe_set)} | {sorted(stage.probe_set)} | {stage.f_prob:.6f} | {stage.scaled:.6f} |")

    if args.out:
        report = {
            "source": source,
            "method": type(method).__name__,
            "greedy_set": plan.sorted_set,
            "greedy_value": plan.value,
            "optimal_set": optimum.sorted_set,
            "optimal_value": optimum.value,
            "ratio": ratio,
            "zeta": ZETA,
            "passed": passed if exact else None,
        }
        out = Path(args.out)
        if out.suffix.lower() != ".json":
            out = out / "offline.json"
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        print(f"\n**Saved** to {out}")

    if exact:
        print(f"\n**{'PASS' if passed else 'FAIL'}** ratio {'>=' if passed else '<'} zeta")
        return 0 if passed else 1
    print("\n**Monte Carlo estimate** (guarantee check requires --method exact)")
    return 0


def cmd_online(args) -> int:
    """Run the online experiment and write CSV, summary and manifest."""
    extra: dict[str, Any] = {}
    if args.algos:
        extra["algorithms"] = [a for a in args.algos.split(",") if a.strip()]
    if args.seeds is not None:
        start = args.seed if args.seed is not None else 0
        extra["seeds"] = list(range(start, start + args.seeds))
    elif args.seed is not None:
        extra["seeds"] = [args.seed]
    if args.T is not None:
        extra["T"] = args.T
    if args.scoring:
        extra["scoring"] = args.scoring
    if args.env:
        extra["source"] = "file"
        extra["env_path"] = args.env
    config = _experiment_config(args, **extra)

    result = run_experiment(config)
    exporter = RegretExporter(result.traces, config.algorithms)

    print("# Online experiment\n")
    print(f"**Optimal probing set:** {result.optimal.sorted_set} (R = {result.optimal.value:.6f})")
    print(f"**Rounds:** {config.T}  **Seeds:** {len(config.seeds)}  **Scoring:** {config.scoring.value}\n")
    print(exporter.to_markdown_table(config.checkpoints))
    print(f"**CSV:** {result.csv_path}")
    print(f"**Summary:** {result.summary_path}")
    return 0


# =============================================================================
# PARSER
# =============================================================================


def _experiment_keys_epilog() -> str:
    lines = ["experiment config keys (JSON file, defaults in parentheses):"]
    for name, info in ExperimentConfig.model_fields.items():
        default = info.get_default(call_default_factory=True)
        lines.append(f"  {name} ({default!r}): {info.description}")
    return "\n".join(lines)


def _add_shared(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="Experiment config JSON (flags override its values)")
    parser.add_argument("--seed", type=int, help="Seed (ingest: vehicles, offline: Monte Carlo/instance, online: first run seed)")
    parser.add_argument("--out", help="Output path")
    parser.add_argument("--jobs", type=int, help="Worker processes (default: available cores)")
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")


def _add_shape(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-M", type=int, dest="M", help="Number of arms (default 3)")
    parser.add_argument("-K", type=int, dest="K", help="Number of plays (default 2)")
    parser.add_argument("--d-max", type=int, dest="d_max", help="Max resource units (default 5)")
    parser.add_argument("-I", type=int, dest="I", help="Probing budget (default 2)")
    parser.add_argument("--alpha", help="'linear' (default) or comma-separated table of length I+1")
    parser.add_argument(
        "--reward-model",
        dest="reward_model",
        choices=[m.value for m in RewardModel],
        help="Reward family (default bernoulli)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pucs",
        description="PUCS simulator - probing-augmented user-centric selection",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=__doc__,
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")

    ingest_parser = subparsers.add_parser(
        "ingest",
        help="Build an environment JSON from a taxi-trip CSV",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_experiment_keys_epilog(),
    )
    ingest_parser.add_argument("csv", help="Trips CSV with a header row")
    ingest_parser.add_argument("--lat-col", dest="lat_col", help=f"Latitude column (default {DEFAULT_COLUMNS['lat']})")
    ingest_parser.add_argument("--lon-col", dest="lon_col", help=f"Longitude column (default {DEFAULT_COLUMNS['lon']})")
    ingest_parser.add_argument(
        "--passengers-col", dest="passengers_col", help=f"Passenger count column (default {DEFAULT_COLUMNS['passengers']})"
    )
    _add_shared(ingest_parser)
    _add_shape(ingest_parser)

    offline_parser = subparsers.add_parser(
        "offline",
        help="Greedy probing vs exhaustive optimum",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_experiment_keys_epilog(),
    )
    offline_parser.add_argument("--env", help="Environment JSON (default: synthetic from config)")
    offline_parser.add_argument("--setting", choices=["a", "b", "c", "d"], help="Synthetic preset (default a)")
    offline_parser.add_argument("--random", action="store_true", help="Random synthetic instance instead of a preset")
    offline_parser.add_argument("--method", choices=["exact", "montecarlo"], default="exact", help="Expectation method (default exact)")
    offline_parser.add_argument("--W", type=int, dest="W", help="Monte Carlo samples (default 200)")
    _add_shared(offline_parser)
    _add_shape(offline_parser)

    online_parser = subparsers.add_parser(
        "online",
        help="Run the online experiment",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=_experiment_keys_epilog(),
    )
    online_parser.add_argument("--env", help="Environment JSON instead of a synthetic/dataset source")
    online_parser.add_argument("--setting", choices=["a", "b", "c", "d"], help="Synthetic preset (default a)")
    online_parser.add_argument("--algos", help="Comma-separated policies: olpa,nonprobing,rr,gr (default all)")
    online_parser.add_argument("--seeds", type=int, help="Number of seeds (default 20)")
    online_parser.add_argument("--T", type=int, dest="T", help="Horizon (default 3000)")
    online_parser.add_argument("--delta", type=float, help="UCB confidence parameter (default 0.05)")
    online_parser.add_argument("--W", type=int, dest="W", help="Monte Carlo samples (default 200)")
    online_parser.add_argument("--method", choices=["exact", "montecarlo"], help="Scoring expectation method (default exact)")
    online_parser.add_argument("--scoring", choices=["probe_set", "decision"], help="Round score (default probe_set)")
    _add_shared(online_parser)
    _add_shape(online_parser)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if not args.command:
        parser.print_help()
        return 2

    try:
        app = get_config()
    except PucsError as e:
        print(f"Error: {e.message}", file=sys.stderr)
        return e.exit_code
    fmt = {"json": True, "console": False}.get(app.logging.format)
    setup_logging(
        environment=app.environment,
        log_level="DEBUG" if args.verbose else app.logging.level,
        json_output=fmt,
    )

    commands = {
        "ingest": cmd_ingest,
        "offline": cmd_offline,
        "online": cmd_online,
    }

    try:
        return commands[args.command](args)
    except PucsError as e:
        logger.error("command_failed", command=args.command, **e.to_dict())
        print(f"Error: {e.message}", file=sys.stderr)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
