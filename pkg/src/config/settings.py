"""
Configuration settings loader for the PUCS simulator.

Two layers:
    AppConfig         - config.yaml with environment variable substitution
                        (logging, simulation defaults, experiment defaults)
    ExperimentConfig  - pydantic model for one experiment, validated from a
                        JSON file and CLI flag overrides

Usage:
    from src.config import get_config, ExperimentConfig

    config = get_config()
    print(config.simulation.delta)
"""

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Union

import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from src.utils.exceptions import ConfigurationError


# =============================================================================
# CONFIG DATA CLASSES
# =============================================================================
# Each dataclass maps to a section in config.yaml.
# =============================================================================


@dataclass
class LoggingConfig:
    """
    Logging configuration.

    Attributes:
        level: error, info, debug (or DEBUG, INFO, WARNING, ERROR, CRITICAL)
        format: Output format (json, console, auto)
    """

    level: str = "info"
    format: str = "auto"


@dataclass
class SimulationConfig:
    """
    Numerical defaults shared by the offline and online components.

    Attributes:
        delta: Confidence parameter of the UCB radius
        monte_carlo_samples: W, Monte Carlo draws per f_prob evaluation
        exact_outcome_limit: Max joint outcomes enumerated by Exact expectation
        pattern_limit: Max play-to-arm patterns for the batched evaluator
        oracle_max_arms: Max M for the exhaustive probing oracle
        infinity_factor: Sentinel radius = infinity_factor * K
        clamp_ucb: Clamp UCB means to 1.0
        evaluation_seed: Seed of the shared scoring sample bank
    """

    delta: float = 0.05
    monte_carlo_samples: int = 200
    exact_outcome_limit: int = 100_000
    pattern_limit: int = 20_000
    oracle_max_arms: int = 12
    infinity_factor: float = 10.0
    clamp_ucb: bool = False
    evaluation_seed: int = 20240601


@dataclass
class ExperimentDefaults:
    """
    Defaults for experiment orchestration.

    Attributes:
        checkpoints: Rounds at which the summary reports cumulative regret
        jobs: Worker processes (0 = available cores)
        output_dir: Default output directory
    """

    checkpoints: List[int] = field(default_factory=lambda: [1000, 2000, 3000])
    jobs: int = 0
    output_dir: str = "results"


@dataclass
class AppConfig:
    """
    Complete application configuration.

    Loaded from config.yaml with environment variable substitution.
    Access via get_config() singleton.
    """

    environment: str = "development"
    logging: LoggingConfig = field(default_factory=LoggingConfig)
    simulation: SimulationConfig = field(default_factory=SimulationConfig)
    experiment: ExperimentDefaults = field(default_factory=ExperimentDefaults)


# =============================================================================
# CONFIG LOADING
# =============================================================================


def _substitute_env_vars(value: Any) -> Any:
    """
    Substitute environment variables in config values.

    Supports:
        ${VAR_NAME}          - Returns empty string if not set
        ${VAR_NAME:-default} - Returns default if not set
    """
    if not isinstance(value, str):
        return value

    pattern = r"\$\{([^}]+)\}"

    def replace(match: re.Match) -> str:
        expr = match.group(1)
        if ":-" in expr:
            var_name, default = expr.split(":-", 1)
            return os.environ.get(var_name.strip(), default)
        env_value = os.environ.get(expr.strip())
        return "" if env_value is None else env_value

    return re.sub(pattern, replace, value)


def _substitute_dict(data: Dict[str, Any]) -> Dict[str, Any]:
    """Recursively substitute environment variables in a dictionary."""
    result = {}
    for key, value in data.items():
        if isinstance(value, dict):
            result[key] = _substitute_dict(value)
        elif isinstance(value, list):
            result[key] = [
                _substitute_env_vars(item) if isinstance(item, str) else item
                for item in value
            ]
        else:
            result[key] = _substitute_env_vars(value)
    return result


def _dict_to_dataclass(data: Dict[str, Any], cls: type) -> Any:
    """Convert a dictionary to a dataclass, handling nested dataclasses."""
    if not data:
        return cls()

    field_types = {f.name: f.type for f in cls.__dataclass_fields__.values()}
    kwargs = {}

    for key, value in data.items():
        if key not in field_types:
            continue

        field_type = field_types[key]

        if hasattr(field_type, "__dataclass_fields__") and isinstance(value, dict):
            kwargs[key] = _dict_to_dataclass(value, field_type)
        elif field_type == int and isinstance(value, str):
            kwargs[key] = int(value) if value else 0
        elif field_type == float and isinstance(value, str):
            kwargs[key] = float(value) if value else 0.0
        elif field_type == bool and isinstance(value, str):
            kwargs[key] = value.lower() in ("true", "1", "yes")
        else:
            kwargs[key] = value

    return cls(**kwargs)


def load_config(config_path: Optional[Path] = None) -> AppConfig:
    """
    Load configuration from config.yaml.

    Args:
        config_path: Path to config.yaml. If None, searches:
            1. PROJECT_ROOT/config.yaml
            2. Current working directory
        When neither exists, built-in defaults are returned.

    Raises:
        ConfigurationError: If the file is not valid YAML
    """
    if config_path is None:
        project_root = Path(__file__).parent.parent.parent
        config_path = project_root / "config.yaml"
        if not config_path.exists():
            config_path = Path.cwd() / "config.yaml"
        if not config_path.exists():
            return AppConfig()
    elif not config_path.exists():
        raise ConfigurationError(f"Configuration file not found: {config_path}")

    try:
        with open(config_path, "r") as f:
            raw_config = yaml.safe_load(f) or {}
    except yaml.YAMLError as e:
        raise ConfigurationError(f"Invalid YAML in {config_path}: {e}") from e

    return _dict_to_dataclass(_substitute_dict(raw_config), AppConfig)


# Singleton config instance
_config: Optional[AppConfig] = None


def get_config(reload: bool = False) -> AppConfig:
    """
    Get the application configuration (singleton).

    Config is loaded once and cached. Use reload=True to force reload.
    """
    global _config
    if _config is None or reload:
        _config = load_config()
    return _config


# =============================================================================
# EXPERIMENT CONFIG
# =============================================================================


class EnvironmentSource(str, Enum):
    """Where the ground-truth environment comes from."""

    SYNTHETIC = "synthetic"
    DATASET = "dataset"
    FILE = "file"


class ExpectationMode(str, Enum):
    """How R(S) is evaluated."""

    EXACT = "exact"
    MONTECARLO = "montecarlo"


class ScoringMode(str, Enum):
    """What each round is scored by in the regret trace."""

    PROBE_SET = "probe_set"
    DECISION = "decision"


ALGORITHMS = ("olpa", "nonprobing", "rr", "gr")

# Synthetic stand-ins for the four experiment settings (a)-(d)
SETTING_PRESETS: Dict[str, Dict[str, Any]] = {
    "a": {"M": 3, "K": 2, "D_max": 5, "reward_model": "bernoulli"},
    "b": {"M": 5, "K": 3, "D_max": 7, "reward_model": "bernoulli"},
    "c": {"M": 3, "K": 2, "D_max": 5, "reward_model": "four_level"},
    "d": {"M": 10, "K": 6, "D_max": 7, "reward_model": "four_level"},
}


class ExperimentConfig(BaseModel):
    """
    One online experiment: environment source, horizon, policies, seeds.

    Precedence: CLI flags > JSON config file > config.yaml simulation defaults
    > the defaults declared here.
    """

    model_config = ConfigDict(extra="forbid", use_enum_values=False)

    source: EnvironmentSource = Field(
        EnvironmentSource.SYNTHETIC,
        description="Environment source: synthetic preset/random, dataset CSV, or environment JSON file",
    )
    setting: Optional[Literal["a", "b", "c", "d"]] = Field(
        "a",
        description="Synthetic preset; supplies M, K, D_max and reward_model not given explicitly",
        examples=["a"],
    )
    env_path: Optional[str] = Field(None, description="Environment JSON path (source=file)")
    dataset_path: Optional[str] = Field(None, description="Trips CSV path (source=dataset)")
    columns: Optional[Dict[str, str]] = Field(
        None,
        description="CSV column map: lat, lon, passengers",
        examples=[{"lat": "pickup_latitude", "lon": "pickup_longitude", "passengers": "passenger_count"}],
    )
    env_seed: int = Field(0, description="Seed for vehicle sampling / synthetic environments")
    M: int = Field(3, ge=1, description="Number of arms")
    K: int = Field(2, ge=1, description="Number of plays")
    T: int = Field(3000, ge=0, description="Horizon (rounds)")
    D_max: int = Field(5, ge=1, description="Maximum resource units per arm")
    I: int = Field(2, ge=1, description="Probing budget")
    alpha: Union[Literal["linear"], List[float]] = Field(
        "linear",
        description='Probing cost schedule: "linear" (alpha(i)=i/I) or an explicit table of length I+1',
        examples=["linear", [0.0, 0.1, 1.0]],
    )
    reward_model: Literal["bernoulli", "four_level"] = Field(
        "bernoulli", description="Reward distribution family"
    )
    delta: Optional[float] = Field(None, gt=0.0, lt=1.0, description="UCB confidence parameter")
    W: Optional[int] = Field(None, ge=1, description="Monte Carlo samples for online f_prob")
    seeds: List[int] = Field(default_factory=lambda: list(range(20)), description="Run seeds")
    algorithms: List[str] = Field(
        default_factory=lambda: list(ALGORITHMS), description="Policies to run"
    )
    method: ExpectationMode = Field(
        ExpectationMode.EXACT, description="Scoring expectation method for R(S_t) and R(S*)"
    )
    scoring: ScoringMode = Field(ScoringMode.PROBE_SET, description="Round score definition")
    checkpoints: Optional[List[int]] = Field(None, description="Summary checkpoints")
    out: Optional[str] = Field(None, description="Output directory")
    jobs: Optional[int] = Field(None, ge=0, description="Worker processes (0 = cores)")

    @field_validator("algorithms")
    @classmethod
    def _known_algorithms(cls, value: List[str]) -> List[str]:
        normalized = [a.strip().lower() for a in value if a.strip()]
        unknown = [a for a in normalized if a not in ALGORITHMS]
        if unknown:
            raise ValueError(f"unknown algorithms {unknown}; choose from {list(ALGORITHMS)}")
        if not normalized:
            raise ValueError("at least one algorithm is required")
        return normalized

    @model_validator(mode="after")
    def _consistent(self) -> "ExperimentConfig":
        if isinstance(self.alpha, list) and len(self.alpha) != self.I + 1:
            raise ValueError(f"alpha table has length {len(self.alpha)}, expected I+1={self.I + 1}")
        if self.source == EnvironmentSource.DATASET and not self.dataset_path:
            raise ValueError("source=dataset requires dataset_path")
        if self.source == EnvironmentSource.FILE and not self.env_path:
            raise ValueError("source=file requires env_path")
        if not self.seeds:
            raise ValueError("at least one seed is required")
        return self

    def alpha_table(self) -> List[float]:
        """Expand "linear" to alpha(i) = i/I."""
        if self.alpha == "linear":
            return [i / self.I for i in range(self.I + 1)]
        return [float(a) for a in self.alpha]

    def resolved(self, app: Optional[AppConfig] = None) -> "ExperimentConfig":
        """
        Fill shape fields the caller left unset from the synthetic preset,
        and unset knobs from config.yaml defaults.
        """
        app = app or get_config()
        preset: Dict[str, Any] = {}
        if self.source == EnvironmentSource.SYNTHETIC and self.setting:
            preset = {
                key: value
                for key, value in SETTING_PRESETS[self.setting].items()
                if key not in self.model_fields_set
            }
        return self.model_copy(
            update={
                **preset,
                "delta": self.delta if self.delta is not None else app.simulation.delta,
                "W": self.W if self.W is not None else app.simulation.monte_carlo_samples,
                "checkpoints": (
                    self.checkpoints
                    if self.checkpoints is not None
                    else list(app.experiment.checkpoints)
                ),
                "out": self.out if self.out is not None else app.experiment.output_dir,
                "jobs": self.jobs if self.jobs is not None else app.experiment.jobs,
            }
        )

    def fingerprint(self) -> str:
        """SHA-256 of the canonical JSON form, excluding output and parallelism."""
        payload = self.model_dump(mode="json", exclude={"out", "jobs"})
        canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def load_experiment_config(
    path: Optional[Path] = None, overrides: Optional[Dict[str, Any]] = None
) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a JSON file plus flag overrides.

    Overrides whose value is None are ignored.

    Raises:
        ConfigurationError: unreadable file or failed validation
    """
    data: Dict[str, Any] = {}
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError as e:
            raise ConfigurationError(f"Config file not found: {path}", config_key="config") from e
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Invalid JSON in {path}: {e}", config_key="config") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must hold a JSON object")

    for key, value in (overrides or {}).items():
        if value is not None:
            data[key] = value

    try:
        return ExperimentConfig.model_validate(data)
    except ValueError as e:
        raise ConfigurationError(f"Invalid experiment config: {e}") from e
