"""
Configuration management for the PUCS simulator.

Exports:
    get_config: Get the singleton AppConfig instance
    AppConfig: Application configuration dataclass (config.yaml)
    ExperimentConfig: Validated experiment description
"""

from src.config.settings import AppConfig, ExperimentConfig, get_config, load_experiment_config

__all__ = ["get_config", "AppConfig", "ExperimentConfig", "load_experiment_config"]
