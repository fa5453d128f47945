"""
JSON persistence for environments.

Document layout:
    {"M": ..., "K": ..., "D_max": ..., "resource_pmfs": [[...]],
     "reward_supports": [[[...]]], "reward_probs": [[[...]]], "alpha": [...]}

Floats are written with repr precision, so a save/load round trip is exact.
An optional "metadata" object carries provenance (seeds, normalization).
"""

import json
from pathlib import Path
from typing import Any, Optional

from src.core.models import DiscreteDistribution, Environment, ProbingCost, ResourcePMF
from src.utils.exceptions import DataFileError, ValidationError


def environment_to_dict(env: Environment, metadata: Optional[dict[str, Any]] = None) -> dict[str, Any]:
    doc: dict[str, Any] = {
        "M": env.M,
        "K": env.K,
        "D_max": env.D_max,
        "resource_pmfs": [list(p.probs) for p in env.resource_pmfs],
        "reward_supports": [[list(d.support) for d in row] for row in env.reward_dists],
        "reward_probs": [[list(d.probs) for d in row] for row in env.reward_dists],
        "alpha": list(env.probing_cost.alpha),
    }
    if metadata:
        doc["metadata"] = metadata
    return doc


def environment_from_dict(doc: dict[str, Any]) -> Environment:
    """Rebuild and validate an environment; dimension fields must agree with the arrays."""
    try:
        env = Environment(
            resource_pmfs=tuple(ResourcePMF(tuple(p)) for p in doc["resource_pmfs"]),
            reward_dists=tuple(
                tuple(DiscreteDistribution(tuple(s), tuple(p)) for s, p in zip(srow, prow))
                for srow, prow in zip(doc["reward_supports"], doc["reward_probs"])
            ),
            probing_cost=ProbingCost(tuple(doc["alpha"])),
        )
    except KeyError as e:
        raise ValidationError(f"Environment document is missing key {e.args[0]!r}", field=str(e.args[0])) from e
    except TypeError as e:
        raise ValidationError(f"Malformed environment document: {e}") from e

    for key, actual in (("M", env.M), ("K", env.K), ("D_max", env.D_max)):
        if key in doc and int(doc[key]) != actual:
            raise ValidationError(
                f"{key} does not match the arrays", field=key, details={"declared": doc[key], "actual": actual}
            )
    for srow, prow in zip(doc["reward_supports"], doc["reward_probs"]):
        if len(srow) != len(prow):
            raise ValidationError("reward_supports and reward_probs disagree in shape")
    return env


def save_environment(env: Environment, path: Path, metadata: Optional[dict[str, Any]] = None) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as f:
        json.dump(environment_to_dict(env, metadata), f, indent=2, sort_keys=False)
        f.write("\n")


def load_environment(path: Path) -> Environment:
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
    except FileNotFoundError as e:
        raise DataFileError(f"Environment file not found: {path}", path=str(path)) from e
    except json.JSONDecodeError as e:
        raise DataFileError(f"Invalid JSON in {path}: {e}", path=str(path)) from e
    if not isinstance(doc, dict):
        raise DataFileError(f"Environment file {path} must hold a JSON object", path=str(path))
    return environment_from_dict(doc)
