"""
Pytest configuration and shared fixtures for PUCS simulator tests.

# =============================================================================
# Testing Approach
# =============================================================================
#
# Unit Tests (test_*.py):
#   - Test core logic in isolation on small hand-built environments
#   - Expected values are worked out by hand in the test docstrings
#   - Randomness always comes from fixed seeds
#
# Test Coverage:
#   - test_models.py: Distributions, PMFs, probing cost, environment, profiles
#   - test_rewards.py: Per-arm rewards, total reward, executed reward
#   - test_assignment.py: Matching, optimal assignment, batched values
#   - test_probing.py: Expectations, greedy probing, exhaustive oracle
#   - test_estimators.py: Confidence radius and estimator updates
#   - test_policies.py: OLPA and baselines round loop
#   - test_ingest.py / test_env_store.py / test_synthetic.py: Environments
#   - test_harness.py / test_exports.py: Regret, artifacts, determinism
#   - test_settings.py / test_logging.py / test_exceptions.py: Ambient stack
#   - test_cli.py: Subcommands and exit codes
#
# Integration Tests (integration_*.py):
#   - Full-horizon experiment runs (minutes, not seconds)
#   - Not run by default pytest discovery (different naming pattern)
#   - Run manually: python tests/integration_test_experiment.py
#
# Running Tests:
#   python -m pytest tests/ -v               # All unit tests
#   python -m pytest tests/ -v -k "probing"  # Specific module
#
# =============================================================================
"""

import sys
from pathlib import Path

import pytest

# Add src to path for imports
sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.models import DiscreteDistribution, Environment, ProbingCost, ResourcePMF


@pytest.fixture(autouse=True)
def reset_config():
    """Reset the config singleton between tests."""
    import src.config.settings as settings
    settings._config = None
    yield
    settings._config = None


@pytest.fixture(autouse=True)
def setup_test_logging():
    """Configure logging for tests."""
    from src.utils.logging import setup_logging
    setup_logging(environment="testing", log_level="DEBUG", json_output=False)
    yield


# =============================================================================
# Environment Factory Fixture
# =============================================================================

@pytest.fixture
def make_env():
    """
    Factory fixture for environments.

    rewards: M x K nested list; a float is a point mass, a (support, probs)
    pair is a general distribution.
    pmfs: list of per-arm PMF tuples (default: always one unit).
    """
    def _make_env(rewards, pmfs=None, alpha=(0.0, 0.1, 1.0)):
        rows = []
        for row in rewards:
            dists = []
            for entry in row:
                if isinstance(entry, DiscreteDistribution):
                    dists.append(entry)
                elif isinstance(entry, tuple):
                    dists.append(DiscreteDistribution(*entry))
                else:
                    dists.append(DiscreteDistribution.point_mass(entry))
            rows.append(tuple(dists))
        if pmfs is None:
            pmfs = [(1.0,)] * len(rows)
        return Environment(
            resource_pmfs=tuple(ResourcePMF(tuple(p)) for p in pmfs),
            reward_dists=tuple(rows),
            probing_cost=ProbingCost(tuple(alpha)),
        )
    return _make_env


# =============================================================================
# Sample Environments
# =============================================================================

@pytest.fixture
def worked_env(make_env):
    """
    M=2, K=1, I=2, alpha=(0, 0.1, 1), one resource unit per arm.

    Arm 0 rewards are uniform on {0, 1}; arm 1 is a point mass at 0.4.
        R(empty) = 0.5, R({0}) = 0.9 * E[max(X0, 0.4)] = 0.63,
        R({1}) = 0.45, R({0, 1}) = 0
    """
    return make_env([[((0.0, 1.0), (0.5, 0.5))], [0.4]])


@pytest.fixture
def probing_env(make_env):
    """
    M=3, K=2, I=2, alpha=(0, 0.1, 1), D_max=2 but always one unit.

    Arm 0 pays Bernoulli(0.5) to both plays; arms 1 and 2 pay 0.05.
    Probing arm 0 lets the better of two coin flips take its single unit:
        R(empty) = 0.55, R({0}) = 0.9 * (0.75 * 1.05 + 0.25 * 0.10) = 0.73125 = R*
    (when both flips fail, the plays fall back to arms 1 and 2).
    """
    coin = DiscreteDistribution.bernoulli(0.5)
    return make_env(
        [[coin, coin], [0.05, 0.05], [0.05, 0.05]],
        pmfs=[(1.0, 0.0)] * 3,
    )


@pytest.fixture
def deterministic_env(make_env):
    """M=2, K=1, alpha=(0, 0.5, 1): point-mass rewards 0.3 and 0.6, R* = R(empty) = 0.6."""
    return make_env([[0.3], [0.6]], alpha=(0.0, 0.5, 1.0))


@pytest.fixture
def trips_csv():
    """Small trips CSV with three cells and a few malformed rows."""
    rows = [
        "pickup_latitude,pickup_longitude,passenger_count",
        "40.7586,-73.9855,1",
        "40.7581,-73.9851,1",
        "40.7589,-73.9859,2",
        "40.7412,-73.9701,1",
        "40.7415,-73.9705,3",
        "40.7305,-73.9902,1",
        "not_a_number,-73.9902,1",
        "40.7405,-73.9902,0",
        "40.7405,-73.9902,1.5",
        "40.7405,,1",
    ]
    return "\n".join(rows) + "\n"
