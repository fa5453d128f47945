"""
Unit tests for zeta-regret and the experiment harness.

Experiments here are tiny (a handful of rounds, jobs=1) and write into
pytest's tmp_path.
"""

import json
import math

import pytest

from src.config.settings import AppConfig, ExperimentConfig
from src.core.env_store import save_environment
from src.core.harness import ZETA, build_experiment_environment, run_experiment, zeta_regret
from src.core.exports import CSV_COLUMNS
from src.utils.exceptions import OracleInfeasibleError


def _config(tmp_path, **overrides):
    data = {
        "setting": "a",
        "T": 4,
        "seeds": [0, 1],
        "W": 16,
        "jobs": 1,
        "out": str(tmp_path / "out"),
        "checkpoints": [2, 4, 100],
    }
    data.update(overrides)
    return ExperimentConfig.model_validate(data)


class TestZetaRegret:
    """Tests for zeta_regret."""

    def test_zeta_constant(self):
        """zeta = (e - 1) / (2e - 1)."""
        assert ZETA == pytest.approx(0.3873002, abs=1e-7)
        assert ZETA == pytest.approx((math.e - 1) / (2 * math.e - 1))

    def test_per_round_and_cumulative(self):
        """regret_t = zeta * R* - score_t, summed."""
        trace = zeta_regret([0.2, 0.5], optimal=1.0, zeta=0.4, algo="olpa", seed=3)
        assert trace.round_regret == pytest.approx((0.2, -0.1))
        assert trace.cumulative == pytest.approx((0.2, 0.1))
        assert trace.total == pytest.approx(0.1)

    def test_empty(self):
        """No rounds, zero total."""
        assert zeta_regret([], optimal=1.0).total == 0.0

    def test_cumulative_gap(self):
        """The gap sums R* - score without the zeta factor."""
        trace = zeta_regret([0.2, 1.0, 0.5], optimal=1.0, zeta=0.4)
        assert trace.cumulative_gap == pytest.approx((0.8, 0.8, 1.3))
        assert zeta_regret([], optimal=1.0).cumulative_gap == ()


class TestBuildEnvironment:
    """Tests for build_experiment_environment."""

    def test_synthetic_preset(self, tmp_path):
        """A preset setting builds its shape."""
        env, meta = build_experiment_environment(_config(tmp_path).resolved(AppConfig()))
        assert (env.M, env.K) == (3, 2)
        assert meta["setting"] == "a"

    def test_from_file(self, tmp_path, probing_env):
        """source=file loads the saved environment."""
        path = tmp_path / "env.json"
        save_environment(probing_env, path)
        config = _config(tmp_path, source="file", env_path=str(path))
        env, meta = build_experiment_environment(config.resolved(AppConfig()))
        assert env == probing_env
        assert meta["source"] == "file"

    def test_from_dataset(self, tmp_path, trips_csv):
        """source=dataset ingests the trips CSV."""
        path = tmp_path / "trips.csv"
        path.write_text(trips_csv)
        config = _config(tmp_path, source="dataset", dataset_path=str(path), M=2, K=2)
        env, meta = build_experiment_environment(config.resolved(AppConfig()))
        assert (env.M, env.K) == (2, 2)
        assert meta["source"] == "dataset"


class TestRunExperiment:
    """Tests for run_experiment."""

    def test_artifacts(self, tmp_path):
        """CSV, summary and manifest are written; one CSV row per round and run."""
        result = run_experiment(_config(tmp_path), app=AppConfig())
        lines = result.csv_path.read_text().splitlines()
        assert lines[0] == ",".join(CSV_COLUMNS)
        assert len(lines) == 1 + 4 * 2 * 4
        assert result.summary_path.read_text().startswith("# Cumulative zeta-regret")
        manifest = json.loads(result.manifest_path.read_text())
        assert manifest["zeta"] == pytest.approx(ZETA)
        assert manifest["seeds"] == [0, 1]
        assert "environment_document" in manifest

    def test_summary_checkpoints(self, tmp_path):
        """Unreached checkpoints are left out of the summary."""
        result = run_experiment(_config(tmp_path), app=AppConfig())
        assert set(result.summary["olpa"]) == {2, 4}

    def test_regret_uses_optimum(self, tmp_path):
        """Every row's regret is zeta * R(S*) minus its score."""
        result = run_experiment(_config(tmp_path, algorithms=["nonprobing"]), app=AppConfig())
        for trace in result.traces:
            assert trace.optimal == pytest.approx(result.optimal.value)
            for score, regret in zip(trace.round_scores, trace.round_regret):
                assert regret == pytest.approx(ZETA * trace.optimal - score)

    def test_zero_horizon(self, tmp_path):
        """T=0 writes a header-only CSV."""
        result = run_experiment(_config(tmp_path, T=0), app=AppConfig())
        assert result.csv_path.read_text() == ",".join(CSV_COLUMNS) + "\n"
        assert result.summary["olpa"] == {}

    def test_byte_identical_reruns(self, tmp_path):
        """The same config reproduces the same CSV byte for byte."""
        first = run_experiment(_config(tmp_path, out=str(tmp_path / "a")), app=AppConfig())
        second = run_experiment(_config(tmp_path, out=str(tmp_path / "b")), app=AppConfig())
        assert first.csv_path.read_bytes() == second.csv_path.read_bytes()
        assert first.metadata["fingerprint"] == second.metadata["fingerprint"]

    def test_decision_scoring(self, tmp_path):
        """Decision scoring records the executed decision's expected value."""
        result = run_experiment(
            _config(tmp_path, scoring="decision", algorithms=["rr"]), app=AppConfig(), write=False
        )
        assert result.csv_path is None
        assert all(len(t.round_scores) == 4 for t in result.traces)

    @pytest.mark.parametrize("algo", ["olpa", "nonprobing", "rr", "gr"])
    def test_scores_never_exceed_optimum(self, tmp_path, algo):
        """Under probe-set scoring no round beats R(S*)."""
        result = run_experiment(
            _config(tmp_path, algorithms=[algo], T=30, seeds=[0, 1, 2]), app=AppConfig(), write=False
        )
        for trace in result.traces:
            assert max(trace.round_scores) <= result.optimal.value + 1e-9
            assert min(trace.cumulative_gap) >= -1e-9

    def test_oracle_gate(self, tmp_path):
        """Exhaustive scoring refuses more arms than the gate allows."""
        app = AppConfig()
        app.simulation.oracle_max_arms = 2
        with pytest.raises(OracleInfeasibleError):
            run_experiment(_config(tmp_path), app=app, write=False)
