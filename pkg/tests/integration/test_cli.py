"""Integration tests for the command-line interface."""

import json

import pytest
import yaml
from click.testing import CliRunner
from tiresias.cli import cli

pytestmark = pytest.mark.integration


@pytest.fixture
def runner() -> CliRunner:
    """Click test runner."""
    return CliRunner()


@pytest.fixture
def experiment_file(tmp_path):
    """Small circle experiment on disk."""
    path = tmp_path / "circle.yaml"
    path.write_text(
        yaml.dump(
            {
                "name": "cli-circle",
                "space": {"builder": "circle", "n_vertices": 16},
                "window": {"rule": "arc", "count": 4, "t_min": 2.0, "t_max": 20.0},
                "extraction": {"heat_report": False},
            }
        )
    )
    return path


class TestShowConfig:
    """Tests for the show-config command."""

    def test_json_output(self, runner, experiment_file):
        """Test that the effective configuration and hash are printed."""
        result = runner.invoke(
            cli, ["--log-level", "ERROR", "--config", str(experiment_file), "show-config", "--output", "json"]
        )

        assert result.exit_code == 0
        payload = json.loads(result.output)
        assert payload["config"]["name"] == "cli-circle"
        assert payload["config"]["space"]["n_vertices"] == 16
        assert len(payload["config_hash"]) == 64

    def test_yaml_output(self, runner, experiment_file):
        """Test the default YAML rendering."""
        result = runner.invoke(cli, ["--log-level", "ERROR", "--config", str(experiment_file), "show-config"])

        assert result.exit_code == 0
        assert result.output.startswith("# config_hash: ")
        assert "name: cli-circle" in result.output

    def test_invalid_configuration(self, runner, tmp_path):
        """Test that a configuration failing validation exits with status 1."""
        path = tmp_path / "bad.yaml"
        path.write_text(yaml.dump({"space": {"n_vertices": 4}}))

        result = runner.invoke(cli, ["--log-level", "ERROR", "--config", str(path), "show-config"])

        assert result.exit_code == 1
        assert "invalid configuration" in result.output


class TestStageCommands:
    """Tests for stage verbs."""

    def test_build_writes_space(self, runner, experiment_file, tmp_path):
        """Test that build writes the space document and passes."""
        out = tmp_path / "run"

        result = runner.invoke(
            cli, ["--log-level", "ERROR", "--config", str(experiment_file), "build", "--out", str(out)]
        )

        assert result.exit_code == 0
        assert (out / "space.json").is_file()
        assert (out / "summary.json").is_file()
        assert "All baselines pass." in result.output

    def test_failed_baseline_exits_nonzero(self, runner, tmp_path):
        """Test that a violated baseline gives exit status 1."""
        path = tmp_path / "strict.yaml"
        path.write_text(
            yaml.dump(
                {
                    "space": {"builder": "circle", "n_vertices": 16},
                    "baselines": {"build.vertices": {"value": 8.0, "comparator": "le"}},
                }
            )
        )

        result = runner.invoke(
            cli, ["--log-level", "ERROR", "--config", str(path), "build", "--out", str(tmp_path / "run")]
        )

        assert result.exit_code == 1
        assert "FAIL" in result.output
        assert "Some baselines failed." in result.output

    def test_stage_error_exits_nonzero(self, runner, tmp_path):
        """Test that a stage failure is reported with its stage name."""
        path = tmp_path / "floor.yaml"
        path.write_text(
            yaml.dump(
                {
                    "space": {"builder": "circle", "n_vertices": 16},
                    "window": {"rule": "arc", "count": 4, "t_min": 0.01, "t_max": 1.0},
                }
            )
        )

        result = runner.invoke(
            cli, ["--log-level", "ERROR", "--config", str(path), "observe", "--out", str(tmp_path / "run")]
        )

        assert result.exit_code == 1
        assert "Error in stage observe" in result.output
        assert "discretization floor" in result.output


class TestEmitPlots:
    """Tests for the emit-plots command."""

    def test_empty_run_directory(self, runner, tmp_path):
        """Test that a run directory without sources exits with status 1."""
        result = runner.invoke(cli, ["--log-level", "ERROR", "emit-plots", "--out", str(tmp_path)])

        assert result.exit_code == 1
        assert "Expected artifacts" in result.output

    def test_plots_after_observe_and_extract(self, runner, experiment_file, tmp_path):
        """Test that plot files are derived from a real run."""
        out = tmp_path / "run"
        runner.invoke(cli, ["--log-level", "ERROR", "--config", str(experiment_file), "extract", "--out", str(out)])

        result = runner.invoke(cli, ["--log-level", "ERROR", "emit-plots", "--out", str(out)])

        assert result.exit_code == 0
        assert (out / "plots" / "trace_decay.csv").is_file()


class TestDeterminism:
    """Tests for reproducible runs."""

    @pytest.mark.slow
    def test_run_all_twice_gives_identical_summary(self, runner, tmp_path):
        """Test that two seeded run-all invocations write byte-identical summaries."""
        path = tmp_path / "noisy.yaml"
        path.write_text(
            yaml.dump(
                {
                    "name": "cli-noisy-circle",
                    "space": {"builder": "circle", "n_vertices": 16},
                    "window": {"rule": "arc", "count": 4, "t_min": 2.0, "t_max": 20.0, "noise": 1e-10},
                    "extraction": {"j_target": 2},
                }
            )
        )
        outs = [tmp_path / "first", tmp_path / "second"]

        codes = [
            runner.invoke(
                cli,
                ["--log-level", "ERROR", "--config", str(path), "run-all", "--out", str(out), "--seed", "11"],
            ).exit_code
            for out in outs
        ]

        assert codes[0] == codes[1]
        for name in ("summary.json", "summary.csv", "audit.json"):
            assert (outs[0] / name).read_bytes() == (outs[1] / name).read_bytes()
