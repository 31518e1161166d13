"""Integration tests for the experiment runner.

These run real stages on a 32-vertex circle observed on a quarter arc and
check the artifact tree, the audit and the summary.
"""

import pytest
from tiresias.config import ExperimentConfig
from tiresias.core import ExperimentRunner, stage_closure
from tiresias.errors import ConfigurationError, TiresiasError
from tiresias.storage import ArtifactRepository

pytestmark = pytest.mark.integration

HEAT_ROUTE = {"route": "heat", "j_target": 2}
SPECTRAL_DATA_ROUTE = {"route": "spectral-data", "heat_report": False}


def small_config(**overrides) -> ExperimentConfig:
    data = {
        "name": "circle-32-quarter",
        "space": {"builder": "circle", "n_vertices": 32},
        "window": {"rule": "arc", "count": 8, "t_min": 0.5, "t_max": 20.0},
        "extraction": HEAT_ROUTE,
        "control": {
            "time_step": 0.25,
            "ks": [2, 4],
            "net_size": 2,
            "candidates": "ground-truth",
            "max_points": 4,
            "volume_taus": [0.5, 1.0],
        },
        "reconstruction": {"calibrate": False, "dimensions": [1, 2], "density_t_max": 1.0},
        "stability": {"magnitudes": [0.0, 0.01], "run_pipeline": False},
    }
    data.update(overrides)
    return ExperimentConfig(**data)


@pytest.fixture
def repository(tmp_path) -> ArtifactRepository:
    """Empty run directory."""
    return ArtifactRepository(tmp_path / "run", config_hash="test", seed=0)


class TestStageClosure:
    """Tests for stage dependency resolution."""

    def test_dependencies_run_first(self):
        """Test that a stage pulls in its ancestors in order."""
        assert stage_closure("extract") == ["build", "observe", "extract"]
        assert stage_closure("stability") == ["build", "stability"]

    def test_unknown_stage(self):
        """Test that an unknown stage is a configuration error."""
        with pytest.raises(ConfigurationError, match="unknown stage"):
            stage_closure("render")


class TestExperimentRunner:
    """Tests running real stages."""

    def test_run_until_extract(self, repository):
        """Test build, observe and extract with validation metrics."""
        runner = ExperimentRunner(
            small_config(validation=True, extraction=SPECTRAL_DATA_ROUTE), repository
        )

        stats = runner.run(until="extract")

        assert [r.stage for r in stats.results] == ["build", "observe", "extract"]
        assert stats.success_rate == 100.0
        for name in ("space.json", "observation.csv", "extracted.json", "trace.csv", "summary.json"):
            assert repository.exists(name)
        metrics = {row.key: row.value for row in stats.summary.rows}
        assert metrics["build.vertices"] == 32.0
        assert metrics["observe.window_size"] == 8.0
        assert metrics["extract.mass_rel_error"] < 1e-10

    def test_audit_records_ground_truth_reads(self, repository):
        """Test that the audit separates window inputs from ground truth."""
        ExperimentRunner(small_config(validation=False), repository).run(until="extract")

        audit = repository.read_json("audit.json")

        assert audit["validation"] is False
        assert not audit["stages"]["observe"]["ground_truth_access"]
        assert "heat_samples|V" in audit["stages"]["extract"]["consumed"]
        assert not audit["stages"]["extract"]["ground_truth_access"]
        assert "eigenfunctions|V" not in audit["stages"]["extract"]["consumed"]

    def test_spectral_data_route_needs_validation(self, repository):
        """Test that the spectral-data route refuses to run without validation."""
        runner = ExperimentRunner(
            small_config(validation=False, extraction=SPECTRAL_DATA_ROUTE), repository
        )

        with pytest.raises(ConfigurationError, match="spectral-data route") as exc_info:
            runner.run(until="extract")

        assert exc_info.value.stage == "extract"
        assert runner.failed_stage == "extract"
        assert not repository.exists("extracted.json")
        assert repository.exists("summary.json")

    def test_spectral_data_route_is_a_ground_truth_read(self, repository):
        """Test that the audit marks the spectral-data route as reading ground truth."""
        ExperimentRunner(
            small_config(validation=True, extraction=SPECTRAL_DATA_ROUTE), repository
        ).run(until="extract")

        extract = repository.read_json("audit.json")["stages"]["extract"]
        assert extract["ground_truth_access"]
        assert "eigenfunctions|V" in extract["consumed"]

    def test_ground_truth_candidates_need_validation(self, repository):
        """Test that the control stage refuses to read true profiles without validation."""
        runner = ExperimentRunner(small_config(validation=False), repository)

        with pytest.raises(ConfigurationError) as exc_info:
            runner.run(until="control")

        assert exc_info.value.stage == "control"
        assert runner.failed_stage == "control"
        assert repository.exists("summary.json")
        assert repository.exists("volumes.csv")

    def test_baseline_failure_is_reported(self, repository):
        """Test that a violated baseline makes the run fail its verdict."""
        config = small_config(baselines={"build.vertices": {"value": 16.0, "comparator": "le"}})

        stats = ExperimentRunner(config, repository).run(until="build")

        assert stats.succeeded == 1
        assert not stats.all_pass
        assert stats.summary.failures[0].key == "build.vertices"

    def test_stability_rigidity(self, repository):
        """Test that a relabeled copy has zero distortion."""
        stats = ExperimentRunner(small_config(), repository).run(until="stability")

        metrics = {row.key: row.value for row in stats.summary.rows}
        assert metrics["stability.rigidity_distortion"] == 0.0
        assert metrics["stability.rigidity_heat_ratio_eps"] < 1e-8
        assert repository.exists("ladder.csv")
        assert repository.read_json("stability.json")["forward_study"] is True

    @pytest.mark.slow
    def test_profile_search_candidates(self, repository):
        """Test a control stage that searches the profile lattice instead of reading truth."""
        control = {
            "time_step": 0.25,
            "ks": [2, 4],
            "net_size": 2,
            "candidates": "search",
            "max_points": 4,
            "volume_taus": [0.5],
        }
        config = small_config(validation=True, extraction=SPECTRAL_DATA_ROUTE, control=control)

        stats = ExperimentRunner(config, repository).run(until="control")

        metrics = {row.key: row.value for row in stats.summary.rows}
        assert stats.success_rate == 100.0
        assert metrics["control.accepted_profiles"] >= 1.0
        profiles = repository.read_table("profiles.csv")
        assert profiles["accepted"].sum() == metrics["control.accepted_profiles"]

    @pytest.mark.slow
    def test_full_run_leaves_summary(self, repository):
        """Test that a full run writes its summary whether or not a late stage fails."""
        runner = ExperimentRunner(small_config(validation=True), repository)

        try:
            stats = runner.run()
        except TiresiasError:
            assert runner.failed_stage in ("control", "reconstruct", "stability")
        else:
            assert stats.succeeded == len(stats.results)
            assert repository.exists("reconstruction.json")
        assert repository.exists("summary.json")
        assert repository.exists("volumes.csv")
        assert repository.read_json("audit.json")["stages"]["control"]["ground_truth_access"]
