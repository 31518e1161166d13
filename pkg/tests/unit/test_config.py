"""
Tests for configuration management.
"""

from pathlib import Path

import pytest
import yaml
from pydantic import ValidationError
from tiresias.config import (
    Baseline,
    ControlConfig,
    ExperimentConfig,
    LoggingConfig,
    SpaceConfig,
    WindowConfig,
    apply_overrides,
    check_discretization_floor,
    config_hash,
    load_config,
    load_config_from_yaml,
    merge_configs,
)
from tiresias.errors import ConfigurationError

EXPERIMENTS = Path(__file__).resolve().parents[2] / "experiments"


class TestSpaceConfig:
    """Tests for SpaceConfig."""

    def test_default_values(self):
        """Test default space configuration."""
        config = SpaceConfig()

        assert config.builder == "circle"
        assert config.n_vertices == 128
        assert config.quotient == "none"

    def test_from_env(self, monkeypatch):
        """Test loading space config from environment."""
        monkeypatch.setenv("SPACE__BUILDER", "interval")
        monkeypatch.setenv("SPACE__N_VERTICES", "64")

        config = SpaceConfig()

        assert config.builder == "interval"
        assert config.n_vertices == 64

    def test_too_few_vertices_fails(self):
        """Test that fewer than eight vertices are rejected."""
        with pytest.raises(ValidationError):
            SpaceConfig(n_vertices=4)

    def test_unknown_builder_fails(self):
        """Test that the builder must be a known exemplar."""
        with pytest.raises(ValidationError):
            SpaceConfig(builder="sphere")


class TestWindowConfig:
    """Tests for WindowConfig."""

    def test_selection_params(self):
        """Test keyword arguments per window rule."""
        assert WindowConfig(count=8).selection_params() == {"start": 0, "count": 8, "fraction": 0.25}
        assert WindowConfig(rule="ball", centre=3).selection_params() == {"centre": 3, "radius": 0.5}
        assert WindowConfig(rule="all").selection_params() == {}

    def test_vertices_from_json_string(self, monkeypatch):
        """Test parsing explicit vertices from the environment."""
        monkeypatch.setenv("WINDOW__RULE", "vertices")
        monkeypatch.setenv("WINDOW__VERTICES", "[1, 2, 5]")

        config = WindowConfig()

        assert config.selection_params() == {"vertices": [1, 2, 5]}

    def test_grid_must_increase(self):
        """Test that t_min must be below t_max."""
        with pytest.raises(ValidationError) as exc_info:
            WindowConfig(t_min=2.0, t_max=1.0)

        assert "t_min" in str(exc_info.value)


class TestControlConfig:
    """Tests for ControlConfig."""

    def test_default_values(self):
        """Test default control configuration."""
        config = ControlConfig()

        assert config.ks == [2, 4]
        assert config.vol_fraction == 0.5
        assert config.candidates == "search"
        assert config.lattice_step is None

    def test_ks_from_json_string(self, monkeypatch):
        """Test parsing the shrink schedule from the environment."""
        monkeypatch.setenv("CONTROL__KS", "[2, 4, 8]")

        assert ControlConfig().ks == [2, 4, 8]

    def test_ks_must_increase(self):
        """Test that the shrink schedule must be increasing."""
        with pytest.raises(ValidationError):
            ControlConfig(ks=[4, 2])
        with pytest.raises(ValidationError):
            ControlConfig(ks=[0, 2])


class TestLoggingConfig:
    """Tests for LoggingConfig."""

    def test_default_values(self):
        """Test default logging configuration."""
        config = LoggingConfig()

        assert config.level == "INFO"
        assert config.format == "json"

    def test_from_env(self, monkeypatch):
        """Test loading logging config from environment."""
        monkeypatch.setenv("LOGGING__LEVEL", "DEBUG")
        monkeypatch.setenv("LOGGING__FORMAT", "text")

        config = LoggingConfig()

        assert config.level == "DEBUG"
        assert config.format == "text"


class TestBaseline:
    """Tests for baseline comparators."""

    def test_comparators(self):
        """Test le, ge, abs and rel verdicts."""
        assert Baseline(value=0.05).passes(0.04)
        assert not Baseline(value=0.05).passes(0.06)
        assert Baseline(value=1.0, comparator="ge").passes(1.5)
        assert Baseline(value=0.0, comparator="abs", tolerance=1e-12).passes(1e-13)
        assert not Baseline(value=2.0, comparator="rel", tolerance=0.01).passes(2.1)
        assert Baseline(value=2.0, comparator="rel", tolerance=0.1).passes(2.1)

    def test_tolerance_must_be_positive(self):
        """Test baseline validation."""
        with pytest.raises(ValidationError):
            Baseline(value=1.0, tolerance=0.0)


class TestExperimentConfig:
    """Tests for the combined experiment configuration."""

    def test_config_from_env(self, monkeypatch):
        """Test loading nested settings from environment variables."""
        monkeypatch.setenv("SEED", "7")
        monkeypatch.setenv("SPACE__N_VERTICES", "64")

        config = load_config()

        assert isinstance(config, ExperimentConfig)
        assert config.seed == 7
        assert config.space.n_vertices == 64
        assert config.control.ks == [2, 4]

    def test_config_from_yaml(self, tmp_path):
        """Test loading config from a YAML experiment file."""
        content = {
            "name": "small-circle",
            "validation": True,
            "space": {"builder": "circle", "n_vertices": 16},
            "window": {"rule": "arc", "count": 4},
            "baselines": {"extract.mass_rel_error": {"value": 0.0, "tolerance": 1e-6}},
        }
        path = tmp_path / "experiment.yaml"
        path.write_text(yaml.dump(content))

        config = load_config_from_yaml(path)

        assert config.name == "small-circle"
        assert config.validation
        assert config.space.n_vertices == 16
        assert config.window.count == 4
        assert config.baselines["extract.mass_rel_error"].tolerance == 1e-6

    def test_empty_yaml_gives_defaults(self, tmp_path):
        """Test that an empty file is a default experiment."""
        path = tmp_path / "empty.yaml"
        path.write_text("")

        assert load_config_from_yaml(path).name == "experiment"

    @pytest.mark.parametrize("name", ["circle_quarter_arc", "interval_linear_density", "torus"])
    def test_shipped_experiments_validate(self, name):
        """Test that every shipped experiment file is a valid configuration."""
        config = load_config_from_yaml(EXPERIMENTS / f"{name}.yaml")

        assert config.name

    def test_env_overrides_yaml(self, tmp_path, monkeypatch):
        """Test that explicitly set environment values win over YAML."""
        path = tmp_path / "experiment.yaml"
        path.write_text(yaml.dump({"name": "from-yaml", "space": {"builder": "interval"}}))
        yaml_config = load_config_from_yaml(path)

        monkeypatch.setenv("SPACE__N_VERTICES", "48")
        merged = merge_configs(yaml_config, load_config())

        assert merged.name == "from-yaml"
        assert merged.space.builder == "interval"
        assert merged.space.n_vertices == 48

    def test_merge_with_missing_sides(self):
        """Test merging when one side is absent."""
        config = ExperimentConfig(name="only")

        assert merge_configs(config, None) is config
        assert merge_configs(None, config) is config
        assert merge_configs().name == "experiment"


class TestConfigHash:
    """Tests for the configuration hash."""

    def test_hash_is_stable(self):
        """Test that equal configurations hash equally."""
        assert config_hash(ExperimentConfig(seed=3)) == config_hash(ExperimentConfig(seed=3))

    def test_hash_tracks_experiment_settings(self):
        """Test that the seed changes the hash."""
        assert config_hash(ExperimentConfig(seed=1)) != config_hash(ExperimentConfig(seed=2))

    def test_hash_ignores_output_and_logging(self, tmp_path):
        """Test that output and logging settings do not change the hash."""
        base = ExperimentConfig()
        moved = apply_overrides(base, directory=tmp_path)
        noisy = base.model_copy(update={"logging": LoggingConfig(level="DEBUG")})

        assert config_hash(moved) == config_hash(base)
        assert config_hash(noisy) == config_hash(base)


class TestOverridesAndChecks:
    """Tests for command-line overrides and data-dependent checks."""

    def test_apply_overrides(self, tmp_path):
        """Test seed, validation and directory overrides."""
        config = apply_overrides(ExperimentConfig(), seed=9, validation=True, directory=tmp_path)

        assert config.seed == 9
        assert config.validation
        assert config.output.directory == tmp_path

    def test_no_overrides_keep_values(self):
        """Test that absent overrides leave the configuration alone."""
        config = apply_overrides(ExperimentConfig(seed=4))

        assert config.seed == 4
        assert not config.validation

    def test_discretization_floor(self):
        """Test that t_min below floor_factor·h² is refused."""
        config = ExperimentConfig()

        check_discretization_floor(config, mesh_size=0.05)
        with pytest.raises(ConfigurationError) as exc_info:
            check_discretization_floor(config, mesh_size=0.1)

        assert exc_info.value.stage == "config"
        assert exc_info.value.details["floor"] == pytest.approx(0.1)
