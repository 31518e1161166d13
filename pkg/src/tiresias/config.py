"""
Configuration management for Tiresias using Pydantic Settings.

This module provides type-safe experiment configuration loaded from
environment variables and YAML experiment files, with validation.
"""

import hashlib
import json
from pathlib import Path
from typing import Any, Literal

import yaml
from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, SettingsConfigDict

from tiresias.errors import ConfigurationError

HASH_EXCLUDED = {"output", "logging"}


def _parse_json_list(v: Any) -> Any:
    """Parse a list from a JSON string (environment variables)."""
    if isinstance(v, str):
        return json.loads(v)
    return v


class SpaceConfig(BaseSettings):
    """Configuration of the simulated space."""

    builder: Literal["circle", "interval", "torus"] = Field(
        default="circle", description="Exemplar builder"
    )
    n_vertices: int = Field(default=128, ge=8, description="Vertices of a circle or interval")
    radius: float = Field(default=1.0, gt=0, description="Circle radius")
    length: float = Field(default=1.0, gt=0, description="Interval length")
    density_profile: str = Field(default="uniform", description="Interval density profile")
    torus_shape: tuple[int, int] = Field(default=(32, 32), description="Torus mesh shape")
    quotient: Literal["none", "reflection", "antipodal"] = Field(
        default="none", description="Quotient by an isometric involution"
    )

    model_config = SettingsConfigDict(env_prefix="SPACE__")


class WindowConfig(BaseSettings):
    """Configuration of the observation window V and its time grid."""

    rule: Literal["all", "arc", "ball", "vertices"] = Field(
        default="arc", description="Window selection rule"
    )
    start: int = Field(default=0, ge=0, description="First vertex of an arc window")
    fraction: float = Field(default=0.25, gt=0, le=1, description="Arc size as a vertex fraction")
    count: int | None = Field(default=None, ge=1, description="Arc size in vertices")
    centre: int = Field(default=0, ge=0, description="Centre of a ball window")
    ball_radius: float = Field(default=0.5, gt=0, description="Radius of a ball window")
    vertices: list[int] = Field(default_factory=list, description="Explicit window vertices")
    t_min: float = Field(default=0.05, gt=0, description="First observation time")
    t_max: float = Field(default=20.0, gt=0, description="Last observation time")
    points_per_decade: int = Field(default=16, ge=2, description="Geometric grid density")
    noise: float = Field(default=0.0, ge=0, description="Relative observation noise")

    model_config = SettingsConfigDict(env_prefix="WINDOW__")

    @field_validator("vertices", mode="before")
    @classmethod
    def parse_vertices(cls, v: Any) -> Any:
        """Parse vertices from JSON string if needed."""
        return _parse_json_list(v)

    @model_validator(mode="after")
    def check_grid(self) -> "WindowConfig":
        """The time grid must be increasing."""
        if self.t_min >= self.t_max:
            raise ValueError(f"t_min ({self.t_min}) must be below t_max ({self.t_max})")
        return self

    def selection_params(self) -> dict[str, Any]:
        """Keyword arguments for ``select_window``."""
        if self.rule == "arc":
            return {"start": self.start, "count": self.count, "fraction": self.fraction}
        if self.rule == "ball":
            return {"centre": self.centre, "radius": self.ball_radius}
        if self.rule == "vertices":
            return {"vertices": self.vertices}
        return {}


class SpectralConfig(BaseSettings):
    """Configuration of the forward eigensolve."""

    j_max: int | None = Field(default=None, ge=1, description="Modes to compute (default all)")
    gap_tol: float | None = Field(default=None, gt=0, description="Cluster threshold")

    model_config = SettingsConfigDict(env_prefix="SPECTRAL__")


class ExtractionConfig(BaseSettings):
    """Configuration of spectral extraction on V."""

    route: Literal["heat", "spectral-data"] = Field(
        default="heat", description="Data feeding the continuation stages"
    )
    heat_report: bool = Field(
        default=True, description="Run the heat extractor even when the route is spectral-data"
    )
    j_target: int = Field(default=6, ge=1, description="Non-constant clusters to recover")
    guard_components: int = Field(default=2, ge=0, description="Discarded extra components")
    rank_rel_tol: float = Field(default=1e-6, gt=0, description="Relative rank threshold")
    residual_tol: float = Field(default=1e-6, gt=0, description="Kernel fit residual flag")
    gap_tol: float | None = Field(default=None, gt=0, description="Rate merge threshold")
    continuation_modes: int | None = Field(
        default=None, ge=1, description="Modes kept on the spectral-data route"
    )
    mass_draws: int = Field(default=0, ge=0, description="Monte Carlo draws for the mass error bar")

    model_config = SettingsConfigDict(env_prefix="EXTRACTION__")


class ControlConfig(BaseSettings):
    """Configuration of the Boundary Control stage."""

    time_step: float = Field(default=0.1, gt=0, description="Hat spacing of the source basis")
    rcond: float = Field(default=1e-3, gt=0, description="Relative singular-value cut")
    vol_fraction: float = Field(default=0.5, gt=0, le=1, description="Slice acceptance fraction")
    ks: list[int] = Field(default=[2, 4], description="Shrink schedule")
    lattice_step: float | None = Field(
        default=None, gt=0, description="Candidate lattice spacing (default: mesh size)"
    )
    net_size: int = Field(default=4, ge=1, description="Net points in the window")
    candidates: Literal["ground-truth", "search"] = Field(
        default="search", description="Source of candidate profiles"
    )
    max_radius: float = Field(default=3.2, gt=0, description="Largest candidate distance")
    max_candidates: int = Field(default=20000, ge=1, description="Search truncation")
    max_points: int = Field(default=32, ge=0, description="Interior points continued")
    volume_taus: list[float] = Field(
        default=[0.25, 0.5, 0.75, 1.0, 1.25], description="τ grid of the volume report"
    )

    model_config = SettingsConfigDict(env_prefix="CONTROL__")

    @field_validator("ks", "volume_taus", mode="before")
    @classmethod
    def parse_lists(cls, v: Any) -> Any:
        """Parse lists from JSON strings if needed."""
        return _parse_json_list(v)

    @field_validator("ks")
    @classmethod
    def check_ks(cls, v: list[int]) -> list[int]:
        """Shrink parameters must be positive and increasing."""
        if not v or any(k < 1 for k in v) or sorted(set(v)) != v:
            raise ValueError("ks must be positive, distinct and increasing")
        return v


class ReconstructionConfig(BaseSettings):
    """Configuration of distance and density reconstruction."""

    floor_factor: float = Field(default=10.0, gt=0, description="Discretization floor factor")
    varadhan_t_max: float = Field(default=1.0, gt=0, description="End of the Varadhan grid")
    density_t_max: float | None = Field(
        default=0.1, gt=0, description="End of the density fit window"
    )
    window_points: int = Field(default=16, ge=3, description="Varadhan fit window length")
    dimensions: list[int] = Field(default=[1, 2, 3], description="Candidate dimensions")
    calibrate: bool = Field(default=True, description="Calibrate κ_n on uniform exemplars")
    calibration_vertices: int = Field(
        default=512, ge=8, description="Vertices of the 1-D calibration exemplar"
    )
    varadhan_on_window: bool = Field(
        default=False, description="Fit window pairs instead of using the V metric"
    )

    model_config = SettingsConfigDict(env_prefix="RECONSTRUCTION__")

    @field_validator("dimensions", mode="before")
    @classmethod
    def parse_dimensions(cls, v: Any) -> Any:
        """Parse dimensions from JSON string if needed."""
        return _parse_json_list(v)


class StabilityConfig(BaseSettings):
    """Configuration of the stability checks."""

    enabled: bool = Field(default=True, description="Run the stability stage")
    magnitudes: list[float] = Field(
        default=[0.0025, 0.005, 0.01], description="Edge-length perturbation ladder"
    )
    perturbation_seed: int = Field(default=0, ge=0, description="Perturbation direction seed")
    run_pipeline: bool = Field(default=False, description="Extend maps through the pipeline")
    rigidity_check: bool = Field(default=True, description="Relabeled-copy rigidity check")
    net_size: int = Field(default=3, ge=1, description="Net points of the extension runs")

    model_config = SettingsConfigDict(env_prefix="STABILITY__")

    @field_validator("magnitudes", mode="before")
    @classmethod
    def parse_magnitudes(cls, v: Any) -> Any:
        """Parse magnitudes from JSON string if needed."""
        return _parse_json_list(v)


class WaveConfig(BaseSettings):
    """Configuration of the finite-propagation study."""

    propagation_study: bool = Field(default=False, description="Run the refinement study")
    levels: list[int] = Field(default=[64, 256, 1024], description="Circle refinement levels")
    cone_radius: float = Field(default=2.0, gt=0, description="Cone radius")
    pulse_width: float = Field(default=1.0, gt=0, description="Width of the antipodal pulse")
    time_samples: int = Field(default=64, ge=2, description="Samples of [0, r)")

    model_config = SettingsConfigDict(env_prefix="WAVE__")

    @field_validator("levels", mode="before")
    @classmethod
    def parse_levels(cls, v: Any) -> Any:
        """Parse levels from JSON string if needed."""
        return _parse_json_list(v)


class OutputConfig(BaseSettings):
    """Configuration of the artifact tree."""

    directory: Path | None = Field(
        default=None, description="Run directory (default under the XDG data home)"
    )
    float_format: str = Field(default="%.17g", description="Float format of columnar files")

    model_config = SettingsConfigDict(env_prefix="OUTPUT__")


class LoggingConfig(BaseSettings):
    """Configuration for logging."""

    level: str = Field(default="INFO", description="Logging level")
    format: str = Field(default="json", description="Log format (json or text)")

    model_config = SettingsConfigDict(env_prefix="LOGGING__")


class Baseline(BaseModel):
    """Recorded baseline of one summary metric."""

    value: float
    tolerance: float = Field(default=1e-9, gt=0)
    comparator: Literal["le", "ge", "abs", "rel"] = "le"

    def passes(self, measured: float) -> bool:
        """Whether ``measured`` satisfies the baseline."""
        if self.comparator == "le":
            return measured <= self.value + self.tolerance
        if self.comparator == "ge":
            return measured >= self.value - self.tolerance
        if self.comparator == "abs":
            return abs(measured - self.value) <= self.tolerance
        return abs(measured - self.value) <= self.tolerance * abs(self.value)


class ExperimentConfig(BaseSettings):
    """Main configuration class that combines all sub-configurations."""

    name: str = Field(default="experiment", description="Experiment name")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Seed of every random draw")
    validation: bool = Field(default=False, description="Allow stages to read ground truth")
    baselines: dict[str, Baseline] = Field(default_factory=dict, description="Recorded baselines")

    space: SpaceConfig = Field(default_factory=SpaceConfig)  # type: ignore[arg-type]
    window: WindowConfig = Field(default_factory=WindowConfig)  # type: ignore[arg-type]
    spectral: SpectralConfig = Field(default_factory=SpectralConfig)  # type: ignore[arg-type]
    extraction: ExtractionConfig = Field(default_factory=ExtractionConfig)  # type: ignore[arg-type]
    control: ControlConfig = Field(default_factory=ControlConfig)  # type: ignore[arg-type]
    reconstruction: ReconstructionConfig = Field(default_factory=ReconstructionConfig)  # type: ignore[arg-type]
    stability: StabilityConfig = Field(default_factory=StabilityConfig)  # type: ignore[arg-type]
    wave: WaveConfig = Field(default_factory=WaveConfig)  # type: ignore[arg-type]
    output: OutputConfig = Field(default_factory=OutputConfig)  # type: ignore[arg-type]
    logging: LoggingConfig = Field(default_factory=LoggingConfig)  # type: ignore[arg-type]

    model_config = SettingsConfigDict(env_file=".env", env_nested_delimiter="__", extra="ignore")


def config_hash(config: ExperimentConfig) -> str:
    """SHA-256 of the canonical JSON dump, without output and logging settings."""
    payload = config.model_dump(mode="json", exclude=HASH_EXCLUDED)
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode()).hexdigest()


def check_discretization_floor(config: ExperimentConfig, mesh_size: float) -> None:
    """Refuse grids that start below floor_factor·h².

    Raises:
        ConfigurationError: If window.t_min is below the floor
    """
    floor = config.reconstruction.floor_factor * mesh_size**2
    if config.window.t_min < floor:
        raise ConfigurationError(
            "t_min is below the discretization floor",
            details={"t_min": config.window.t_min, "floor": floor, "mesh_size": mesh_size},
        )


def apply_overrides(
    config: ExperimentConfig,
    seed: int | None = None,
    validation: bool | None = None,
    directory: Path | None = None,
) -> ExperimentConfig:
    """Copy of ``config`` with command-line overrides applied."""
    update: dict[str, Any] = {}
    if seed is not None:
        update["seed"] = seed
    if validation is not None:
        update["validation"] = validation
    if directory is not None:
        update["output"] = config.output.model_copy(update={"directory": directory})
    return config.model_copy(update=update)


def load_config(env_file: str | None = None) -> ExperimentConfig:
    """
    Load configuration from environment variables and optional .env file.

    Args:
        env_file: Optional path to .env file. If None, uses default .env

    Returns:
        Validated ExperimentConfig instance

    Raises:
        ValidationError: If configuration is invalid
    """
    if env_file:
        return ExperimentConfig(_env_file=env_file)  # type: ignore[call-arg]
    return ExperimentConfig()


def load_config_from_yaml(yaml_file: Path) -> ExperimentConfig:
    """
    Load configuration from a YAML experiment file.

    Args:
        yaml_file: Path to YAML experiment file

    Returns:
        Validated ExperimentConfig instance

    Raises:
        FileNotFoundError: If YAML file doesn't exist
        ValidationError: If configuration is invalid
    """
    with open(yaml_file) as f:
        data = yaml.safe_load(f) or {}

    return ExperimentConfig(**data)


def _deep_update(target: dict[str, Any], overrides: dict[str, Any]) -> None:
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(target.get(key), dict):
            _deep_update(target[key], value)
        else:
            target[key] = value


def merge_configs(
    yaml_config: ExperimentConfig | None = None, env_config: ExperimentConfig | None = None
) -> ExperimentConfig:
    """
    Merge YAML configuration with environment variable configuration.

    Fields the environment sets explicitly take precedence over YAML settings.

    Args:
        yaml_config: Configuration loaded from YAML
        env_config: Configuration loaded from environment

    Returns:
        Merged ExperimentConfig instance
    """
    if yaml_config is None and env_config is None:
        return ExperimentConfig()

    if yaml_config is None:
        return env_config or ExperimentConfig()

    if env_config is None:
        return yaml_config

    merged = yaml_config.model_dump()
    _deep_update(merged, env_config.model_dump(exclude_unset=True))
    return ExperimentConfig(**merged)
