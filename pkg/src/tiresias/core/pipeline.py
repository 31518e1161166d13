"""Experiment runner for the heat-kernel inverse-problem pipeline.

This module provides the ExperimentRunner class that orchestrates the stages
of one experiment: building the space, sampling the window observation,
extracting spectral data, running Boundary Control, reconstructing the space
and measuring stability. Every stage writes its artifacts through an
ArtifactRepository and adds its metrics to the run summary.
"""

import json
import time
from collections.abc import Callable, Sequence
from dataclasses import asdict, dataclass, field
from typing import Any

import numpy as np
import pandas as pd

from tiresias.config import ExperimentConfig, check_discretization_floor, config_hash
from tiresias.control import (
    ProfileSearchResult,
    ProjectionEngine,
    domain_of_influence,
    recover_distance_function,
    recover_point_eigenvalues,
    search_profiles,
    true_profiles,
)
from tiresias.core.summary import SummaryTable
from tiresias.errors import ConfigurationError, TiresiasError
from tiresias.gelfand import (
    ExtractedSpectrum,
    SpectralExtractor,
    heat_trace_on_V,
    monte_carlo_mass,
    window_spectral_data,
)
from tiresias.mms import (
    DiscreteSpace,
    build_circle,
    build_torus_mesh,
    build_weighted_interval,
    dumps_space,
    farthest_point_net,
    quotient_space,
    reflection,
    relabel,
    select_window,
    torus_antipodal_map,
)
from tiresias.mms.builders import DENSITY_PROFILES
from tiresias.reconstruct import (
    DensityCalibration,
    ReconstructionResult,
    ReferenceData,
    analytic_constant,
    assemble_space,
    calibrate_density_constant,
    discretization_floor,
    gauge_aligned_error,
    varadhan_frame,
)
from tiresias.spectral import (
    ObservationWindow,
    SpectralData,
    eigensolve,
    export_observation,
    geometric_grid,
    heat_kernel_stack,
    sample_observation,
)
from tiresias.stability import (
    PipelineSettings,
    VertexMap,
    approximation_report,
    extend_map_via_pipeline,
    stability_ladder,
)
from tiresias.storage import ArtifactRepository
from tiresias.utils.logging import bind_stage, clear_stage, get_logger
from tiresias.wave import circle_pulse_case, finite_propagation_diagnostic

logger = get_logger(__name__, component="ExperimentRunner")

STAGES = ("build", "observe", "extract", "control", "reconstruct", "stability")

DEPENDENCIES: dict[str, tuple[str, ...]] = {
    "build": (),
    "observe": ("build",),
    "extract": ("observe",),
    "control": ("extract",),
    "reconstruct": ("control",),
    "stability": ("build",),
}

WINDOW_INPUTS = ("heat_samples|V", "t_grid", "measure|V", "distance|V")

TORUS_CALIBRATION_SHAPE = (32, 32)


def stage_closure(until: str) -> list[str]:
    """Stages needed to run ``until``, in execution order.

    Raises:
        ConfigurationError: For unknown stage names
    """
    if until not in DEPENDENCIES:
        raise ConfigurationError("unknown stage", details={"stage": until, "known": list(STAGES)})
    needed = {until}
    frontier = [until]
    while frontier:
        for parent in DEPENDENCIES[frontier.pop()]:
            if parent not in needed:
                needed.add(parent)
                frontier.append(parent)
    return [stage for stage in STAGES if stage in needed]


@dataclass
class StageResult:
    """Result of running a single stage.

    Attributes:
        stage: Stage name
        succeeded: Whether the stage completed
        metrics: Summary metrics produced by the stage
        artifacts: Artifact names written by the stage
        error: Error message if the stage failed
        duration_seconds: Wall time of the stage
    """

    stage: str
    succeeded: bool
    metrics: dict[str, float] = field(default_factory=dict)
    artifacts: list[str] = field(default_factory=list)
    error: str | None = None
    duration_seconds: float = 0.0


@dataclass
class RunStats:
    """Statistics from an experiment run.

    Attributes:
        config_hash: Hash of the experiment configuration
        seed: Seed of every random draw
        results: One StageResult per attempted stage
        summary: Summary table judged against the recorded baselines
        duration_seconds: Total duration of the run
    """

    config_hash: str
    seed: int
    results: list[StageResult]
    summary: SummaryTable
    duration_seconds: float = 0.0

    @property
    def succeeded(self) -> int:
        """Number of completed stages."""
        return sum(1 for r in self.results if r.succeeded)

    @property
    def success_rate(self) -> float:
        """Completed stages as a percentage of attempted ones."""
        if not self.results:
            return 0.0
        return (self.succeeded / len(self.results)) * 100

    @property
    def all_pass(self) -> bool:
        """Whether every stage completed and no baseline failed."""
        return self.succeeded == len(self.results) and self.summary.all_pass


def _build_space(config: ExperimentConfig) -> DiscreteSpace:
    settings = config.space
    if settings.builder == "circle":
        space = build_circle(settings.n_vertices, settings.radius)
    elif settings.builder == "interval":
        space = build_weighted_interval(
            settings.n_vertices, settings.length, settings.density_profile
        )
    else:
        space = build_torus_mesh(*settings.torus_shape)

    if settings.quotient == "reflection":
        if settings.builder != "circle":
            raise ConfigurationError(
                "reflection quotient needs a circle", details={"builder": settings.builder}
            )
        space = quotient_space(space, reflection(space.vertex_count))
    elif settings.quotient == "antipodal":
        if settings.builder != "torus":
            raise ConfigurationError(
                "antipodal quotient needs a torus", details={"builder": settings.builder}
            )
        space = quotient_space(space, torus_antipodal_map(*settings.torus_shape))
    return space


def _true_density(config: ExperimentConfig, space: DiscreteSpace) -> np.ndarray | None:
    """Continuum density behind the exemplar (None for quotients)."""
    if config.space.quotient != "none":
        return None
    if config.space.builder == "interval" and space.coordinates is not None:
        profile = DENSITY_PROFILES[config.space.density_profile]
        return np.asarray(profile(space.coordinates[:, 0]), dtype=float)
    return np.ones(space.vertex_count)


def _spectrum_payload(extracted: ExtractedSpectrum) -> dict[str, Any]:
    return {
        "space": extracted.space_name,
        "provenance": extracted.provenance,
        "vertices": extracted.vertices,
        "mass": extracted.mass,
        "mass_error": extracted.mass_error,
        "eigenvalues": extracted.eigenvalues,
        "eigenfunctions": extracted.eigenfunctions,
        "clusters": [list(c) for c in extracted.clusters],
        "partial": extracted.partial,
        "diagnostic": extracted.diagnostic,
        "consumed": list(extracted.audit.consumed),
        "conditioning": [
            {
                "cluster": c.cluster,
                "eigenvalue": c.eigenvalue,
                "multiplicity": c.multiplicity,
                "points": list(c.points),
                "min_singular": c.min_singular,
                "reconstruction_residual": c.reconstruction_residual,
                "window_weight": c.window_weight,
            }
            for c in extracted.conditioning
        ],
        "metadata": extracted.metadata,
    }


def _eigenvalue_errors(extracted: ExtractedSpectrum, truth: SpectralData) -> pd.DataFrame:
    count = min(extracted.mode_cutoff, truth.mode_cutoff)
    return pd.DataFrame(
        {
            "mode": np.arange(count),
            "recovered": extracted.eigenvalues[:count],
            "true": truth.eigenvalues[:count],
        }
    )


def _evenly_spaced(count: int, limit: int) -> np.ndarray:
    if count <= limit:
        return np.arange(count)
    return np.unique(np.round(np.linspace(0, count - 1, limit)).astype(np.int64))


class ExperimentRunner:
    """Orchestrate the stages of one experiment.

    Stages run sequentially: build → observe → extract → control →
    reconstruct, with stability depending only on build. Ground truth is
    read only when ``config.validation`` is set, and every read is recorded
    in the audit.

    Example:
        >>> runner = ExperimentRunner(config, ArtifactRepository(Path("runs/demo")))
        >>> stats = runner.run()
        >>> print(stats.success_rate, stats.summary.all_pass)
        >>>
        >>> runner.run(until="extract")
    """

    def __init__(self, config: ExperimentConfig, repository: ArtifactRepository) -> None:
        """Initialize the ExperimentRunner.

        Args:
            config: Validated experiment configuration
            repository: Artifact tree of this run
        """
        self.config = config
        self.repository = repository
        self.config_hash = config_hash(config)
        self.summary = SummaryTable(baselines=dict(config.baselines))
        self._logger = logger
        self._audit: dict[str, dict[str, Any]] = {}
        self.failed_stage: str | None = None

        self.space: DiscreteSpace | None = None
        self.spectrum: SpectralData | None = None
        self.observation: ObservationWindow | None = None
        self.extracted: ExtractedSpectrum | None = None
        self.heat_extraction: ExtractedSpectrum | None = None
        self.profiles: ProfileSearchResult | None = None
        self.point_values: np.ndarray | None = None
        self.point_correspondence: np.ndarray | None = None
        self.reconstruction: ReconstructionResult | None = None

        self._handlers: dict[str, Callable[[StageResult], None]] = {
            "build": self._build,
            "observe": self._observe,
            "extract": self._extract,
            "control": self._control,
            "reconstruct": self._reconstruct,
            "stability": self._stability,
        }

    def run(self, until: str | None = None) -> RunStats:
        """Run every stage up to ``until`` (default: all stages).

        The summary and audit are written even when a stage fails; the
        failure is then re-raised.

        Args:
            until: Last stage to run; its dependencies run first

        Returns:
            RunStats with per-stage results and the summary table

        Raises:
            TiresiasError: The first stage failure, with the stage attached
        """
        if until is None:
            stages = [s for s in STAGES if s != "stability" or self.config.stability.enabled]
        else:
            stages = stage_closure(until)

        self._logger.info(
            "run_start",
            experiment=self.config.name,
            stages=stages,
            config_hash=self.config_hash,
            seed=self.config.seed,
            validation=self.config.validation,
        )
        start = time.monotonic()
        results: list[StageResult] = []
        try:
            for stage in stages:
                results.append(self._run_stage(stage))
        finally:
            self._write_summary()
            stats = RunStats(
                config_hash=self.config_hash,
                seed=self.config.seed,
                results=results,
                summary=self.summary,
                duration_seconds=time.monotonic() - start,
            )
            self._logger.info(
                "run_complete",
                stages=len(results),
                succeeded=stats.succeeded,
                all_pass=self.summary.all_pass,
                duration_seconds=round(stats.duration_seconds, 3),
            )
        return stats

    def _run_stage(self, stage: str) -> StageResult:
        bind_stage(stage, self.config_hash)
        result = StageResult(stage=stage, succeeded=False)
        start = time.monotonic()
        self._logger.info("stage_start")
        try:
            self._handlers[stage](result)
        except TiresiasError as e:
            self.failed_stage = stage
            result.error = str(e)
            result.duration_seconds = time.monotonic() - start
            self._logger.error("stage_failed", error=e.message, details=e.details)
            clear_stage()
            raise
        result.succeeded = True
        result.duration_seconds = time.monotonic() - start
        self.summary.extend(stage, result.metrics)
        self._logger.info(
            "stage_complete",
            artifacts=len(result.artifacts),
            duration_seconds=round(result.duration_seconds, 3),
        )
        clear_stage()
        return result

    def _consume(self, stage: str, inputs: Sequence[str], ground_truth: bool = False) -> None:
        """Record the inputs a stage read."""
        entry = self._audit.setdefault(stage, {"consumed": [], "ground_truth_access": False})
        entry["consumed"] = sorted(set(entry["consumed"]) | set(inputs))
        entry["ground_truth_access"] = entry["ground_truth_access"] or ground_truth

    def _require_validation(self, stage: str, purpose: str) -> None:
        if not self.config.validation:
            raise ConfigurationError(
                f"{purpose} reads ground truth; enable validation",
                stage=stage,
                details={"purpose": purpose},
            )

    def _write_json(self, result: StageResult, name: str, payload: Any) -> None:
        self.repository.write_json(name, payload, stage=result.stage)
        result.artifacts.append(name)

    def _write_table(self, result: StageResult, name: str, frame: pd.DataFrame) -> None:
        self.repository.write_table(name, frame, stage=result.stage)
        result.artifacts.append(name)

    def _write_summary(self) -> None:
        self.repository.write_json("summary.json", self.summary.to_payload(), stage="summary")
        self.repository.write_table("summary.csv", self.summary.to_frame(), stage="summary")
        self.repository.write_json(
            "audit.json",
            {"validation": self.config.validation, "stages": self._audit},
            stage="audit",
        )

    # -- stages ---------------------------------------------------------------

    def _build(self, result: StageResult) -> None:
        space = _build_space(self.config)
        self.space = space
        self._write_json(result, "space.json", json.loads(dumps_space(space)))
        self._consume(result.stage, ("space_config",))
        result.metrics.update(
            {
                "vertices": float(space.vertex_count),
                "mesh_size": space.min_edge_length,
                "diameter": space.metadata.diameter,
                "total_mass": space.total_mass,
            }
        )

    def _observe(self, result: StageResult) -> None:
        assert self.space is not None
        settings = self.config.window
        check_discretization_floor(self.config, self.space.min_edge_length)
        self.spectrum = eigensolve(
            self.space, self.config.spectral.j_max, self.config.spectral.gap_tol
        )
        window = select_window(self.space, settings.rule, **settings.selection_params())
        grid = geometric_grid(settings.t_min, settings.t_max, settings.points_per_decade)
        self.observation = sample_observation(
            self.spectrum, self.space, window, grid, settings.noise, self.config.seed
        )
        self._consume(result.stage, ("space", "spectrum"))

        self._write_table(result, "observation.csv", export_observation(self.observation))
        self._write_json(
            result,
            "observation_meta.json",
            {
                "space": self.space.name,
                "vertices": window,
                "t_grid": grid,
                "noise": settings.noise,
                "mesh_size": self.observation.mesh_size,
                "measure_on_V": self.observation.measure_on_V,
            },
        )
        result.metrics.update(
            {
                "window_size": float(window.size),
                "times": float(grid.size),
                "modes": float(self.spectrum.mode_cutoff),
            }
        )

    def _extract(self, result: StageResult) -> None:
        assert self.observation is not None and self.spectrum is not None
        assert self.space is not None
        settings = self.config.extraction
        obs = self.observation
        if settings.route == "spectral-data":
            self._require_validation(result.stage, "spectral-data route")
        self._consume(result.stage, WINDOW_INPUTS)

        if settings.route == "heat" or settings.heat_report:
            extractor = SpectralExtractor(
                j_target=settings.j_target,
                guard_components=settings.guard_components,
                rank_rel_tol=settings.rank_rel_tol,
                residual_tol=settings.residual_tol,
                gap_tol=settings.gap_tol,
            )
            try:
                self.heat_extraction = extractor.extract(obs)
            except TiresiasError as e:
                if settings.route == "heat":
                    raise
                self._logger.warning("heat_report_failed", error=e.message)

        if settings.route == "heat":
            assert self.heat_extraction is not None
            self.extracted = self.heat_extraction
        else:
            self._consume(result.stage, ("eigenvalues", "eigenfunctions|V"), ground_truth=True)
            self.extracted = window_spectral_data(self.spectrum, obs, settings.continuation_modes)

        if settings.mass_draws > 0 and obs.noise_level > 0:
            bar = monte_carlo_mass(
                self.spectrum,
                self.space,
                obs.vertices,
                obs.t_grid,
                obs.noise_level,
                settings.mass_draws,
                self.config.seed,
            )
            result.metrics["mass_std"] = bar.std

        self._write_json(
            result,
            "extracted.json",
            {
                "continuation": _spectrum_payload(self.extracted),
                "heat": (
                    _spectrum_payload(self.heat_extraction)
                    if self.heat_extraction is not None
                    else None
                ),
            },
        )

        reported = self.heat_extraction or self.extracted
        decay = np.exp(-np.outer(obs.t_grid, reported.eigenvalues))
        weights = reported.eigenfunctions**2 @ reported.measure_on_V
        self._write_table(
            result,
            "trace.csv",
            pd.DataFrame({"t": obs.t_grid, "trace": heat_trace_on_V(obs), "fitted": decay @ weights}),
        )

        result.metrics.update(
            {
                "mass": self.extracted.mass,
                "modes": float(self.extracted.mode_cutoff),
                "clusters": float(len(self.extracted.clusters)),
            }
        )
        if self.heat_extraction is not None:
            heat = self.heat_extraction
            result.metrics["heat_modes"] = float(heat.mode_cutoff)
            result.metrics["heat_partial"] = float(heat.partial)

        if self.config.validation:
            self._consume(result.stage, ("ground_truth_spectrum",), ground_truth=True)
            truth = self.spectrum
            self._write_table(result, "eigen_errors.csv", _eigenvalue_errors(reported, truth))
            result.metrics["mass_rel_error"] = abs(reported.mass - truth.total_mass) / truth.total_mass
            count = min(reported.mode_cutoff, truth.mode_cutoff)
            rel = np.abs(reported.eigenvalues[1:count] - truth.eigenvalues[1:count]) / np.abs(
                truth.eigenvalues[1:count]
            )
            result.metrics["eigenvalue_max_rel_error"] = float(rel.max()) if rel.size else 0.0

    def _control(self, result: StageResult) -> None:
        assert self.extracted is not None and self.space is not None
        settings = self.config.control
        extracted = self.extracted
        engine = ProjectionEngine(extracted, settings.time_step, settings.rcond)
        self._consume(result.stage, ("extracted_spectrum",))
        window = tuple(int(v) for v in extracted.vertices)

        rows = []
        for tau in settings.volume_taus:
            estimate = engine.project_constant(window, tau)
            row: dict[str, Any] = {
                "tau": tau,
                "volume": estimate.volume,
                "residual": estimate.residual,
                "converged": estimate.converged,
            }
            if self.config.validation:
                inside = domain_of_influence(self.space, window, tau)
                row["truth"] = float(np.sum(self.space.measure[inside]))
            rows.append(row)
        volumes = pd.DataFrame(rows)
        self._write_table(result, "volumes.csv", volumes)
        result.metrics["volumes_monotone"] = float(volumes["volume"].is_monotonic_increasing)

        net = farthest_point_net(extracted.vertices, extracted.window_distance, settings.net_size)
        lattice_step = settings.lattice_step or extracted.mesh_size
        resolution = 0.5 * lattice_step
        if settings.candidates == "ground-truth":
            self._require_validation(result.stage, "ground-truth candidate profiles")
            self._consume(result.stage, ("true_profiles",), ground_truth=True)
            profiles = recover_distance_function(
                engine,
                net,
                true_profiles(self.space, net),
                settings.ks,
                lattice_step,
                settings.vol_fraction,
            )
        else:
            profiles = search_profiles(
                engine,
                net,
                lattice_step,
                settings.max_radius,
                settings.ks,
                settings.vol_fraction,
                settings.max_candidates,
            )
        self.profiles = profiles
        self._write_table(result, "profiles.csv", profiles.to_frame())

        points = self._interior_profiles(engine, net, profiles, resolution)
        values = []
        kept = []
        for index, profile in enumerate(points):
            recovered = recover_point_eigenvalues(engine, net, profile, settings.ks)
            if recovered.partial or not np.all(np.isfinite(recovered.values)):
                self._logger.warning("point_dropped", index=index, reason=recovered.diagnostic)
                continue
            values.append(recovered.values)
            kept.append(profile)
        self.point_values = (
            np.column_stack(values) if values else np.zeros((extracted.mode_cutoff, 0))
        )
        kept_profiles = np.vstack(kept) if kept else np.zeros((0, len(net)))

        payload: dict[str, Any] = {
            "net": list(net),
            "profiles": kept_profiles,
            "values": self.point_values,
            "correspondence": None,
        }
        if self.config.validation and kept:
            self._consume(result.stage, ("true_profiles",), ground_truth=True)
            truth = true_profiles(self.space, net)
            gaps = np.max(np.abs(kept_profiles[:, None, :] - truth[None, :, :]), axis=2)
            self.point_correspondence = np.argmin(gaps, axis=1)
            payload["correspondence"] = self.point_correspondence
            assert self.spectrum is not None
            result.metrics["point_eigen_error"] = gauge_aligned_error(
                self.point_values,
                self.spectrum.eigenfunctions[:, self.point_correspondence],
                extracted.clusters,
            )
        self._write_json(result, "continuation.json", payload)

        result.metrics.update(
            {
                "net_size": float(len(net)),
                "accepted_profiles": float(len(profiles.accepted)),
                "collisions": float(len(profiles.collisions)),
                "points": float(self.point_values.shape[1]),
            }
        )
        if self.config.validation and "truth" in volumes:
            rel = np.abs(volumes["volume"] - volumes["truth"]) / volumes["truth"]
            result.metrics["volume_max_rel_error"] = float(rel.max())

    def _interior_profiles(
        self,
        engine: ProjectionEngine,
        net: Sequence[int],
        profiles: ProfileSearchResult,
        resolution: float,
    ) -> np.ndarray:
        """Accepted profiles that stand for points off the window, one per collision group."""
        accepted = profiles.accepted_matrix()
        duplicates = {i for group in profiles.collisions for i in group[1:]}
        keep = [i for i in range(accepted.shape[0]) if i not in duplicates]
        accepted = accepted[keep]

        extracted = engine.extracted
        position = {int(v): i for i, v in enumerate(extracted.vertices)}
        window_profiles = extracted.window_distance[:, [position[int(v)] for v in net]]
        if accepted.shape[0]:
            gaps = np.max(np.abs(accepted[:, None, :] - window_profiles[None, :, :]), axis=2)
            accepted = accepted[np.min(gaps, axis=1) > resolution]
        chosen = accepted[_evenly_spaced(accepted.shape[0], self.config.control.max_points)]
        self._logger.info(
            "interior_profiles_selected",
            accepted=int(profiles.accepted_matrix().shape[0]),
            selected=int(chosen.shape[0]),
        )
        return chosen

    def _calibration(self) -> dict[int, DensityCalibration]:
        settings = self.config.reconstruction
        calibrations: dict[int, DensityCalibration] = {}
        for n in settings.dimensions:
            if n == 1:
                exemplar = build_circle(settings.calibration_vertices)
            elif n == 2:
                exemplar = build_torus_mesh(*TORUS_CALIBRATION_SHAPE)
            else:
                calibrations[n] = DensityCalibration(
                    dimension=n,
                    constant=analytic_constant(n),
                    analytic=analytic_constant(n),
                    spread=0.0,
                    source="analytic",
                )
                continue
            floor = discretization_floor(exemplar.min_edge_length, settings.floor_factor)
            times = geometric_grid(floor, 10.0 * floor)
            spectrum = eigensolve(exemplar)
            sample = np.arange(0, exemplar.vertex_count, max(1, exemplar.vertex_count // 16))
            stack = heat_kernel_stack(spectrum, times, sample)
            diag = np.diagonal(stack, axis1=1, axis2=2)
            calibrations[n] = calibrate_density_constant(
                times, diag, n, t_floor=floor, t_max=10.0 * floor, source=exemplar.name
            )
        return calibrations

    def _reconstruct(self, result: StageResult) -> None:
        assert self.extracted is not None and self.space is not None
        settings = self.config.reconstruction
        self._consume(result.stage, ("extracted_spectrum", "continuation_values"))
        calibration = self._calibration() if settings.calibrate else None

        reference = None
        if self.config.validation:
            self._consume(result.stage, ("ground_truth_space",), ground_truth=True)
            reference = ReferenceData(
                space=self.space,
                spectrum=self.spectrum,
                density=_true_density(self.config, self.space),
            )
        reconstruction = assemble_space(
            self.extracted,
            point_values=self.point_values,
            point_correspondence=(
                self.point_correspondence if self.config.validation else None
            ),
            varadhan_t_max=settings.varadhan_t_max,
            density_t_max=settings.density_t_max,
            dimensions=settings.dimensions,
            calibration=calibration,
            floor_factor=settings.floor_factor,
            window_points=settings.window_points,
            varadhan_on_window=settings.varadhan_on_window,
            reference=reference,
            provenance={"config_hash": self.config_hash, "seed": self.config.seed},
        )
        self.reconstruction = reconstruction

        comparison = reconstruction.comparison
        self._write_json(
            result,
            "reconstruction.json",
            {
                "labels": list(reconstruction.labels),
                "correspondence": reconstruction.correspondence,
                "distance": reconstruction.distance,
                "density": reconstruction.density,
                "dimension": reconstruction.dimension,
                "mass": reconstruction.mass,
                "eigenvalues": reconstruction.eigenvalues,
                "provenance": reconstruction.provenance,
                "calibration": {
                    str(n): {
                        "constant": c.constant,
                        "analytic": c.analytic,
                        "relative_gap": c.relative_gap,
                        "spread": c.spread,
                        "source": c.source,
                    }
                    for n, c in (calibration or {}).items()
                },
                "comparison": None if comparison is None else asdict(comparison),
            },
        )
        self._write_table(result, "varadhan.csv", varadhan_frame(reconstruction))
        self._write_table(result, "points.csv", reconstruction.points_frame())
        self._write_table(result, "pairs.csv", reconstruction.pairs_frame())

        density = reconstruction.density
        result.metrics.update(
            {
                "points": float(reconstruction.size),
                "mass": reconstruction.mass,
                "dimension_min": float(np.min(reconstruction.dimension)),
                "dimension_max": float(np.max(reconstruction.dimension)),
                "density_spread": float(np.max(density) / np.min(density) - 1.0),
                "max_triangle_violation": reconstruction.max_triangle_violation(),
            }
        )
        if comparison is not None:
            result.metrics.update(
                {
                    "relative_distortion": comparison.relative_distortion,
                    "mass_error": comparison.mass_error,
                    "density_ratio_error": comparison.density_ratio_error,
                    "eigenfunction_error": comparison.eigenfunction_error,
                }
            )

    def _pipeline_settings(self) -> PipelineSettings:
        control = self.config.control
        assert self.space is not None
        return PipelineSettings(
            route=self.config.extraction.route,
            profile_source=control.candidates,
            net_size=self.config.stability.net_size,
            lattice_step=control.lattice_step or self.space.min_edge_length,
            ks=tuple(control.ks),
            vol_fraction=control.vol_fraction,
            time_step=control.time_step,
            rcond=control.rcond,
            max_radius=control.max_radius,
            j_target=self.config.extraction.j_target,
            t_min=self.config.window.t_min,
            t_max=self.config.window.t_max,
        )

    def _stability(self, result: StageResult) -> None:
        assert self.space is not None
        space = self.space
        settings = self.config.stability
        # forward study: both spaces are constructed here
        self._consume(result.stage, ("space", "perturbed_spaces"), ground_truth=True)
        window = select_window(space, self.config.window.rule, **self.config.window.selection_params())
        pipeline = self._pipeline_settings()
        spectrum = self.spectrum or eigensolve(space)
        payload: dict[str, Any] = {"forward_study": True}

        if settings.rigidity_check:
            permutation = np.random.default_rng(self.config.seed).permutation(space.vertex_count)
            copy = relabel(space, permutation)
            copy_spectrum = eigensolve(copy)
            full = VertexMap.from_permutation(permutation)
            report = approximation_report(
                space, copy, spectrum, copy_spectrum, full, ball=window
            )
            rigidity: dict[str, Any] = {"report": report.to_dict()}
            if settings.run_pipeline:
                extension = extend_map_via_pipeline(
                    space, spectrum, copy, copy_spectrum, full.restrict(window), pipeline
                )
                exact = bool(
                    np.array_equal(extension.extended.image, permutation[extension.extended.domain])
                )
                rigidity["extension"] = {
                    "mapped": extension.extended.size,
                    "exact_permutation": exact,
                    "ambiguous": list(extension.ambiguous),
                    "uniqueness_gap": extension.uniqueness_gap,
                    "report": extension.report.to_dict(),
                }
                result.metrics["rigidity_exact"] = float(exact)
            payload["rigidity"] = rigidity
            result.metrics.update(
                {
                    "rigidity_heat_ratio_eps": report.heat_ratio_eps,
                    "rigidity_eigen_eps": report.eigen_eps,
                    "rigidity_distortion": report.gh_distortion,
                }
            )

        ladder = stability_ladder(
            space,
            window,
            settings.magnitudes,
            seed=settings.perturbation_seed,
            settings=pipeline,
            run_pipeline=settings.run_pipeline,
        )
        self._write_table(result, "ladder.csv", ladder.to_frame())
        monotone = {
            column: ladder.monotone(column)
            for column in ("heat_ratio_eps", "eigen_eps", "distortion")
        }
        payload["ladder"] = {"rungs": ladder.to_frame().to_dict(orient="list"), "monotone": monotone}
        for column, flag in monotone.items():
            result.metrics[f"ladder_{column}_monotone"] = float(flag)

        wave = self.config.wave
        if wave.propagation_study:
            cases = [circle_pulse_case(n, wave.pulse_width) for n in wave.levels]
            cone_report = finite_propagation_diagnostic(cases, wave.cone_radius, wave.time_samples)
            frame = pd.DataFrame(
                {
                    "vertices": [r.vertex_count for r in cone_report.records],
                    "mesh_size": [r.mesh_size for r in cone_report.records],
                    "cone_energy": [r.cone_energy for r in cone_report.records],
                    "fraction": [r.fraction for r in cone_report.records],
                }
            )
            self._write_table(result, "cone_energy.csv", frame)
            payload["propagation"] = {"radius": cone_report.radius, "orders": cone_report.orders}
            result.metrics["cone_energy_decreasing"] = float(cone_report.decreasing)

        self._write_json(result, "stability.json", payload)
