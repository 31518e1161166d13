"""Extension of a window map through the reconstruction pipeline.

Each side runs extraction and the slice test on its own window; recovered
distance profiles are then matched in sup norm across the net
correspondence given by ψ.
"""

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np

from tiresias.control.projections import ProjectionEngine
from tiresias.control.slices import recover_distance_function, search_profiles, true_profiles
from tiresias.errors import StabilityError
from tiresias.gelfand.extractor import SpectralExtractor, window_spectral_data
from tiresias.gelfand.models import ExtractedSpectrum
from tiresias.mms.builders import perturb_edge_lengths
from tiresias.mms.models import DiscreteSpace
from tiresias.mms.windows import farthest_point_net
from tiresias.spectral.eigen import eigensolve
from tiresias.spectral.heat import geometric_grid, sample_observation
from tiresias.spectral.models import SpectralData
from tiresias.stability.approx import approximation_report, gh_distortion, heat_ratio_eps
from tiresias.stability.models import ExtensionResult, StabilityLadder, VertexMap
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="MapExtension")


@dataclass(frozen=True)
class PipelineSettings:
    """Knobs of the per-side pipeline run.

    Attributes:
        route: ``"spectral-data"`` or ``"heat"``
        profile_source: ``"ground-truth"`` (validation candidates) or ``"search"``
        net_size: Number of net points in the window
        lattice_step: Candidate lattice spacing
        ks: Shrink schedule of the slice test
        vol_fraction: Acceptance fraction of the slice test
        time_step: Hat spacing of the control basis
        rcond: Relative singular-value cut of span estimates
        max_radius: Largest candidate distance for the search
        j_target: Clusters requested from the heat route
        t_min: First observation time of the heat route
        t_max: Last observation time of the heat route
    """

    route: str = "spectral-data"
    profile_source: str = "ground-truth"
    net_size: int = 3
    lattice_step: float = 0.1
    ks: tuple[int, ...] = (2, 4)
    vol_fraction: float = 0.5
    time_step: float = 0.1
    rcond: float = 1e-3
    max_radius: float = 3.2
    j_target: int = 6
    t_min: float = 0.05
    t_max: float = 20.0


@dataclass(frozen=True, eq=False)
class ProfileRun:
    """Recovered distance profiles on one side.

    Attributes:
        net: Net points (global ids)
        profiles: Accepted profiles, shape (P, |net|)
        vertices: Vertex each profile stands for (simulation correspondence)
    """

    net: tuple[int, ...]
    profiles: np.ndarray
    vertices: np.ndarray


def extract_side(
    space: DiscreteSpace, spec: SpectralData, window: np.ndarray, settings: PipelineSettings
) -> ExtractedSpectrum:
    """Observation on ``window`` and extraction along the configured route."""
    grid = geometric_grid(settings.t_min, settings.t_max)
    obs = sample_observation(spec, space, window, grid)
    if settings.route == "heat":
        return SpectralExtractor(j_target=settings.j_target).extract(obs)
    return window_spectral_data(spec, obs)


def recover_profile_run(
    space: DiscreteSpace,
    extracted: ExtractedSpectrum,
    net: Sequence[int],
    settings: PipelineSettings,
) -> ProfileRun:
    """Run the slice test on one side and attach the vertex correspondence.

    Ground-truth candidates are the true profiles of every vertex; searched
    candidates are matched to the vertex with the nearest true profile.
    """
    engine = ProjectionEngine(extracted, settings.time_step, settings.rcond)
    truth = true_profiles(space, net)
    if settings.profile_source == "search":
        result = search_profiles(
            engine, net, settings.lattice_step, settings.max_radius, settings.ks, settings.vol_fraction
        )
        profiles = result.accepted_matrix()
        gaps = np.max(np.abs(profiles[:, None, :] - truth[None, :, :]), axis=2)
        vertices = np.argmin(gaps, axis=1)
    else:
        result = recover_distance_function(
            engine, net, truth, settings.ks, settings.lattice_step, settings.vol_fraction
        )
        vertices = np.flatnonzero([c.accepted for c in result.candidates])
        profiles = result.accepted_matrix()
    return ProfileRun(net=tuple(int(v) for v in net), profiles=profiles, vertices=vertices)


def match_profiles(
    run_x: ProfileRun, run_y: ProfileRun, resolution: float
) -> tuple[VertexMap, tuple[int, ...]]:
    """Nearest-profile assignment in sup norm over the net.

    A domain vertex is ambiguous when two distinct target vertices lie within
    ``resolution`` of its profile.
    """
    gaps = np.max(np.abs(run_x.profiles[:, None, :] - run_y.profiles[None, :, :]), axis=2)
    nearest = np.argmin(gaps, axis=1)
    image = run_y.vertices[nearest]

    domain: list[int] = []
    targets: list[int] = []
    ambiguous: list[int] = []
    for row, vertex in enumerate(run_x.vertices):
        close = np.unique(run_y.vertices[gaps[row] <= resolution])
        if close.size > 1:
            ambiguous.append(int(vertex))
        if int(vertex) in domain:
            continue
        domain.append(int(vertex))
        targets.append(int(image[row]))
    return (
        VertexMap(domain=np.array(domain, dtype=np.int64), image=np.array(targets, dtype=np.int64)),
        tuple(ambiguous),
    )


def _shifted_net(window: np.ndarray, net: Sequence[int]) -> tuple[int, ...]:
    """Move every net point one window position along."""
    position = {int(v): i for i, v in enumerate(window)}
    return tuple(int(window[(position[int(v)] + 1) % window.size]) for v in net)


def extend_map_via_pipeline(
    space_x: DiscreteSpace,
    spec_x: SpectralData,
    space_y: DiscreteSpace,
    spec_y: SpectralData,
    psi: VertexMap,
    settings: PipelineSettings | None = None,
    check_uniqueness: bool = True,
) -> ExtensionResult:
    """Extend ψ from the window V to every recovered point.

    Args:
        space_x: First space (its window is ψ's domain)
        spec_x: Spectral data of X
        space_y: Second space
        spec_y: Spectral data of Y
        psi: Map on V
        settings: Per-side pipeline settings
        check_uniqueness: Rerun on a shifted net and record max d_Y(Ψx, Ψ'x)

    Returns:
        ExtensionResult

    Raises:
        StabilityError: If ψ leaves either space or the windows are
            inconsistent (infinite heat-ratio ε on V)
    """
    settings = settings or PipelineSettings()
    psi.validate(space_x, space_y)
    window_eps = heat_ratio_eps(space_x, space_y, psi)
    if not np.isfinite(window_eps):
        raise StabilityError("windows are inconsistent under the map", details={"eps": window_eps})

    logger.info("extension_start", space_x=space_x.name, space_y=space_y.name, window=psi.size)
    window_x, window_y = psi.domain, psi.image
    extracted_x = extract_side(space_x, spec_x, window_x, settings)
    extracted_y = extract_side(space_y, spec_y, window_y, settings)
    window_metric = space_x.distance[np.ix_(window_x, window_x)]
    net_x = farthest_point_net(window_x, window_metric, settings.net_size)
    resolution = 0.5 * settings.lattice_step

    def extend(net: Sequence[int]) -> tuple[VertexMap, tuple[int, ...]]:
        run_x = recover_profile_run(space_x, extracted_x, net, settings)
        run_y = recover_profile_run(space_y, extracted_y, tuple(psi.apply(net)), settings)
        return match_profiles(run_x, run_y, resolution)

    extended, ambiguous = extend(net_x)
    if ambiguous:
        logger.warning("profile_assignment_ambiguous", vertices=len(ambiguous))

    gap = None
    if check_uniqueness:
        again, _ = extend(_shifted_net(window_x, net_x))
        common = np.intersect1d(extended.domain, again.domain)
        if common.size:
            first = extended.apply(common)
            second = again.apply(common)
            gap = float(np.max(space_y.distance[first, second]))

    report = approximation_report(space_x, space_y, spec_x, spec_y, extended)
    logger.info(
        "extension_complete",
        mapped=extended.size,
        distortion=report.gh_distortion,
        defect=report.surjectivity_defect,
        uniqueness_gap=gap,
    )
    return ExtensionResult(
        extended=extended,
        report=report,
        ambiguous=ambiguous,
        uniqueness_gap=gap,
        resolution=resolution,
    )


def stability_ladder(
    space: DiscreteSpace,
    window: np.ndarray,
    magnitudes: Sequence[float],
    seed: int = 0,
    settings: PipelineSettings | None = None,
    run_pipeline: bool = True,
) -> StabilityLadder:
    """Measure heat-ratio ε, eigen ε and distortion across edge-length perturbations.

    Every rung perturbs along the same seeded direction. Distortion comes from
    the pipeline-extended map, or from the identity map when ``run_pipeline``
    is off.
    """
    spec_x = eigensolve(space)
    identity = VertexMap.identity(window)
    ladder = StabilityLadder()
    for magnitude in sorted(magnitudes):
        perturbed = perturb_edge_lengths(space, magnitude, seed)
        spec_y = eigensolve(perturbed)
        report = approximation_report(space, perturbed, spec_x, spec_y, identity)
        if run_pipeline:
            extension = extend_map_via_pipeline(
                space, spec_x, perturbed, spec_y, identity, settings, check_uniqueness=False
            )
            distortion = extension.report.gh_distortion
        else:
            everywhere = VertexMap.identity(np.arange(space.vertex_count))
            distortion, _ = gh_distortion(space, perturbed, everywhere)
        ladder.add(magnitude, report, distortion)
        logger.info(
            "ladder_rung",
            magnitude=magnitude,
            heat_ratio_eps=report.heat_ratio_eps,
            eigen_eps=report.eigen_eps,
            distortion=distortion,
        )
    return ladder
