"""End-to-end spectral extraction from window data.

SpectralExtractor runs trace → mass → eigenvalues → cluster kernels → gauge
fix and records which inputs were consumed. ``window_spectral_data`` builds
the same container from complete spectral data restricted to V.
"""

from dataclasses import dataclass

import numpy as np
from scipy.stats import ortho_group

from tiresias.errors import RankAmbiguityError
from tiresias.gelfand.gauge import gauge_fix_cluster
from tiresias.gelfand.kernels import recover_cluster_kernels
from tiresias.gelfand.models import ClusterConditioning, ExtractedSpectrum, ExtractionAudit
from tiresias.gelfand.trace import recover_eigenvalues, recover_mass_and_phi0
from tiresias.mms.models import DiscreteSpace
from tiresias.spectral.heat import sample_observation
from tiresias.spectral.models import ObservationWindow, SpectralData
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="SpectralExtractor")

HEAT_INPUTS = ("heat_samples|V", "t_grid", "measure|V", "distance|V")
SPECTRAL_INPUTS = ("eigenvalues", "eigenfunctions|V", "measure|V", "distance|V")
UNIQUE_CONTINUATION_FLOOR = 1e-10


class SpectralExtractor:
    """Recover {λ_j, φ_j|_V} and m(X) from an ObservationWindow alone.

    Example:
        >>> extractor = SpectralExtractor(j_target=3)
        >>> extracted = extractor.extract(obs)
        >>> extracted.eigenvalues[:3]
    """

    def __init__(
        self,
        j_target: int = 6,
        guard_components: int = 2,
        rank_rel_tol: float = 1e-6,
        residual_tol: float = 1e-6,
        gap_tol: float | None = None,
    ) -> None:
        """Initialize the extractor.

        Args:
            j_target: Non-constant eigenvalue clusters to recover
            guard_components: Extra peeled components discarded after polishing
            rank_rel_tol: Relative rank threshold of the cluster kernels
            residual_tol: Per-pair kernel fit residual that triggers a flag
            gap_tol: Merge threshold for recovered rates
        """
        self.j_target = j_target
        self.guard_components = guard_components
        self.rank_rel_tol = rank_rel_tol
        self.residual_tol = residual_tol
        self.gap_tol = gap_tol
        self._logger = logger

    def extract(self, obs: ObservationWindow) -> ExtractedSpectrum:
        """Run the full extraction.

        Returns:
            ExtractedSpectrum with provenance ``"heat"``; partial when the
            dynamic range or a rank decision cut the cluster list short

        Raises:
            IllPosedDataError: If the mass cannot be recovered
        """
        self._logger.info("extraction_start", space=obs.space_name, window=obs.size)
        mass = recover_mass_and_phi0(obs)
        recovery = recover_eigenvalues(
            obs,
            mass.mass,
            self.j_target,
            guard_components=self.guard_components,
            gap_tol=self.gap_tol,
        )
        kernels = recover_cluster_kernels(obs, recovery, mass.mass, self.residual_tol)

        blocks = [np.full((1, obs.size), mass.phi0)]
        eigenvalues = [0.0]
        clusters: list[tuple[int, ...]] = [(0,)]
        conditioning = [
            ClusterConditioning(
                cluster=0,
                eigenvalue=0.0,
                multiplicity=1,
                points=(0,),
                min_singular=1.0 / mass.mass,
                reconstruction_residual=0.0,
                window_weight=obs.window_mass / mass.mass,
            )
        ]
        partial = recovery.partial
        diagnostic = recovery.diagnostic

        for c in range(1, recovery.rates.size):
            try:
                fixed = gauge_fix_cluster(kernels[c], obs.measure_on_V, self.rank_rel_tol)
            except RankAmbiguityError as e:
                self._logger.warning("cluster_rank_undecided", cluster=c, error=str(e))
                partial = True
                diagnostic = f"rank of cluster {c} undecided"
                break
            start = len(eigenvalues)
            rate = float(recovery.rates[c])
            eigenvalues.extend([rate] * fixed.multiplicity)
            clusters.append(tuple(range(start, start + fixed.multiplicity)))
            blocks.append(fixed.values)
            weight = float(np.sum(fixed.values**2 @ obs.measure_on_V))
            conditioning.append(
                ClusterConditioning(
                    cluster=c,
                    eigenvalue=rate,
                    multiplicity=fixed.multiplicity,
                    points=fixed.points,
                    min_singular=fixed.min_singular,
                    reconstruction_residual=fixed.reconstruction_residual,
                    window_weight=weight,
                )
            )
            if weight <= UNIQUE_CONTINUATION_FLOOR:
                self._logger.warning("cluster_vanishes_on_window", cluster=c, weight=weight)

        extracted = ExtractedSpectrum(
            space_name=obs.space_name,
            vertices=obs.vertices.copy(),
            measure_on_V=obs.measure_on_V.copy(),
            window_distance=obs.window_distance.copy(),
            mesh_size=obs.mesh_size,
            mass=mass.mass,
            eigenvalues=np.array(eigenvalues),
            eigenfunctions=np.vstack(blocks),
            clusters=tuple(clusters),
            provenance="heat",
            audit=ExtractionAudit(consumed=HEAT_INPUTS),
            conditioning=tuple(conditioning),
            partial=partial,
            diagnostic=diagnostic,
            metadata={"mass_limit": mass.limit, "kernel_fit_start": kernels.fit_start},
        )
        self._logger.info(
            "extraction_complete",
            modes=extracted.mode_cutoff,
            clusters=len(extracted.clusters),
            mass=extracted.mass,
            partial=partial,
            flagged_pairs=len(kernels.flagged_pairs),
        )
        return extracted


def window_spectral_data(
    spec: SpectralData, obs: ObservationWindow, j_max: int | None = None
) -> ExtractedSpectrum:
    """Package complete spectral data restricted to V as an ExtractedSpectrum.

    Eigenpairs come from the full-space solve, so the audit marks ground
    truth as read. Only λ_j, φ_j on V and the window's measure and metric
    are used; m(X) is recovered from the constant mode. Truncation happens
    at a cluster boundary at or below ``j_max``.
    """
    clusters = []
    for cluster in spec.clusters:
        if j_max is not None and cluster[-1] >= j_max:
            break
        clusters.append(cluster)
    modes = clusters[-1][-1] + 1 if clusters else 1
    window = obs.vertices
    values = spec.eigenfunctions[:modes, window]
    phi0 = float(values[0, 0])

    conditioning = tuple(
        ClusterConditioning(
            cluster=c,
            eigenvalue=float(spec.eigenvalues[cluster[0]]),
            multiplicity=len(cluster),
            points=(),
            min_singular=float("nan"),
            reconstruction_residual=0.0,
            window_weight=float(np.sum(values[list(cluster)] ** 2 @ obs.measure_on_V)),
        )
        for c, cluster in enumerate(clusters)
    )
    logger.info("window_spectral_data", space=spec.space_name, modes=modes, window=obs.size)
    return ExtractedSpectrum(
        space_name=obs.space_name,
        vertices=window.copy(),
        measure_on_V=obs.measure_on_V.copy(),
        window_distance=obs.window_distance.copy(),
        mesh_size=obs.mesh_size,
        mass=phi0**-2,
        eigenvalues=spec.eigenvalues[:modes].copy(),
        eigenfunctions=values.copy(),
        clusters=tuple(clusters),
        provenance="spectral-data",
        audit=ExtractionAudit(consumed=SPECTRAL_INPUTS, ground_truth_access=True),
        conditioning=conditioning,
    )


@dataclass(frozen=True)
class MassErrorBar:
    """Spread of m(X)_rec over noise draws."""

    mean: float
    std: float
    draws: int
    values: tuple[float, ...]


def monte_carlo_mass(
    spec: SpectralData,
    space: DiscreteSpace,
    window: np.ndarray,
    t_grid: np.ndarray,
    noise: float,
    draws: int = 16,
    seed: int = 0,
) -> MassErrorBar:
    """Recover m(X) from ``draws`` independently noised observations."""
    values = []
    for k in range(draws):
        obs = sample_observation(spec, space, window, t_grid, noise=noise, seed=seed + k)
        values.append(recover_mass_and_phi0(obs).mass)
    arr = np.array(values)
    bar = MassErrorBar(
        mean=float(arr.mean()),
        std=float(arr.std(ddof=1)) if draws > 1 else 0.0,
        draws=draws,
        values=tuple(float(v) for v in arr),
    )
    logger.info("mass_error_bar", mean=bar.mean, std=bar.std, draws=draws, noise=noise)
    return bar


def twist_gauge(extracted: ExtractedSpectrum, rng: np.random.Generator) -> ExtractedSpectrum:
    """Apply an independent random orthogonal matrix to every multi-mode cluster."""
    twisted = extracted.eigenfunctions.copy()
    for cluster in extracted.clusters:
        if len(cluster) < 2:
            continue
        index = list(cluster)
        rotation = ortho_group.rvs(len(cluster), random_state=rng)
        twisted[index] = rotation @ twisted[index]
    return extracted.with_eigenfunctions(twisted)
