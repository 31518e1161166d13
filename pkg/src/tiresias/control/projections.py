"""Projections onto spans of controlled waves, in modal coordinates.

Every wave u^f(s) launched from the window is a vector of Fourier
coefficients. The span of a source basis is estimated by a truncated SVD of
the modal matrix, and set algebra on influence domains becomes algebra on
these projectors.
"""

from collections.abc import Sequence

import numpy as np
from cachetools import LRUCache

from tiresias.control.models import InfluenceDomain, SliceFamily, VolumeEstimate
from tiresias.control.sources import ControlBasis, generators_near
from tiresias.errors import ControlError
from tiresias.gelfand.models import ExtractedSpectrum
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="ProjectionEngine")

GRAM_TOLERANCE = 1e-10
SATURATION_TOLERANCE = 1e-3
INTERSECTION_ITERATIONS = 64
INTERSECTION_TOLERANCE = 1e-10
DIFFERENCE_THRESHOLD = 0.5


def controllability_gram(extracted: ExtractedSpectrum, basis: ControlBasis) -> np.ndarray:
    """G(f, g) = ⟨u^f(s), u^g(s)⟩ = Σ_j u_j^f(s) u_j^g(s).

    Raises:
        ControlError: If G has an eigenvalue below −1e−10·max(1, ‖G‖)
    """
    rows = basis.modal_matrix(extracted)
    gram: np.ndarray = rows @ rows.T
    if gram.size:
        lowest = float(np.linalg.eigvalsh(gram)[0])
        scale = max(1.0, float(np.max(np.abs(gram))))
        if lowest < -GRAM_TOLERANCE * scale:
            raise ControlError(
                "controllability Gram matrix is indefinite", details={"min_eigenvalue": lowest}
            )
    return gram


def range_projector(rows: np.ndarray, rcond: float) -> np.ndarray:
    """Orthogonal projector onto the row space, singular values ≥ rcond·σ_max."""
    modes = rows.shape[1]
    if rows.size == 0 or not np.any(rows):
        return np.zeros((modes, modes))
    _, singular, vt = np.linalg.svd(rows, full_matrices=False)
    kept = vt[singular >= rcond * singular[0]]
    result: np.ndarray = kept.T @ kept
    return result


def difference_projector(outer: np.ndarray, inner: np.ndarray) -> np.ndarray:
    """Projector for A \\ B with B ⊆ A: eigenvectors of P_A − P_B above 1/2."""
    values, vectors = np.linalg.eigh(outer - inner)
    kept = vectors[:, values > DIFFERENCE_THRESHOLD]
    result: np.ndarray = kept @ kept.T
    return result


def alternating_projection(
    projectors: Sequence[np.ndarray],
    start: np.ndarray,
    iterations: int = INTERSECTION_ITERATIONS,
    tolerance: float = INTERSECTION_TOLERANCE,
) -> np.ndarray:
    """Von Neumann alternation P_L ⋯ P_1 applied until the vector settles."""
    vector = np.array(start, dtype=float, copy=True)
    for _ in range(iterations):
        previous = vector
        for projector in projectors:
            vector = projector @ vector
        if np.linalg.norm(vector - previous) < tolerance:
            break
    return vector


class ProjectionEngine:
    """Memoised projectors onto span{u^f(s)} for sources in the window.

    Projectors are cached per (generators, s, Δ) in an LRU cache.

    Example:
        >>> engine = ProjectionEngine(extracted, time_step=0.05)
        >>> engine.volume(engine.projector((3, 4, 5), 1.0))
    """

    def __init__(
        self,
        extracted: ExtractedSpectrum,
        time_step: float,
        rcond: float = 1e-3,
        cache_size: int = 4096,
    ) -> None:
        """Initialize the engine.

        Args:
            extracted: Window spectral data (the only data consulted)
            time_step: Hat spacing Δ of the source basis
            rcond: Relative singular-value cut of the span estimate
            cache_size: Number of projectors kept
        """
        self.extracted = extracted
        self.time_step = time_step
        self.rcond = rcond
        self._cache: LRUCache[tuple[tuple[int, ...], float, float], np.ndarray] = LRUCache(
            maxsize=cache_size
        )
        self._constant = np.zeros(extracted.mode_cutoff)
        self._constant[0] = 1.0
        self._logger = logger

    @property
    def modes(self) -> int:
        """Number of modal coordinates."""
        return self.extracted.mode_cutoff

    def projector(
        self, generators: Sequence[int], horizon: float, time_step: float | None = None
    ) -> np.ndarray:
        """Projector onto span{u^f(s)} for sources on U × (0, s); zero for s ≤ 0."""
        step = self.time_step if time_step is None else time_step
        key = (tuple(sorted(int(v) for v in generators)), round(float(horizon), 12), step)
        cached = self._cache.get(key)
        if cached is not None:
            return cached
        if horizon <= 0:
            projector = np.zeros((self.modes, self.modes))
        else:
            basis = ControlBasis(key[0], float(horizon), step)
            projector = range_projector(basis.modal_matrix(self.extracted), self.rcond)
        projector.setflags(write=False)
        self._cache[key] = projector
        return projector

    def influence_domain(self, generators: Sequence[int], tau: float) -> InfluenceDomain:
        """X(U, τ) on the data side."""
        return InfluenceDomain(
            generators=tuple(int(v) for v in generators),
            tau=tau,
            projector=self.projector(generators, tau),
        )

    def volume(self, projector: np.ndarray) -> float:
        """m̂ = m(X)_rec · ‖P e_0‖² for a projector."""
        projected = projector @ self._constant
        return self.extracted.mass * float(projected @ projected)

    def vector_volume(self, vector: np.ndarray) -> float:
        """m̂ = m(X)_rec · ‖v‖² for an already projected constant mode."""
        return self.extracted.mass * float(vector @ vector)

    def project_constant(self, generators: Sequence[int], tau: float) -> VolumeEstimate:
        """Volume of X(U, τ) with a basis-saturation check.

        The residual ‖(I − P)e_0‖² is recomputed with half the hat spacing;
        the estimate is converged when the two differ by less than 1e−3.
        """
        coarse = self.projector(generators, tau)
        fine = self.projector(generators, tau, self.time_step / 2.0)
        volume = self.volume(coarse)
        residual = 1.0 - float(coarse[0, 0])
        refined_residual = 1.0 - float(fine[0, 0])
        converged = abs(residual - refined_residual) < SATURATION_TOLERANCE
        if not converged:
            self._logger.warning(
                "control_basis_unconverged",
                tau=tau,
                residual=residual,
                refined_residual=refined_residual,
            )
        return VolumeEstimate(
            volume=volume,
            residual=residual,
            refined_residual=refined_residual,
            converged=converged,
        )

    def slice_projectors(self, family: SliceFamily) -> list[np.ndarray]:
        """One difference projector per net point of the slice."""
        out = []
        for xi, outer, inner in zip(
            family.net, family.outer_times, family.inner_times, strict=True
        ):
            generators = generators_near(
                self.extracted, self.extracted.window_distance, xi, family.delta
            )
            outer_projector = self.projector(generators, float(outer))
            inner_projector = self.projector(generators, float(inner))
            if inner <= 0:
                out.append(outer_projector)
            else:
                out.append(difference_projector(outer_projector, inner_projector))
        return out

    def slice_vector(self, family: SliceFamily) -> np.ndarray:
        """P_I e_0 for the slice set I via alternating projections."""
        return alternating_projection(self.slice_projectors(family), self._constant)

    def slice_volume(self, family: SliceFamily, tolerance: float = 1e-3) -> float:
        """m̂(I) for a slice family.

        Raises:
            ControlError: If the estimate is negative beyond ``tolerance``·m(X)
        """
        vector = self.slice_vector(family)
        volume = self.vector_volume(vector)
        # ‖v‖² is nonnegative; a negative ⟨v, e_0⟩ means the iteration left the cone
        signed = self.extracted.mass * float(vector[0])
        if signed < -tolerance * self.extracted.mass:
            raise ControlError(
                "negative slice volume; the control basis has not converged",
                details={"signed_volume": signed, "k": family.k},
            )
        return volume
