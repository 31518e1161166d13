"""Empirical constants for eigenfunction bounds and Gaussian heat estimates.

The constants in these estimates are not explicit, so nothing here asserts a
value; reports carry the measured constants and flag non-finite ones.
"""

from dataclasses import dataclass

import numpy as np

from tiresias.mms.models import DiscreteSpace
from tiresias.spectral.heat import uniformized_heat_matrix
from tiresias.spectral.models import SpectralData
from tiresias.utils.logging import get_logger

logger = get_logger(__name__, component="SpectralBounds")


@dataclass(frozen=True)
class EigenBoundsReport:
    """Measured constants of the sup-norm, gradient and Weyl bounds.

    Attributes:
        dimension_bound: N used in the exponents
        sup_norms: ‖φ_j‖_∞ per mode
        sup_constant: max_{j≥1} ‖φ_j‖_∞ / λ_j^{N/4}
        gradient_constant: max_{j≥1} ‖∇φ_j‖_∞ / λ_j^{(N+2)/4}
        weyl_ratios: λ_i · i^{-2/N} for i ≥ 1
        constant_mode_check: ‖φ_0‖_∞ · m(X)^{1/2} (equals 1)
        finite: Whether every reported constant is finite
    """

    dimension_bound: float
    sup_norms: np.ndarray
    sup_constant: float
    gradient_constant: float
    weyl_ratios: np.ndarray
    constant_mode_check: float
    finite: bool


def check_eigen_bounds(
    spec: SpectralData, space: DiscreteSpace, dimension_bound: float | None = None
) -> EigenBoundsReport:
    """Measure the constants of the eigenfunction and Weyl-type bounds.

    The discrete gradient of φ on edge (i, j) is |φ(i) − φ(j)| / ℓ_ij.
    """
    n_bound = dimension_bound if dimension_bound is not None else space.metadata.dimension_bound
    phi = spec.eigenfunctions
    sup_norms = np.max(np.abs(phi), axis=1)

    i, j = space.edges[:, 0], space.edges[:, 1]
    gradients = np.max(np.abs(phi[:, i] - phi[:, j]) / space.lengths[None, :], axis=1)

    lam = spec.eigenvalues[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        sup_constant = float(np.max(sup_norms[1:] / lam ** (n_bound / 4.0))) if lam.size else 0.0
        gradient_constant = (
            float(np.max(gradients[1:] / lam ** ((n_bound + 2.0) / 4.0))) if lam.size else 0.0
        )
        weyl = lam * np.arange(1, lam.size + 1) ** (-2.0 / n_bound)

    constant_check = float(sup_norms[0] * np.sqrt(spec.total_mass))
    finite = bool(
        np.isfinite(sup_constant) and np.isfinite(gradient_constant) and np.all(np.isfinite(weyl))
    )
    if not finite:
        logger.warning("eigen_bounds_not_finite", space=space.name)

    return EigenBoundsReport(
        dimension_bound=n_bound,
        sup_norms=sup_norms,
        sup_constant=sup_constant,
        gradient_constant=gradient_constant,
        weyl_ratios=weyl,
        constant_mode_check=constant_check,
        finite=finite,
    )


@dataclass(frozen=True)
class GaussianDiagnostic:
    """Fitted lower-bound offsets C(t) of log p ≥ −d²/(4(1−ε)t) − C(t).

    Attributes:
        times: Tested times
        offsets: C(t) per time (smallest constant making the bound hold)
        epsilon: ε used in the exponent
        min_kernel: Smallest kernel value per time (positivity check)
    """

    times: np.ndarray
    offsets: np.ndarray
    epsilon: float
    min_kernel: np.ndarray

    @property
    def positive(self) -> bool:
        """Whether the kernel was strictly positive at every tested time."""
        return bool(np.all(self.min_kernel > 0))

    @property
    def trend_monotone(self) -> bool:
        """Whether C(t) is monotone in t (either direction) on the grid."""
        steps = np.diff(self.offsets)
        return bool(np.all(steps >= -1e-12) or np.all(steps <= 1e-12))


def gaussian_diagnostic(
    space: DiscreteSpace, times: np.ndarray, epsilon: float = 0.1
) -> GaussianDiagnostic:
    """Gaussian lower-bound diagnostic on the full kernel.

    Uses the uniformized kernel so far-apart pairs keep relative accuracy.
    """
    offsets = []
    minima = []
    d2 = space.distance**2
    for t in times:
        kernel = uniformized_heat_matrix(space, float(t))
        minima.append(float(kernel.min()))
        with np.errstate(divide="ignore"):
            gap = -d2 / (4.0 * (1.0 - epsilon) * t) - np.log(kernel)
        offsets.append(float(np.max(gap)))
    return GaussianDiagnostic(
        times=np.asarray(times, dtype=float),
        offsets=np.array(offsets),
        epsilon=epsilon,
        min_kernel=np.array(minima),
    )
