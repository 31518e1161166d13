"""
Tests for distance, density and dimension recovery and space assembly.
"""

import math

import numpy as np
import pytest
from tiresias.errors import DimensionAmbiguityError
from tiresias.gelfand import window_spectral_data
from tiresias.reconstruct import (
    ReconstructionResult,
    ReferenceData,
    VaradhanMatrix,
    analytic_constant,
    assemble_space,
    calibrate_density_constant,
    density_profile,
    density_recovery,
    discretization_floor,
    gauge_aligned_error,
    synthesize_kernels,
    varadhan_distance,
    varadhan_frame,
    varadhan_matrix,
)


def gaussian(times: np.ndarray, distance: float) -> np.ndarray:
    return (4.0 * np.pi * times) ** -0.5 * np.exp(-(distance**2) / (4.0 * times))


def empty_fits(count: int) -> VaradhanMatrix:
    zeros = np.zeros((count, count))
    return VaradhanMatrix(
        distance=zeros,
        intercept=zeros,
        slope=zeros,
        residual=zeros,
        window_start=zeros,
        flagged=np.zeros((count, count), dtype=bool),
    )


def make_result(distance: np.ndarray) -> ReconstructionResult:
    count = distance.shape[0]
    return ReconstructionResult(
        labels=tuple(f"p:{k}" for k in range(count)),
        correspondence=np.full(count, -1),
        distance=distance,
        density=np.ones(count),
        dimension=np.ones(count, dtype=np.int64),
        mass=1.0,
        eigenvalues=np.zeros(1),
        point_values=np.ones((1, count)),
        varadhan=empty_fits(count),
        times=np.array([0.1, 0.2]),
    )


@pytest.fixture(scope="module")
def extracted(circle32_spectrum, quarter_observation):
    """Complete spectral data on the quarter window."""
    return window_spectral_data(circle32_spectrum, quarter_observation)


class TestVaradhanDistance:
    """Tests for single-pair Varadhan fits."""

    def test_gaussian_pair(self):
        """Test that a Euclidean kernel gives its distance exactly."""
        times = np.geomspace(0.05, 1.0, 20)
        diag = gaussian(times, 0.0)

        fit = varadhan_distance(times, gaussian(times, 0.7), diag, diag)

        assert fit.distance == pytest.approx(0.7, rel=1e-8)
        assert fit.slope == pytest.approx(0.0, abs=1e-8)
        assert not fit.flagged

    def test_window_respects_floor(self):
        """Test that the chosen window starts at or after the floor."""
        times = np.geomspace(0.01, 1.0, 40)
        diag = gaussian(times, 0.0)

        fit = varadhan_distance(times, gaussian(times, 0.5), diag, diag, t_floor=0.1)

        assert fit.window[0] >= 0.1

    def test_vanishing_kernel_is_flagged(self):
        """Test that a kernel below the ratio floor yields a flagged NaN distance."""
        times = np.geomspace(0.1, 1.0, 10)

        fit = varadhan_distance(times, np.full(10, 1e-20), np.ones(10), np.ones(10))

        assert fit.flagged
        assert math.isnan(fit.distance)

    def test_discretization_floor(self):
        """Test t_floor = 10·h²."""
        assert discretization_floor(0.1) == pytest.approx(0.1)
        assert discretization_floor(0.1, factor=4.0) == pytest.approx(0.04)


class TestVaradhanMatrix:
    """Tests for vectorized pairwise fits."""

    def test_points_on_a_line(self):
        """Test that Gaussian kernels of points on a line recover |x − y|."""
        positions = np.array([0.0, 0.3, 0.5, 1.0])
        times = np.geomspace(0.1, 1.0, 16)
        gaps = np.abs(positions[:, None] - positions[None, :])
        kernels = np.stack([gaussian(np.full_like(gaps, t), 0.0) * np.exp(-(gaps**2) / (4 * t)) for t in times])

        fits = varadhan_matrix(times, kernels)

        np.testing.assert_allclose(fits.distance, gaps, atol=1e-8)
        assert not fits.flagged.any()
        np.testing.assert_array_equal(np.diag(fits.distance), 0.0)

    def test_unreachable_pairs_are_flagged(self):
        """Test that pairs below the ratio floor at every time are flagged."""
        times = np.geomspace(0.1, 1.0, 8)
        kernels = np.zeros((8, 2, 2))
        kernels[:, 0, 0] = kernels[:, 1, 1] = 1.0

        fits = varadhan_matrix(times, kernels)

        assert fits.flagged[0, 1]
        assert not fits.flagged[0, 0]


class TestDensityRecovery:
    """Tests for density and dimension from the diagonal."""

    def test_analytic_constant(self):
        """Test κ_n = (4π)^{-n/2}."""
        assert analytic_constant(1) == pytest.approx((4 * np.pi) ** -0.5)
        assert analytic_constant(2) == pytest.approx(1.0 / (4 * np.pi))

    def test_one_dimensional_density(self):
        """Test n̂ = 1 and ρ̂ = ρ for p(x, x, t) = κ₁/(ρ √t)."""
        times = np.geomspace(0.01, 0.5, 20)
        diag = analytic_constant(1) / (2.5 * np.sqrt(times))

        estimate = density_recovery(times, diag)

        assert estimate.dimension == 1
        assert estimate.density == pytest.approx(2.5, rel=1e-8)
        assert estimate.slopes()[2] == pytest.approx(0.5)

    def test_two_dimensional_density(self):
        """Test n̂ = 2 for a 1/t diagonal."""
        times = np.geomspace(0.01, 0.5, 20)

        estimate = density_recovery(times, analytic_constant(2) / (0.5 * times))

        assert estimate.dimension == 2
        assert estimate.density == pytest.approx(0.5, rel=1e-8)

    def test_equally_flat_candidates_are_ambiguous(self):
        """Test that t^{-3/4} cannot decide between n = 1 and n = 2."""
        times = np.geomspace(0.01, 1.0, 20)

        with pytest.raises(DimensionAmbiguityError) as exc_info:
            density_recovery(times, times**-0.75)

        assert exc_info.value.stage == "reconstruct"
        assert "slope_1" in exc_info.value.details

    def test_window_too_short(self):
        """Test that fewer than three samples above the floor are rejected."""
        times = np.geomspace(0.01, 1.0, 10)

        with pytest.raises(DimensionAmbiguityError, match="fewer than three"):
            density_recovery(times, times**-0.5, t_floor=0.9)

    def test_calibration_replaces_analytic_constant(self):
        """Test that a calibrated κ₁ recovers the exemplar density."""
        times = np.geomspace(0.01, 0.5, 20)
        diag = np.column_stack([0.3 / np.sqrt(times)] * 4)

        calibration = calibrate_density_constant(times, diag, 1, density=2.0, source="exemplar")
        estimate = density_recovery(times, diag[:, 0], calibration={1: calibration})

        assert calibration.constant == pytest.approx(0.6)
        assert calibration.spread == pytest.approx(0.0, abs=1e-12)
        assert calibration.source == "exemplar"
        assert estimate.density == pytest.approx(2.0, rel=1e-8)

    def test_profile_names_ambiguous_points(self):
        """Test that density_profile reports every ambiguous column."""
        times = np.geomspace(0.01, 1.0, 20)
        diag = np.column_stack([times**-0.5, times**-0.75, times**-0.75])

        with pytest.raises(DimensionAmbiguityError) as exc_info:
            density_profile(times, diag)

        assert exc_info.value.details["points"] == [1, 2]
        assert exc_info.value.details["count"] == 2


class TestSynthesis:
    """Tests for kernel synthesis and gauge alignment."""

    def test_synthesis_is_gauge_invariant(self, rng):
        """Test that rotating a cluster block leaves p̂ unchanged."""
        values = rng.standard_normal((3, 5))
        eigenvalues = np.array([0.0, 1.0, 1.0])
        angle = 0.7
        rotation = np.array([[np.cos(angle), -np.sin(angle)], [np.sin(angle), np.cos(angle)]])
        rotated = values.copy()
        rotated[1:] = rotation @ values[1:]
        times = np.array([0.1, 1.0])

        np.testing.assert_allclose(
            synthesize_kernels(eigenvalues, rotated, times),
            synthesize_kernels(eigenvalues, values, times),
            atol=1e-12,
        )

    def test_gauge_aligned_error_ignores_rotation(self, rng):
        """Test that the error of a rotated copy is zero."""
        values = rng.standard_normal((3, 6))
        rotated = values.copy()
        rotated[1:] = np.array([[0.0, 1.0], [-1.0, 0.0]]) @ values[1:]

        assert gauge_aligned_error(rotated, values, [(0,), (1, 2)]) == pytest.approx(0.0, abs=1e-12)


class TestReconstructionResult:
    """Tests for the result model."""

    def test_rejects_asymmetric_distance(self):
        """Test the symmetry check."""
        distance = np.array([[0.0, 1.0], [2.0, 0.0]])

        with pytest.raises(ValueError, match="symmetric"):
            make_result(distance)

    def test_rejects_nonzero_diagonal(self):
        """Test the diagonal check."""
        with pytest.raises(ValueError, match="diagonal"):
            make_result(np.eye(2))

    def test_triangle_violations(self):
        """Test that d(0, 2) > d(0, 1) + d(1, 2) is reported."""
        distance = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
        result = make_result(distance)

        frame = result.triangle_violations()

        assert len(frame) == 1
        assert (frame.loc[0, "i"], frame.loc[0, "j"], frame.loc[0, "via"]) == (0, 2, 1)
        assert result.max_triangle_violation() == pytest.approx(3.0)

    def test_metric_has_no_violations(self):
        """Test that a path metric passes."""
        distance = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]])

        assert make_result(distance).max_triangle_violation() == 0.0


class TestAssembleSpace:
    """Tests for space assembly on the quarter window."""

    def test_window_metric_and_density(self, extracted):
        """Test that the window keeps its metric and has unit 1-D density."""
        result = assemble_space(extracted)

        assert result.size == 8
        assert result.labels[0] == "V:0"
        np.testing.assert_allclose(result.distance, extracted.window_distance, atol=1e-12)
        assert np.all(result.dimension == 1)
        np.testing.assert_allclose(result.density, 1.0, rtol=0.05)
        assert result.mass == pytest.approx(2.0 * np.pi)
        assert result.provenance["extraction"] == "spectral-data"

    def test_comparison_against_ground_truth(self, extracted, circle32, circle32_spectrum):
        """Test the validation report on an exact window."""
        reference = ReferenceData(space=circle32, spectrum=circle32_spectrum, density=np.ones(32))

        result = assemble_space(extracted, reference=reference)
        report = result.comparison

        assert report is not None
        assert report.max_metric_distortion == pytest.approx(0.0, abs=1e-12)
        assert report.pairs_compared == 28
        assert report.mass_error == pytest.approx(0.0, abs=1e-10)
        assert report.eigenfunction_error < 1e-10
        assert report.density_ratio_error < 0.05
        assert "d_true" in result.pairs_frame().columns

    def test_point_values_must_match_modes(self, extracted):
        """Test the mode-count check on recovered points."""
        with pytest.raises(ValueError, match="point values"):
            assemble_space(extracted, point_values=np.zeros((3, 1)))

    def test_varadhan_frame(self, extracted):
        """Test one row per pair and time."""
        result = assemble_space(extracted)

        frame = varadhan_frame(result)

        assert list(frame.columns) == ["p", "q", "t", "y", "fit"]
        assert len(frame) == result.times.size * 28
