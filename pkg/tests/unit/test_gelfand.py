"""
Tests for spectral extraction from window heat data.
"""

import numpy as np
import pytest
import tiresias.gelfand.extractor as extractor_module
from tiresias.errors import IllPosedDataError, RankAmbiguityError
from tiresias.gelfand import (
    ExtractedSpectrum,
    ExtractionAudit,
    SpectralExtractor,
    gauge_fix_cluster,
    heat_trace_on_V,
    monte_carlo_mass,
    numerical_rank,
    peel_exponentials,
    pivot_points,
    recover_eigenvalues,
    recover_mass_and_phi0,
    refine_on_clean_region,
    symmetric_sqrt,
    twist_gauge,
    window_spectral_data,
)
from tiresias.mms import arc_window, build_circle
from tiresias.spectral import ObservationWindow, eigensolve, geometric_grid, sample_observation


def exact_cluster_kernel(spec, window, cluster):
    block = spec.eigenfunctions[np.ix_(list(cluster), window)]
    return block.T @ block, block


class TestHeatTrace:
    """Tests for the window heat trace and mass recovery."""

    def test_trace_is_weighted_diagonal_sum(self, quarter_observation):
        """Test I_0(t) = Σ_x m_x p(x, x, t)."""
        obs = quarter_observation
        trace = heat_trace_on_V(obs)

        assert trace.shape == obs.t_grid.shape
        assert trace[0] == pytest.approx(float(np.sum(obs.measure_on_V * np.diag(obs.heat_samples[0]))))

    def test_mass_from_noise_free_trace(self, quarter_observation, circle32):
        """Test that m(X) is recovered from the long-time limit."""
        estimate = recover_mass_and_phi0(quarter_observation)

        assert estimate.mass == pytest.approx(circle32.total_mass, rel=1e-6)
        assert estimate.phi0 == pytest.approx(circle32.total_mass**-0.5, rel=1e-6)
        assert estimate.method in ("richardson", "plateau")

    def test_fast_final_decay_is_ill_posed(self):
        """Test that a negative extrapolated limit raises IllPosedDataError."""
        times = np.arange(1.0, 11.0)
        diagonal = np.exp(-times)
        diagonal[-1] *= 0.01
        obs = ObservationWindow(
            space_name="synthetic",
            vertices=np.array([0]),
            t_grid=times,
            heat_samples=diagonal[:, None, None],
            measure_on_V=np.ones(1),
            window_distance=np.zeros((1, 1)),
            mesh_size=1.0,
        )

        with pytest.raises(IllPosedDataError) as exc_info:
            recover_mass_and_phi0(obs)

        assert exc_info.value.stage == "gelfand"
        assert exc_info.value.details["limit"] < 0

    def test_monte_carlo_mass(self, circle32, circle32_spectrum, quarter_window):
        """Test the noise error bar over seeded draws."""
        grid = geometric_grid(0.05, 20.0, 16)

        bar = monte_carlo_mass(circle32_spectrum, circle32, quarter_window, grid, noise=1e-4, draws=3)

        assert bar.draws == 3
        assert len(bar.values) == 3
        assert bar.std >= 0.0
        assert bar.mean == pytest.approx(circle32.total_mass, rel=1e-2)


class TestPeeling:
    """Tests for exponential peeling."""

    def test_single_exponential(self):
        """Test that one decay rate and amplitude are recovered."""
        times = np.geomspace(0.01, 30.0, 60)
        values = 0.5 + 2.0 * np.exp(-1.5 * times)

        result = peel_exponentials(times, values, limit=0.5, max_components=1)

        assert result.achieved == 1
        assert not result.partial
        assert result.rates[0] == pytest.approx(1.5, rel=1e-6)
        assert result.amplitudes[0] == pytest.approx(2.0, rel=1e-6)
        assert result.fit_start > 0

    def test_flat_signal_is_partial(self):
        """Test that a constant signal yields no components."""
        times = np.geomspace(0.01, 10.0, 40)

        result = peel_exponentials(times, np.full(40, 0.3), limit=0.3, max_components=2)

        assert result.achieved == 0
        assert result.partial
        assert result.diagnostic == "remainder below noise floor"
        assert result.fit_start == 0.0

    def test_clean_region_refit(self):
        """Test that refitting past the last peeled rate removes the bias of the unpeeled one."""
        times = np.geomspace(0.01, 40.0, 200)
        rates = np.array([1.0, 3.0, 7.0, 12.0])
        values = 0.2 + np.exp(-np.outer(times, rates)) @ np.array([2.0, 1.0, 0.5, 0.5])
        peel = peel_exponentials(times, values, limit=0.2, max_components=3)

        refined = refine_on_clean_region(times, values, 0.2, peel)

        assert peel.achieved == 3
        assert refined.clean_start is not None
        assert refined.model_start == refined.clean_start > peel.fit_start
        assert refined.rates[0] == pytest.approx(1.0, rel=1e-9)
        assert refined.rates[1] == pytest.approx(3.0, rel=1e-6)
        assert abs(refined.rates[1] - 3.0) <= abs(peel.rates[1] - 3.0)
        assert refined.offset == pytest.approx(0.0, abs=1e-13)

    def test_clean_region_absorbs_limit_error(self):
        """Test that a wrong limit shows up as the fitted offset."""
        times = np.geomspace(0.01, 40.0, 200)
        values = 0.2 + 2.0 * np.exp(-times) + 1.0 * np.exp(-3.0 * times) + 0.5 * np.exp(-7.0 * times)
        shifted = 0.2 + 1e-11
        peel = peel_exponentials(times, values, limit=shifted, max_components=3)

        refined = refine_on_clean_region(times, values, shifted, peel)

        assert refined.offset == pytest.approx(1e-11, rel=1e-2)
        assert refined.rates[0] == pytest.approx(1.0, rel=1e-9)

    def test_single_component_is_not_refined(self):
        """Test that a lone component is returned unchanged."""
        times = np.geomspace(0.01, 30.0, 60)
        values = 0.5 + 2.0 * np.exp(-1.5 * times)
        peel = peel_exponentials(times, values, limit=0.5, max_components=1)

        assert refine_on_clean_region(times, values, 0.5, peel) is peel
        assert peel.model_start == peel.fit_start

    def test_recover_first_eigenvalue(self, quarter_observation, circle32_spectrum, circle32):
        """Test that the slowest non-constant rate matches λ_1."""
        recovery = recover_eigenvalues(quarter_observation, circle32.total_mass, j_target=2)

        assert recovery.rates[0] == 0.0
        assert recovery.achieved >= 1
        assert recovery.rates[1] == pytest.approx(circle32_spectrum.eigenvalues[1], rel=1e-2)
        assert recovery.requested == 2


class TestGaugeFix:
    """Tests for rank decisions and gauge fixing."""

    def test_rank_of_exact_cluster(self, circle32_spectrum, quarter_window, circle32):
        """Test that a double eigenvalue has rank 2 on the window."""
        kernel, _ = exact_cluster_kernel(circle32_spectrum, quarter_window, (1, 2))

        assert numerical_rank(kernel, circle32.measure[quarter_window]) == 2

    def test_rank_of_zero_kernel(self):
        """Test that a vanishing kernel has rank 0."""
        assert numerical_rank(np.zeros((3, 3)), np.ones(3)) == 0

    def test_ambiguous_rank(self):
        """Test that an eigenvalue near the threshold is refused."""
        kernel = np.diag([1.0, 1e-6])

        with pytest.raises(RankAmbiguityError) as exc_info:
            numerical_rank(kernel, np.ones(2), rel_tol=1e-6)

        assert exc_info.value.details["threshold"] == pytest.approx(1e-6)

    def test_pivot_points(self):
        """Test greedy max-diagonal pivoting."""
        assert pivot_points(np.diag([1.0, 3.0, 2.0]), 2) == [1, 2]

    def test_symmetric_sqrt_clips_negative_part(self):
        """Test the square root of an indefinite matrix."""
        root = symmetric_sqrt(np.diag([4.0, -1.0]))

        np.testing.assert_allclose(root, np.diag([2.0, 0.0]), atol=1e-15)

    def test_gauge_fix_reproduces_kernel(self, circle32_spectrum, quarter_window, circle32):
        """Test that the fixed values equal the true ones up to rotation."""
        measure = circle32.measure[quarter_window]
        kernel, block = exact_cluster_kernel(circle32_spectrum, quarter_window, (1, 2))

        fixed = gauge_fix_cluster(kernel, measure)
        gram_fixed = (fixed.values * measure) @ fixed.values.T
        gram_true = (block * measure) @ block.T

        assert fixed.multiplicity == 2
        assert len(fixed.points) == 2
        assert fixed.reconstruction_residual < 1e-10
        np.testing.assert_allclose(
            np.sort(np.linalg.eigvalsh(gram_fixed)), np.sort(np.linalg.eigvalsh(gram_true)), atol=1e-10
        )

    def test_rank_one_sign(self, circle32_spectrum, quarter_window, circle32):
        """Test that simple clusters come out with a positive peak."""
        kernel, block = exact_cluster_kernel(circle32_spectrum, quarter_window, (0,))

        fixed = gauge_fix_cluster(kernel, circle32.measure[quarter_window])

        assert fixed.multiplicity == 1
        np.testing.assert_allclose(fixed.values, np.abs(block), atol=1e-12)

    def test_vanishing_kernel_fails(self):
        """Test that a zero cluster kernel is refused."""
        with pytest.raises(RankAmbiguityError, match="vanishes"):
            gauge_fix_cluster(np.zeros((2, 2)), np.ones(2))


class TestWindowSpectralData:
    """Tests for the spectral-data route."""

    def test_complete_data_reproduce_samples(self, circle32_spectrum, quarter_observation):
        """Test that the synthesized kernel matches the heat samples."""
        extracted = window_spectral_data(circle32_spectrum, quarter_observation)
        obs = quarter_observation

        residual = extracted.spectral_identity_residual(obs.t_grid, obs.heat_samples)

        assert extracted.provenance == "spectral-data"
        assert extracted.mode_cutoff == 32
        assert np.max(residual) < 1e-10

    def test_mass_from_constant_mode(self, circle32_spectrum, quarter_observation, circle32):
        """Test that m(X) comes from φ_0 on the window."""
        extracted = window_spectral_data(circle32_spectrum, quarter_observation)

        assert extracted.mass == pytest.approx(circle32.total_mass, rel=1e-12)
        assert extracted.phi0 == pytest.approx(circle32.total_mass**-0.5, rel=1e-12)

    def test_truncation_respects_clusters(self, circle32_spectrum, quarter_observation):
        """Test that j_max never splits a cluster."""
        assert window_spectral_data(circle32_spectrum, quarter_observation, j_max=4).mode_cutoff == 3
        assert window_spectral_data(circle32_spectrum, quarter_observation, j_max=5).mode_cutoff == 5

    def test_window_weights_sum_to_window_size(self, circle32_spectrum, quarter_observation):
        """Test Σ_j ∫_V φ_j² dm = |V| for complete data."""
        extracted = window_spectral_data(circle32_spectrum, quarter_observation)

        assert float(np.sum(extracted.window_weights())) == pytest.approx(8.0)

    def test_audit_marks_ground_truth(self, circle32_spectrum, quarter_observation):
        """Test that full-space eigenpairs are recorded as a ground-truth read."""
        extracted = window_spectral_data(circle32_spectrum, quarter_observation)

        assert extracted.audit.ground_truth_access
        assert "eigenfunctions|V" in extracted.audit.consumed

    def test_twist_keeps_cluster_kernels(self, circle32_spectrum, quarter_observation):
        """Test that 100 seeded gauge twists leave every Q_j and the samples unchanged."""
        extracted = window_spectral_data(circle32_spectrum, quarter_observation, j_max=7)
        obs = quarter_observation

        for seed in range(100):
            twisted = twist_gauge(extracted, np.random.default_rng(seed))

            assert not np.allclose(twisted.eigenfunctions[1:], extracted.eigenfunctions[1:])
            for c in range(len(extracted.clusters)):
                np.testing.assert_allclose(
                    twisted.cluster_kernel(c), extracted.cluster_kernel(c), atol=1e-12
                )
            np.testing.assert_allclose(
                twisted.spectral_identity_residual(obs.t_grid, obs.heat_samples),
                extracted.spectral_identity_residual(obs.t_grid, obs.heat_samples),
                atol=1e-12,
            )

    def test_clusters_must_partition_modes(self, quarter_observation):
        """Test ExtractedSpectrum validation."""
        with pytest.raises(ValueError, match="partition"):
            ExtractedSpectrum(
                space_name="x",
                vertices=quarter_observation.vertices,
                measure_on_V=quarter_observation.measure_on_V,
                window_distance=quarter_observation.window_distance,
                mesh_size=0.1,
                mass=1.0,
                eigenvalues=np.zeros(2),
                eigenfunctions=np.zeros((2, 8)),
                clusters=((0,),),
                provenance="heat",
                audit=ExtractionAudit(consumed=()),
            )


class TestSpectralExtractor:
    """Tests for the heat route."""

    def test_extract_from_heat(self, quarter_observation, circle32):
        """Test provenance, mass and the constant mode of a heat extraction."""
        extracted = SpectralExtractor(j_target=2).extract(quarter_observation)

        assert extracted.provenance == "heat"
        assert extracted.mass == pytest.approx(circle32.total_mass, rel=1e-6)
        assert extracted.eigenvalues[0] == 0.0
        assert extracted.clusters[0] == (0,)
        np.testing.assert_allclose(extracted.eigenfunctions[0], extracted.phi0)
        assert len(extracted.conditioning) == len(extracted.clusters)
        assert extracted.audit.consumed == extractor_module.HEAT_INPUTS
        assert not extracted.audit.ground_truth_access

    def test_rank_failure_makes_partial_result(self, quarter_observation, mocker):
        """Test that an undecided rank stops extraction with a diagnostic."""
        gauge_fix = mocker.patch.object(
            extractor_module, "gauge_fix_cluster", side_effect=RankAmbiguityError("forced")
        )

        extracted = SpectralExtractor(j_target=2).extract(quarter_observation)

        gauge_fix.assert_called_once()
        assert extracted.partial
        assert extracted.diagnostic == "rank of cluster 1 undecided"
        assert extracted.mode_cutoff == 1

    @pytest.mark.slow
    def test_circle128_quarter_arc_from_heat(self):
        """Test λ_1..λ_6, multiplicities and Q_j recovered from heat data on a quarter arc."""
        space = build_circle(128)
        spectrum = eigensolve(space)
        window = arc_window(space, 0, 32)
        obs = sample_observation(spectrum, space, window, geometric_grid(0.05, 20.0, 32))

        extracted = SpectralExtractor(j_target=3, rank_rel_tol=1e-4).extract(obs)

        assert not extracted.partial
        assert [len(c) for c in extracted.clusters] == [1, 2, 2, 2]
        assert extracted.mass == pytest.approx(space.total_mass, rel=1e-6)
        np.testing.assert_allclose(extracted.eigenvalues[1:7], spectrum.eigenvalues[1:7], rtol=1e-5)
        for c, cluster in enumerate(spectrum.clusters[:4]):
            truth, _ = exact_cluster_kernel(spectrum, window, cluster)
            np.testing.assert_allclose(extracted.cluster_kernel(c), truth, atol=1e-6)
        for seed in range(100):
            twisted = twist_gauge(extracted, np.random.default_rng(seed))
            for c in range(len(extracted.clusters)):
                np.testing.assert_allclose(
                    twisted.cluster_kernel(c), extracted.cluster_kernel(c), atol=1e-12
                )
