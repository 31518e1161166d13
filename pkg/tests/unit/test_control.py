"""
Tests for Boundary Control: source bases, projectors and slices.
"""

import numpy as np
import pytest
import tiresias.control.slices as slices_module
from tiresias.control import (
    ControlBasis,
    ProfileCandidate,
    ProfileSearchResult,
    ProjectionEngine,
    SliceFamily,
    alternating_projection,
    controllability_gram,
    difference_projector,
    domain_of_influence,
    evaluate_profile,
    generators_near,
    nearest_spacing,
    profile_collisions,
    range_projector,
    recover_distance_function,
    recover_point_eigenvalues,
    search_profiles,
    true_profiles,
)
from tiresias.control.slices import _extrapolate
from tiresias.errors import ControlError, ResolutionError
from tiresias.gelfand import window_spectral_data
from tiresias.mms import build_circle
from tiresias.wave import source_to_coefficients


@pytest.fixture(scope="module")
def extracted(circle32_spectrum, quarter_observation):
    """Complete spectral data on the quarter window."""
    return window_spectral_data(circle32_spectrum, quarter_observation)


@pytest.fixture
def engine(extracted):
    """Projection engine with a coarse hat spacing."""
    return ProjectionEngine(extracted, time_step=0.25)


class TestControlBasis:
    """Tests for the indicator × hat source basis."""

    def test_hat_layout(self):
        """Test K − 1 interior hats with spacing s/K."""
        basis = ControlBasis((0, 1), horizon=1.0, time_step=0.3)

        assert basis.hat_count == 3
        assert basis.spacing == pytest.approx(0.25)
        assert basis.size == 6
        np.testing.assert_allclose(basis.centres(), [0.25, 0.5, 0.75])

    def test_refined_halves_spacing(self):
        """Test the refined basis."""
        basis = ControlBasis((0,), horizon=1.0, time_step=0.25).refined()

        assert basis.time_step == 0.125
        assert basis.hat_count == 7

    def test_zero_horizon_has_no_hats(self, extracted):
        """Test that s ≤ 0 gives an empty modal matrix."""
        basis = ControlBasis((0,), horizon=0.0, time_step=0.1)

        assert basis.hat_count == 0
        assert basis.modal_matrix(extracted).shape == (0, extracted.mode_cutoff)

    def test_invalid_basis(self):
        """Test that empty generators and non-positive steps are rejected."""
        with pytest.raises(ValueError, match="generator"):
            ControlBasis((), horizon=1.0, time_step=0.1)
        with pytest.raises(ValueError, match="time_step"):
            ControlBasis((0,), horizon=1.0, time_step=0.0)

    def test_modal_rows_match_wave_coefficients(self, extracted):
        """Test that each modal row is the Duhamel solution of its source."""
        basis = ControlBasis((2, 5), horizon=1.2, time_step=0.3)
        rows = basis.modal_matrix(extracted)

        for row, source in zip(rows, basis.sources(), strict=True):
            np.testing.assert_allclose(
                row, source_to_coefficients(extracted, source, basis.horizon), atol=1e-12
            )

    def test_generator_outside_window(self, extracted):
        """Test that generators must lie in the window."""
        with pytest.raises(ControlError, match="outside the window"):
            ControlBasis((20,), horizon=1.0, time_step=0.5).modal_matrix(extracted)

    def test_generators_near(self, extracted):
        """Test window balls around a window vertex."""
        h = 2.0 * np.pi / 32

        assert generators_near(extracted, extracted.window_distance, 3, 1.5 * h) == (2, 3, 4)
        with pytest.raises(ControlError, match="centre"):
            generators_near(extracted, extracted.window_distance, 20, h)


class TestProjections:
    """Tests for projector algebra."""

    def test_range_projector_is_orthogonal_projector(self, rng):
        """Test idempotence and symmetry."""
        rows = rng.standard_normal((3, 6))

        projector = range_projector(rows, 1e-3)

        np.testing.assert_allclose(projector @ projector, projector, atol=1e-12)
        np.testing.assert_allclose(projector, projector.T, atol=1e-12)
        assert np.trace(projector) == pytest.approx(3.0)

    def test_range_projector_of_zero_rows(self):
        """Test that no sources give the zero projector."""
        np.testing.assert_array_equal(range_projector(np.zeros((2, 4)), 1e-3), np.zeros((4, 4)))

    def test_difference_projector(self):
        """Test P_{A \\ B} for nested coordinate subspaces."""
        outer = np.diag([1.0, 1.0, 0.0])
        inner = np.diag([1.0, 0.0, 0.0])

        np.testing.assert_allclose(difference_projector(outer, inner), np.diag([0.0, 1.0, 0.0]), atol=1e-12)

    def test_alternating_projection_to_intersection(self):
        """Test that alternation converges to the common subspace."""
        first = np.diag([1.0, 1.0, 0.0])
        second = np.diag([0.0, 1.0, 1.0])

        vector = alternating_projection([first, second], np.ones(3))

        np.testing.assert_allclose(vector, [0.0, 1.0, 0.0], atol=1e-12)

    def test_gram_is_positive_semidefinite(self, extracted):
        """Test the controllability Gram matrix."""
        basis = ControlBasis((0, 1, 2), horizon=1.0, time_step=0.25)

        gram = controllability_gram(extracted, basis)

        assert gram.shape == (basis.size, basis.size)
        np.testing.assert_allclose(gram, gram.T)
        assert np.linalg.eigvalsh(gram)[0] > -1e-10 * max(1.0, np.abs(gram).max())


class TestProjectionEngine:
    """Tests for the memoised projection engine."""

    def test_projectors_are_cached_and_frozen(self, engine):
        """Test that the same request returns the same read-only array."""
        first = engine.projector((1, 0), 1.0)
        second = engine.projector([0, 1], 1.0)

        assert first is second
        assert not first.flags.writeable

    def test_non_positive_horizon(self, engine):
        """Test that s ≤ 0 gives the zero projector and zero volume."""
        projector = engine.projector((0,), 0.0)

        assert not np.any(projector)
        assert engine.volume(projector) == 0.0

    def test_volume_bounds(self, engine, extracted):
        """Test 0 ≤ m̂ ≤ m(X) and the residual range."""
        estimate = engine.project_constant((0, 1, 2, 3), 1.0)

        assert 0.0 <= estimate.volume <= extracted.mass * (1.0 + 1e-12)
        assert -1e-12 <= estimate.residual <= 1.0 + 1e-12
        assert -1e-12 <= estimate.refined_residual <= 1.0 + 1e-12
        assert estimate.volume == pytest.approx(extracted.mass * (1.0 - estimate.residual))

    def test_influence_domain_rank(self, engine):
        """Test that the rank is the trace of the projector."""
        domain = engine.influence_domain((0, 1), 1.0)

        assert domain.generators == (0, 1)
        assert domain.rank == int(round(np.trace(domain.projector)))
        assert domain.vertices is None

    def test_negative_profile_slices_are_empty(self, engine):
        """Test that slices with negative times have zero volume."""
        family = SliceFamily.schedule((0, 7), np.array([-5.0, -5.0]), 2)

        assert engine.slice_volume(family) == 0.0


class TestGroundTruthSets:
    """Tests for validation-side sets."""

    def test_domain_of_influence(self):
        """Test X(U, τ) = {x : d(x, U) < τ} on an 8-cycle."""
        space = build_circle(8)
        h = 2.0 * np.pi / 8

        assert domain_of_influence(space, [0], 1.5 * h).tolist() == [0, 1, 7]
        assert domain_of_influence(space, [0, 4], 0.5 * h).tolist() == [0, 4]
        assert domain_of_influence(space, [0], 0.0).size == 0

    def test_slice_schedule(self):
        """Test δ = max(1/2k, floor) and s = r ± 2/k."""
        family = SliceFamily.schedule((0, 3), np.array([1.0, 2.0]), 4, min_radius=0.2)

        assert family.delta == pytest.approx(0.2)
        np.testing.assert_allclose(family.outer_times, [1.5, 2.5])
        np.testing.assert_allclose(family.inner_times, [0.5, 1.5])

    def test_slice_validation(self):
        """Test that profile length must match the net."""
        with pytest.raises(ValueError, match="profile"):
            SliceFamily.schedule((0, 1), np.array([1.0]), 2)
        with pytest.raises(ValueError, match="k >= 1"):
            SliceFamily(
                net=(0,),
                profile=np.array([1.0]),
                k=0,
                delta=0.5,
                outer_times=np.array([2.0]),
                inner_times=np.array([0.0]),
            )

    def test_slice_ground_truth_is_a_level_set(self, circle32):
        """Test that a thin slice around d(·, 0) = 10h holds both mirror vertices."""
        h = circle32.min_edge_length
        family = SliceFamily.schedule((0,), np.array([10 * h]), 20)

        assert family.ground_truth_set(circle32).tolist() == [10, 22]

    def test_whole_space_slice(self, circle32):
        """Test the trivial slice covers everything."""
        family = SliceFamily.whole_space((0, 5), horizon=10.0, min_radius=0.1)

        assert family.ground_truth_set(circle32).size == 32


class TestProfiles:
    """Tests for distance profiles and their acceptance."""

    def test_nearest_spacing(self, extracted, circle32):
        """Test the δ floor of an evenly spaced window."""
        assert nearest_spacing(extracted.window_distance) == pytest.approx(circle32.min_edge_length)
        assert nearest_spacing(np.zeros((1, 1))) == 0.0

    def test_true_profiles(self, circle32):
        """Test r_x(ξ) = d(x, ξ)."""
        profiles = true_profiles(circle32, (0, 8))

        assert profiles.shape == (32, 2)
        assert profiles[16, 0] == pytest.approx(np.pi)

    def test_profile_collisions(self, circle32):
        """Test that one net point cannot tell mirror vertices apart and two can."""
        assert len(profile_collisions(circle32, (0,), 1e-9)) == 15
        assert profile_collisions(circle32, (0, 8), 1e-9) == []

    def test_impossible_profile_is_rejected(self, engine):
        """Test that a profile with empty slices is not accepted."""
        candidate = evaluate_profile(engine, (0, 7), np.array([-5.0, -5.0]), (2, 4))

        assert not candidate.accepted
        assert candidate.achieved_k == 0
        assert len(candidate.volumes) == 1

    def test_no_accepted_profile_raises(self, engine):
        """Test ResolutionError when every candidate fails."""
        candidates = np.array([[-5.0, -5.0], [-4.0, -4.0]])

        with pytest.raises(ResolutionError) as exc_info:
            recover_distance_function(engine, (0, 7), candidates, (2, 4), lattice_step=0.1)

        assert exc_info.value.details["candidates"] == 2
        assert exc_info.value.stage == "control"

    def test_point_values_collapse(self, engine, extracted):
        """Test a partial result when the slice volume collapses."""
        values = recover_point_eigenvalues(engine, (0, 7), np.array([-5.0, -5.0]), (2, 4))

        assert values.partial
        assert values.diagnostic == "slice volume collapsed at k=2"
        assert np.all(np.isnan(values.values))
        assert values.values.shape == (extracted.mode_cutoff,)

    def test_extrapolation_in_inverse_k(self):
        """Test that a linear trend in 1/k extrapolates to its intercept."""
        ks = [2, 4, 8]
        samples = np.array([[1.0 + 0.5 / k, 2.0 - 1.0 / k] for k in ks])

        np.testing.assert_allclose(_extrapolate(ks, samples), [1.0, 2.0], atol=1e-12)
        np.testing.assert_allclose(_extrapolate([3], samples[:1]), samples[0])

    def test_search_result_frame(self):
        """Test the candidate × net-point table."""
        result = ProfileSearchResult(
            net=(0, 5),
            candidates=[
                ProfileCandidate(np.array([0.1, 0.2]), True, 4),
                ProfileCandidate(np.array([0.3, 0.4]), False, 2),
            ],
            k_max=4,
            lattice_step=0.1,
        )

        frame = result.to_frame()

        assert list(frame.columns) == ["xi_0", "xi_5", "accepted", "achieved_k"]
        assert frame["accepted"].tolist() == [True, False]
        assert result.accepted_matrix().shape == (1, 2)


class TestProfileSearch:
    """Tests for the lattice search over distance profiles."""

    NET = (0, 7)

    def test_metric_pruning(self, engine, extracted, circle32, mocker):
        """Test that only profiles within one lattice step of the metric bounds survive."""
        mocker.patch.object(engine, "slice_volume", return_value=np.inf)
        recover = mocker.patch.object(slices_module, "recover_distance_function")
        step = circle32.min_edge_length

        search_profiles(engine, self.NET, step, 3.2, (2, 4))

        survivors = recover.call_args.args[2]
        lattice_size = int(np.floor(3.2 / step)) + 1
        d = extracted.window_distance[0, 7]
        assert 0 < survivors.shape[0] < lattice_size**2
        assert np.all(np.abs(survivors[:, 0] - survivors[:, 1]) <= d + step + 1e-12)
        assert np.all(survivors[:, 0] + survivors[:, 1] >= d - step - 1e-12)

    def test_true_profiles_survive_pruning(self, engine, circle32, mocker):
        """Test that every true profile inside the search radius is enumerated."""
        mocker.patch.object(engine, "slice_volume", return_value=np.inf)
        recover = mocker.patch.object(slices_module, "recover_distance_function")

        search_profiles(engine, self.NET, circle32.min_edge_length, 3.2, (2, 4))

        survivors = recover.call_args.args[2]
        truth = true_profiles(circle32, self.NET)
        for profile in truth[np.max(truth, axis=1) <= 3.2]:
            assert np.min(np.max(np.abs(survivors - profile), axis=1)) < 1e-9

    def test_truncation(self, engine, circle32, mocker):
        """Test that enumeration stops at max_candidates."""
        mocker.patch.object(engine, "slice_volume", return_value=np.inf)
        recover = mocker.patch.object(slices_module, "recover_distance_function")

        search_profiles(engine, self.NET, circle32.min_edge_length, 3.2, (2, 4), max_candidates=3)

        assert recover.call_args.args[2].shape == (3, 2)

    def test_slice_pruning(self, engine, circle32, mocker):
        """Test that an empty coarse slice prunes the whole subtree."""
        volume = mocker.patch.object(engine, "slice_volume", return_value=0.0)

        with pytest.raises(ResolutionError, match="survived pruning"):
            search_profiles(engine, self.NET, circle32.min_edge_length, 3.2, (2, 4))

        assert all(call.args[0].k == 2 for call in volume.call_args_list)
        assert all(len(call.args[0].net) == 1 for call in volume.call_args_list)

    def test_nothing_survives_below_one_step(self, engine, circle32):
        """Test ResolutionError when the radius admits only the zero profile."""
        with pytest.raises(ResolutionError) as exc_info:
            search_profiles(engine, self.NET, circle32.min_edge_length, 0.05, (2, 4))

        assert exc_info.value.details["max_radius"] == 0.05
        assert exc_info.value.stage == "control"

    def test_search_accepts_window_point(self, engine, circle32):
        """Test that the true profile of an interior window vertex is accepted."""
        result = search_profiles(engine, self.NET, circle32.min_edge_length, 3.2, (2, 4))

        accepted = result.accepted_matrix()
        profile = true_profiles(circle32, self.NET)[3]
        assert result.k_max == 4
        assert np.min(np.max(np.abs(accepted - profile), axis=1)) < 1e-9
