"""
Tests for ε-approximation measurements, vertex maps and ladders.
"""

import numpy as np
import pytest
from tiresias.errors import StabilityError
from tiresias.mms import build_circle, build_weighted_interval, perturb_edge_lengths, relabel
from tiresias.spectral import eigensolve
from tiresias.stability import (
    ApproxReport,
    ExtensionResult,
    ProfileRun,
    StabilityLadder,
    VertexMap,
    approximation_report,
    eigen_eps,
    extend_map_via_pipeline,
    gh_distortion,
    heat_ratio_eps,
    match_profiles,
    self_consistent_time_eps,
    stability_ladder,
)
from tiresias.stability.extension import _shifted_net


@pytest.fixture(scope="module")
def circle8():
    """Smallest admissible cycle."""
    return build_circle(8)


@pytest.fixture(scope="module")
def relabeled(circle8):
    """Relabeled copy of the 8-cycle and its permutation."""
    permutation = np.array([3, 0, 6, 1, 7, 2, 5, 4])
    return relabel(circle8, permutation), permutation


def report(**overrides) -> ApproxReport:
    values = {
        "vertex_map": VertexMap.identity([0, 1]),
        "heat_ratio_eps": 0.1,
        "eigen_eps": 0.2,
        "gh_distortion": 0.0,
        "surjectivity_defect": 0.0,
    }
    values.update(overrides)
    return ApproxReport(**values)


class TestVertexMap:
    """Tests for partial vertex maps."""

    def test_identity_and_apply(self):
        """Test ψ(x) = x and restriction."""
        psi = VertexMap.identity([2, 5, 7])

        assert psi.size == 3
        assert psi.apply([7, 2]).tolist() == [7, 2]
        assert psi.restrict([5]).image.tolist() == [5]

    def test_from_permutation(self):
        """Test ψ(i) = permutation[i]."""
        psi = VertexMap.from_permutation(np.array([2, 0, 1]))

        assert psi.apply([0, 1, 2]).tolist() == [2, 0, 1]

    def test_duplicate_domain_rejected(self):
        """Test that domain vertices must be distinct."""
        with pytest.raises(ValueError, match="distinct"):
            VertexMap(domain=np.array([1, 1]), image=np.array([0, 2]))

    def test_shape_mismatch_rejected(self):
        """Test that domain and image must align."""
        with pytest.raises(ValueError, match="equal length"):
            VertexMap(domain=np.array([0, 1]), image=np.array([0]))

    def test_apply_outside_domain(self):
        """Test StabilityError for an unmapped vertex."""
        with pytest.raises(StabilityError) as exc_info:
            VertexMap.identity([0, 1]).apply([4])

        assert exc_info.value.details["vertex"] == 4

    def test_validate_against_spaces(self, circle8):
        """Test that images outside the second space are rejected."""
        psi = VertexMap(domain=np.array([0, 1]), image=np.array([0, 9]))

        with pytest.raises(StabilityError, match="image outside"):
            psi.validate(circle8, circle8)


class TestSelfConsistentTime:
    """Tests for the self-consistent time ε."""

    def test_binding_tail(self):
        """Test min_i max(tail_i, t_{i−1}) on a three-point grid."""
        times = np.array([0.1, 0.5, 1.0])
        deviations = np.array([0.3, 0.05, 0.02])

        assert self_consistent_time_eps(times, deviations) == pytest.approx(0.1)

    def test_zero_deviation(self):
        """Test that identical kernels give ε = 0."""
        assert self_consistent_time_eps(np.array([0.1, 1.0]), np.zeros(2)) == 0.0


class TestHeatRatio:
    """Tests for the heat-ratio ε."""

    def test_identity_is_exact(self, circle8):
        """Test ε = 0 for a space against itself."""
        assert heat_ratio_eps(circle8, circle8, VertexMap.identity(range(8))) == 0.0

    def test_isometric_relabeling(self, circle8, relabeled):
        """Test that a relabeled copy is ε-close for tiny ε."""
        space_y, permutation = relabeled

        eps = heat_ratio_eps(circle8, space_y, VertexMap.from_permutation(permutation))

        assert eps < 1e-8

    def test_perturbation_is_detected(self, circle8):
        """Test that edge-length noise moves ε away from zero."""
        perturbed = perturb_edge_lengths(circle8, 0.2, seed=1)

        assert heat_ratio_eps(circle8, perturbed, VertexMap.identity(range(8))) > 0.0

    def test_time_window_must_lie_in_unit_interval(self, circle8):
        """Test that t > 1 is rejected."""
        with pytest.raises(StabilityError, match="time window"):
            heat_ratio_eps(circle8, circle8, VertexMap.identity([0]), times=np.array([0.5, 2.0]))


class TestEigenEps:
    """Tests for the eigendata ε."""

    def test_identical_spectra(self, circle8):
        """Test a vanishing ε on the same spectral data."""
        spec = eigensolve(circle8)

        eps, structural = eigen_eps(spec, spec, VertexMap.identity(range(8)))

        assert eps < 1e-8
        assert not structural

    def test_structural_mismatch(self, circle8):
        """Test ε = inf when the multiplicities differ."""
        interval = build_weighted_interval(8)

        eps, structural = eigen_eps(
            eigensolve(circle8), eigensolve(interval), VertexMap.identity(range(8))
        )

        assert eps == float("inf")
        assert structural


class TestDistortion:
    """Tests for metric distortion and surjectivity."""

    def test_relabeling_is_an_isometry(self, circle8, relabeled):
        """Test zero distortion and full image."""
        space_y, permutation = relabeled

        distortion, defect = gh_distortion(circle8, space_y, VertexMap.from_permutation(permutation))

        assert distortion == 0.0
        assert defect == 0.0

    def test_partial_image_defect(self, circle8):
        """Test that an image of one vertex leaves half the cycle uncovered."""
        _, defect = gh_distortion(circle8, circle8, VertexMap.identity([0]))

        assert defect == pytest.approx(np.pi)

    def test_report_fields(self, circle8, relabeled):
        """Test the combined report."""
        space_y, permutation = relabeled
        spec_x = eigensolve(circle8)
        spec_y = eigensolve(space_y)

        combined = approximation_report(
            circle8, space_y, spec_x, spec_y, VertexMap.from_permutation(permutation)
        )

        assert combined.gh_distortion == 0.0
        assert combined.heat_ratio_eps < 1e-8
        assert combined.to_dict()["mapped_vertices"] == 8

    def test_negative_measures_rejected(self):
        """Test ApproxReport validation."""
        with pytest.raises(ValueError, match="nonnegative"):
            report(gh_distortion=-1.0)


class TestMatching:
    """Tests for profile matching and map extension."""

    def test_nearest_profile_assignment(self):
        """Test sup-norm matching and ambiguity detection."""
        run_x = ProfileRun(net=(0,), profiles=np.array([[0.0], [1.0], [2.0]]), vertices=np.array([0, 1, 2]))
        run_y = ProfileRun(
            net=(0,), profiles=np.array([[0.02], [1.01], [1.04], [2.0]]), vertices=np.array([10, 11, 12, 13])
        )

        psi, ambiguous = match_profiles(run_x, run_y, resolution=0.05)

        assert psi.domain.tolist() == [0, 1, 2]
        assert psi.image.tolist() == [10, 11, 13]
        assert ambiguous == (1,)

    def test_shifted_net(self):
        """Test that net points move one window position, wrapping around."""
        assert _shifted_net(np.array([3, 4, 5]), (3, 5)) == (4, 3)

    def test_almost_unique(self):
        """Test the uniqueness verdict against the lattice resolution."""
        psi = VertexMap.identity([0])

        assert ExtensionResult(psi, report(), uniqueness_gap=0.01, resolution=0.05).almost_unique
        assert not ExtensionResult(psi, report(), uniqueness_gap=0.1, resolution=0.05).almost_unique
        assert ExtensionResult(psi, report()).almost_unique is None

    def test_extension_rejects_maps_outside_the_spaces(self, circle8):
        """Test that ψ is validated before any pipeline work."""
        spec = eigensolve(circle8)
        psi = VertexMap(domain=np.array([0]), image=np.array([42]))

        with pytest.raises(StabilityError, match="image outside"):
            extend_map_via_pipeline(circle8, spec, circle8, spec, psi)


class TestLadder:
    """Tests for perturbation ladders."""

    def test_ladder_table_and_monotonicity(self):
        """Test rows per magnitude and the monotone check."""
        ladder = StabilityLadder()
        ladder.add(0.2, report(heat_ratio_eps=0.3), 0.5)
        ladder.add(0.1, report(heat_ratio_eps=0.1), 0.2)

        frame = ladder.to_frame()

        assert list(frame.columns) == ["magnitude", "heat_ratio_eps", "eigen_eps", "distortion"]
        assert ladder.monotone("heat_ratio_eps")
        assert ladder.monotone("distortion")

    def test_identity_ladder_without_pipeline(self):
        """Test that distortion starts at zero and grows with the perturbation."""
        space = build_circle(16)

        ladder = stability_ladder(space, np.arange(4), [0.2, 0.0], seed=3, run_pipeline=False)

        assert ladder.magnitudes == [0.0, 0.2]
        assert ladder.distortion[0] == pytest.approx(0.0, abs=1e-12)
        assert ladder.distortion[1] > 0.0
        assert ladder.heat_ratio_eps[0] < 1e-8
        assert ladder.monotone("distortion")
