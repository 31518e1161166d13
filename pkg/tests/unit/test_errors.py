"""
Tests for the error hierarchy.
"""

import pytest
from tiresias.errors import (
    ControlError,
    DimensionAmbiguityError,
    DisconnectedSpaceError,
    IllPosedDataError,
    RankAmbiguityError,
    ResolutionError,
    SpaceConstructionError,
    SpectralError,
    StabilityError,
    TiresiasError,
    WaveProblemError,
)


class TestTiresiasError:
    """Tests for the base error."""

    def test_message_with_stage_and_details(self):
        """Test the rendered message."""
        error = TiresiasError("fit failed", stage="reconstruct", details={"pair": 3, "floor": 0.1})

        assert str(error) == "[reconstruct] fit failed (floor=0.1, pair=3)"
        assert error.message == "fit failed"

    def test_plain_message(self):
        """Test an error without stage or details."""
        error = TiresiasError("boom")

        assert str(error) == "boom"
        assert error.stage is None
        assert error.details == {}

    def test_explicit_stage_overrides_default(self):
        """Test that a caller-supplied stage wins."""
        assert SpectralError("x", stage="stability").stage == "stability"


class TestStages:
    """Tests for default stages of the subclasses."""

    @pytest.mark.parametrize(
        ("error_class", "stage"),
        [
            (SpaceConstructionError, "mms"),
            (SpectralError, "spectral"),
            (WaveProblemError, "wave"),
            (IllPosedDataError, "gelfand"),
            (RankAmbiguityError, "gelfand"),
            (ControlError, "control"),
            (ResolutionError, "control"),
            (DimensionAmbiguityError, "reconstruct"),
            (StabilityError, "stability"),
        ],
    )
    def test_default_stage(self, error_class, stage):
        """Test that every error names the stage it belongs to."""
        error = error_class("failure")

        assert isinstance(error, TiresiasError)
        assert error.stage == stage
        assert str(error).startswith(f"[{stage}]")

    def test_disconnected_space(self):
        """Test that the offending component is previewed."""
        error = DisconnectedSpaceError(list(range(25)))

        assert isinstance(error, SpaceConstructionError)
        assert error.details["component_size"] == 25
        assert error.details["component"] == list(range(10))
        assert len(error.component) == 25
