"""Exception hierarchy for the Tiresias pipeline.

Every error carries the stage that raised it and a details mapping with the
diagnostics needed to reproduce the failure (residual norms, offending
vertices, fitted windows).
"""

from typing import Any


class TiresiasError(Exception):
    """Base error for all pipeline stages.

    Attributes:
        message: Human-readable description
        stage: Pipeline stage that raised the error (e.g. ``"gelfand"``)
        details: Structured diagnostics
    """

    default_stage: str | None = None

    def __init__(
        self,
        message: str,
        stage: str | None = None,
        details: dict[str, Any] | None = None,
    ) -> None:
        self.message = message
        self.stage = stage or self.default_stage
        self.details = details or {}

        full_message = message
        if self.stage:
            full_message = f"[{self.stage}] {full_message}"
        if self.details:
            rendered = ", ".join(f"{key}={value}" for key, value in sorted(self.details.items()))
            full_message = f"{full_message} ({rendered})"

        super().__init__(full_message)


class SpaceConstructionError(TiresiasError):
    """Invalid builder arguments, non-equivariant involutions, bad space files."""

    default_stage = "mms"


class DisconnectedSpaceError(SpaceConstructionError):
    """The edge set does not connect every vertex."""

    def __init__(self, component: list[int]) -> None:
        self.component = component
        preview = component[:10]
        super().__init__(
            "Graph is disconnected",
            details={"component_size": len(component), "component": preview},
        )


class SpectralError(TiresiasError):
    """Eigensolver failures and invalid heat-kernel queries."""

    default_stage = "spectral"


class WaveProblemError(TiresiasError):
    """Malformed wave problems: support violations, undeclared truncation."""

    default_stage = "wave"


class IllPosedDataError(TiresiasError):
    """Observation data cannot support the requested limit."""

    default_stage = "gelfand"


class RankAmbiguityError(TiresiasError):
    """Numerical rank of a cluster kernel cannot be decided."""

    default_stage = "gelfand"


class ControlError(TiresiasError):
    """Numerical inconsistencies in Gram matrices or projection volumes."""

    default_stage = "control"


class ResolutionError(TiresiasError):
    """No candidate distance profile survived the slice test."""

    default_stage = "control"


class DimensionAmbiguityError(TiresiasError):
    """No unique dimension gives a stable density limit."""

    default_stage = "reconstruct"


class StabilityError(TiresiasError):
    """A vertex map or comparison input is inconsistent."""

    default_stage = "stability"


class ArtifactError(TiresiasError):
    """Expected artifacts are missing from a run directory."""

    default_stage = "cli"


class ConfigurationError(TiresiasError):
    """Configuration rules that can only be checked against data."""

    default_stage = "config"
