"""Core orchestration for Tiresias experiments."""

from tiresias.core.pipeline import (
    DEPENDENCIES,
    STAGES,
    ExperimentRunner,
    RunStats,
    StageResult,
    stage_closure,
)
from tiresias.core.summary import SummaryRow, SummaryTable

__all__ = [
    "DEPENDENCIES",
    "STAGES",
    "ExperimentRunner",
    "RunStats",
    "StageResult",
    "SummaryRow",
    "SummaryTable",
    "stage_closure",
]
