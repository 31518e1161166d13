"""Summary table of a run: one row per (stage, metric)."""

from dataclasses import dataclass, field
from typing import Any

import pandas as pd

from tiresias.config import Baseline


@dataclass(frozen=True)
class SummaryRow:
    """One measured metric and its verdict.

    Attributes:
        stage: Producing stage
        metric: Metric name, unique within the stage
        value: Measured value
        baseline: Recorded baseline value (if any)
        passed: Verdict against the baseline; None without a baseline
    """

    stage: str
    metric: str
    value: float
    baseline: float | None = None
    passed: bool | None = None

    @property
    def key(self) -> str:
        """``stage.metric``, the lookup key of baselines."""
        return f"{self.stage}.{self.metric}"


@dataclass
class SummaryTable:
    """Ordered collection of summary rows judged against baselines."""

    baselines: dict[str, Baseline] = field(default_factory=dict)
    rows: list[SummaryRow] = field(default_factory=list)

    def add(self, stage: str, metric: str, value: float) -> SummaryRow:
        """Record a metric, judging it against its baseline when one exists."""
        key = f"{stage}.{metric}"
        baseline = self.baselines.get(key)
        row = SummaryRow(
            stage=stage,
            metric=metric,
            value=float(value),
            baseline=baseline.value if baseline else None,
            passed=baseline.passes(float(value)) if baseline else None,
        )
        self.rows.append(row)
        return row

    def extend(self, stage: str, metrics: dict[str, float]) -> None:
        """Record several metrics of one stage in key order."""
        for metric in sorted(metrics):
            self.add(stage, metric, metrics[metric])

    @property
    def all_pass(self) -> bool:
        """Whether no judged row failed."""
        return all(row.passed is not False for row in self.rows)

    @property
    def failures(self) -> list[SummaryRow]:
        """Rows that failed their baseline."""
        return [row for row in self.rows if row.passed is False]

    def to_frame(self) -> pd.DataFrame:
        """Table with columns stage, metric, value, baseline, passed."""
        return pd.DataFrame(
            [
                {
                    "stage": r.stage,
                    "metric": r.metric,
                    "value": r.value,
                    "baseline": r.baseline,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
            columns=["stage", "metric", "value", "baseline", "passed"],
        )

    def to_payload(self) -> dict[str, Any]:
        """JSON-compatible form."""
        return {
            "all_pass": self.all_pass,
            "rows": [
                {
                    "stage": r.stage,
                    "metric": r.metric,
                    "value": r.value,
                    "baseline": r.baseline,
                    "passed": r.passed,
                }
                for r in self.rows
            ],
        }
