"""
Experiment reports and their CSV form.

Each run produces one ExperimentReport per method/arm. The CSV has the fixed
column order of REPORT_COLUMNS; list and dict fields are stored as JSON text
so that read_reports returns equal reports.
"""

import json
import logging
from pathlib import Path
from typing import Any

import pandas as pd
from pydantic import BaseModel, Field

from ..errors import FormatError
from ..schemas import FitDiagnostics

logger = logging.getLogger(__name__)

_JSON_FIELDS = ("error_trace", "normalization_constants", "config")


class ExperimentReport(BaseModel):
    experiment: str
    method: str
    seed: int
    seconds: float = 0.0
    final_rel_error: float | None = None
    error_trace: list[float] = Field(default_factory=list)
    iterations: int = 0
    clamp_events: int = 0
    rank_deficient_solves: int = 0
    normalization_constants: list[float] = Field(default_factory=list)
    kl_divergence: float | None = None
    accuracy: float | None = None
    success: bool | None = None
    j1: int | None = None
    j2: int | None = None
    config: dict[str, Any] = Field(default_factory=dict)

    @classmethod
    def from_fit(
        cls,
        experiment: str,
        diagnostics: FitDiagnostics,
        seed: int,
        **fields: Any,
    ) -> "ExperimentReport":
        values: dict[str, Any] = {
            "experiment": experiment,
            "method": diagnostics.method,
            "seed": seed,
            "seconds": diagnostics.seconds,
            "final_rel_error": diagnostics.final_error,
            "error_trace": diagnostics.errors,
            "iterations": diagnostics.iterations,
            "clamp_events": diagnostics.clamp_events,
            "rank_deficient_solves": diagnostics.rank_deficient_solves,
            "normalization_constants": diagnostics.normalization_constants,
        }
        return cls(**{**values, **fields})


REPORT_COLUMNS = list(ExperimentReport.model_fields)


def reports_frame(reports: list[ExperimentReport]) -> pd.DataFrame:
    rows = []
    for report in reports:
        row = report.model_dump()
        for name in _JSON_FIELDS:
            row[name] = json.dumps(row[name])
        rows.append(row)
    return pd.DataFrame(rows, columns=REPORT_COLUMNS)


def write_reports(path: str | Path, reports: list[ExperimentReport]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    reports_frame(reports).to_csv(path, index=False)
    logger.info("[OK] Wrote %d report rows to %s", len(reports), path)


def read_reports(path: str | Path) -> list[ExperimentReport]:
    frame = pd.read_csv(path, keep_default_na=False, na_values=[""])
    missing = [c for c in REPORT_COLUMNS if c not in frame.columns]
    if missing:
        raise FormatError(f"{path} is missing report columns {missing}")
    reports = []
    for record in frame[REPORT_COLUMNS].to_dict(orient="records"):
        record = {k: (None if pd.isna(v) else v) for k, v in record.items()}
        for name in _JSON_FIELDS:
            raw = record.pop(name)
            if raw is not None:
                record[name] = json.loads(raw)
        reports.append(ExperimentReport.model_validate(record))
    return reports
