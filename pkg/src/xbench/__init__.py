"""Synthetic data, experiment runners, CSV reports and the xbench CLI."""

from .experiments import (
    extract_features,
    fit_decomposition,
    project_samples,
    recovery_summary,
    run_distribution_experiment,
    run_feature_extraction,
    run_recovery_experiment,
)
from .images import tensorize_image, untensorize_image
from .metrics import exact_sampling_distribution, kl_divergence
from .report import REPORT_COLUMNS, ExperimentReport, read_reports, write_reports
from .synth import synth_cp, synth_tr

__all__ = [
    "REPORT_COLUMNS",
    "ExperimentReport",
    "exact_sampling_distribution",
    "extract_features",
    "fit_decomposition",
    "kl_divergence",
    "project_samples",
    "read_reports",
    "recovery_summary",
    "run_distribution_experiment",
    "run_feature_extraction",
    "run_recovery_experiment",
    "synth_cp",
    "synth_tr",
    "tensorize_image",
    "untensorize_image",
    "write_reports",
]
