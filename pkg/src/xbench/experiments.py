"""
Experiment runners behind the xbench subcommands.

- run_distribution_experiment: how close the sketched sampling distribution
  (and the product baseline) is to the exact leverage distribution, by KL
- run_recovery_experiment: planted spike tensors, sketched sampling against
  product sampling at matched sample counts
- run_feature_extraction: decompose, use the sample-mode factor/core as
  features, score 1-NN under stratified k-fold cross-validation
"""

import logging
import statistics
import time
from collections.abc import Sequence
from concurrent.futures import ThreadPoolExecutor
from typing import Literal

import numpy as np
from sklearn.model_selection import StratifiedKFold, cross_val_score
from sklearn.neighbors import KNeighborsClassifier

from ..baselines import ProductSamplerState, cp_arls_lev, tr_als_sampled
from ..cp import (
    CpEsConfig,
    CpSamplerState,
    cp_als,
    cp_als_es,
    cp_leaf_dims,
    cp_sketch_design,
    project_cp_samples,
)
from ..errors import ConfigError, ShapeError
from ..leverage import ChainDistribution, enumerate_joint, estimate_leverage_map
from ..randomness import SKETCH
from ..schemas import SampledAlsConfig
from ..sketch import RecursiveSketch
from ..sweeps import AlsFit
from ..tensor import (
    CpModel,
    DenseTensor,
    TrModel,
    check_mode,
    core_mode2_classical,
    cp_design_matrix,
    cyclic_modes_after,
    linear_index,
    rel_error,
    subchain_unfold_2,
)
from ..tr import (
    TrEsConfig,
    TrSamplerState,
    project_tr_samples,
    tr_als,
    tr_als_es,
    tr_leaf_dims,
    tr_sketch_design,
)
from .metrics import exact_sampling_distribution, kl_divergence
from .report import ExperimentReport
from .synth import synth_cp, synth_tr

logger = logging.getLogger(__name__)

Kind = Literal["cp", "tr"]
Method = Literal["exact", "es", "baseline"]

SUCCESS_THRESHOLD = 0.05
FAILURE_THRESHOLD = 0.5

BASELINE_NAMES = {"cp": "cp-arls-lev", "tr": "tr-als-sampled"}
ES_NAMES = {"cp": "cp-als-es", "tr": "tr-als-es"}


def _check_kind(kind: str) -> None:
    if kind not in ("cp", "tr"):
        raise ConfigError(f"decomposition kind must be 'cp' or 'tr', got {kind!r}")


def _cp_rank(rank: int | Sequence[int]) -> int:
    if not isinstance(rank, int):
        raise ConfigError(f"CP needs a single rank, got {rank}")
    return rank


def fit_decomposition(
    X: DenseTensor,
    kind: Kind,
    rank: int | Sequence[int],
    method: Method,
    config: SampledAlsConfig | None = None,
    tt: bool = False,
) -> AlsFit:
    """Dispatch to the exact, sketched or product-sampled ALS driver."""
    _check_kind(kind)
    if config is None:
        config = CpEsConfig() if kind == "cp" else TrEsConfig()
    if kind == "cp":
        rank = _cp_rank(rank)
        if method == "exact":
            return cp_als(
                X,
                rank,
                config.max_iterations,
                config.seed,
                config.tolerance,
                config.init,
                config.regularization,
            )
        if method == "es":
            return cp_als_es(X, rank, CpEsConfig(**config.model_dump()))
        if method == "baseline":
            return cp_arls_lev(
                X,
                rank,
                config.j2,
                config.max_iterations,
                config.seed,
                config.tolerance,
                config.init,
                config.regularization,
                config.exhaustive,
            )
    else:
        if method == "exact":
            return tr_als(
                X,
                rank,
                config.max_iterations,
                config.seed,
                config.tolerance,
                config.init,
                config.regularization,
                tt,
            )
        if method == "es":
            return tr_als_es(X, rank, TrEsConfig(**config.model_dump()), tt)
        if method == "baseline":
            return tr_als_sampled(
                X,
                rank,
                config.j2,
                config.max_iterations,
                config.seed,
                config.tolerance,
                config.init,
                config.regularization,
                config.exhaustive,
                tt,
            )
    raise ConfigError(f"unknown method {method!r}")


def _grid_distribution(dist: ChainDistribution, dims: Sequence[int]) -> np.ndarray:
    """Joint probabilities of a chain distribution laid out on design-row order."""
    indices, probabilities = enumerate_joint(dist)
    q = np.zeros(int(np.prod(dims)))
    q[linear_index(indices, dims)] = probabilities
    return q


def _sketched_state(model: CpModel | TrModel, n: int, j1: int, seed: int, repeat: int):
    if isinstance(model, CpModel):
        sketch = RecursiveSketch(j1, cp_leaf_dims(model.dims, n), seed, key=(SKETCH, repeat, n))
        return CpSamplerState(model, n, estimate_leverage_map(cp_sketch_design(model, n, sketch)))
    sketch = RecursiveSketch(j1, tr_leaf_dims(model.dims, n), seed, key=(SKETCH, repeat, n))
    return TrSamplerState(model, n, estimate_leverage_map(tr_sketch_design(model, n, sketch)))


def run_distribution_experiment(
    X: DenseTensor,
    kind: Kind,
    rank: int | Sequence[int],
    j1_grid: Sequence[int],
    seed: int = 0,
    repeats: int = 5,
    als_iterations: int = 10,
    mode: int = -1,
    tt: bool = False,
) -> list[ExperimentReport]:
    """
    KL(p_exact || q) for the sketched sampler at every J1, plus the product baseline.

    An exact ALS model is fitted first and frozen; p is the exact leverage
    distribution of its design matrix for `mode`, q the joint distribution
    of a sampler enumerated over every row. The sketched KL is the median
    over `repeats` independent sketches.
    """
    _check_kind(kind)
    if repeats < 1:
        raise ConfigError(f"repeats must be >= 1, got {repeats}")
    started = time.perf_counter()
    config = SampledAlsConfig(max_iterations=als_iterations, seed=seed)
    fit = fit_decomposition(X, kind, rank, "exact", config, tt)
    model = fit.model
    n = check_mode(mode, X.order)
    if kind == "cp":
        design = cp_design_matrix(model, n)
        row_modes = [j for j in range(X.order) if j != n]
        baseline = ProductSamplerState.from_cp(model, n)
    else:
        design = subchain_unfold_2(model, n)
        row_modes = cyclic_modes_after(X.order, n)
        baseline = ProductSamplerState.from_tr(model, n)
    row_dims = [X.dims[j] for j in row_modes]
    p = exact_sampling_distribution(design)
    logger.info(
        "[OK] Exact %s model fitted (rel_error=%.3e); %d design rows for mode %d",
        kind.upper(),
        fit.diagnostics.final_error,
        p.size,
        n,
    )

    echo = {"kind": kind, "rank": rank, "mode": n, "dims": list(X.dims), "tt": tt}
    reports = []
    for j1 in j1_grid:
        values, constants = [], []
        for repeat in range(repeats):
            state = _sketched_state(model, n, j1, seed, repeat)
            constants.append(state.normalization)
            values.append(kl_divergence(p, _grid_distribution(state, row_dims)))
        kl = statistics.median(values)
        logger.info("J1=%d: median KL=%.3e over %d sketches", j1, kl, repeats)
        reports.append(
            ExperimentReport(
                experiment="distribution",
                method=ES_NAMES[kind],
                seed=seed,
                seconds=time.perf_counter() - started,
                final_rel_error=fit.diagnostics.final_error,
                normalization_constants=constants,
                kl_divergence=kl,
                j1=j1,
                config={**echo, "repeats": repeats, "kl_values": values},
            )
        )

    kl = kl_divergence(p, _grid_distribution(baseline, row_dims))
    logger.info("Product baseline: KL=%.3e", kl)
    reports.append(
        ExperimentReport(
            experiment="distribution",
            method=BASELINE_NAMES[kind],
            seed=seed,
            seconds=time.perf_counter() - started,
            final_rel_error=fit.diagnostics.final_error,
            kl_divergence=kl,
            config=echo,
        )
    )
    return reports


def run_recovery_experiment(
    kind: Kind,
    seeds: Sequence[int] = tuple(range(10)),
    j1: int | None = None,
    j2: int | None = None,
    baseline_j2: int | None = None,
    iterations: int = 20,
    dims: Sequence[int] | None = None,
    rank: int | Sequence[int] | None = None,
    noise_sd: float = 0.01,
    init: Literal["normal", "range"] = "range",
    parallel: bool = False,
    large: bool = False,
) -> list[ExperimentReport]:
    """
    Sketched sampling against product sampling on planted spike tensors.

    For every seed a fresh planted tensor is generated and both arms run with
    that seed. A run succeeds when the exact relative error of the returned
    model is <= 0.05. Arms run one after the other for fair timing
    unless `parallel` is set.
    """
    _check_kind(kind)
    defaults = CpEsConfig() if kind == "cp" else TrEsConfig()
    j1 = defaults.j1 if j1 is None else j1
    j2 = defaults.j2 if j2 is None else j2
    baseline_j2 = j2 if baseline_j2 is None else baseline_j2
    if rank is None:
        rank = 4 if kind == "cp" else 3

    reports = []
    for seed in seeds:
        if kind == "cp":
            X, _ = synth_cp(dims or (6,) * 10, _cp_rank(rank), noise_sd=noise_sd, seed=seed)
        else:
            X, _ = synth_tr(dims, rank, noise_sd=noise_sd, seed=seed, large=large)
        es_config = SampledAlsConfig(
            j1=j1, j2=j2, max_iterations=iterations, seed=seed, init=init, tolerance=0.0
        )
        baseline_config = es_config.model_copy(update={"j2": baseline_j2})
        arms = [("es", es_config), ("baseline", baseline_config)]
        if parallel:
            with ThreadPoolExecutor(max_workers=len(arms)) as pool:
                futures = [
                    pool.submit(fit_decomposition, X, kind, rank, method, config)
                    for method, config in arms
                ]
                fits = [f.result() for f in futures]
        else:
            fits = [fit_decomposition(X, kind, rank, method, config) for method, config in arms]
        for (_, config), fit in zip(arms, fits):
            error = rel_error(fit.model, X)
            reports.append(
                ExperimentReport.from_fit(
                    "recovery",
                    fit.diagnostics,
                    seed,
                    final_rel_error=error,
                    success=error <= SUCCESS_THRESHOLD,
                    j1=config.j1,
                    j2=config.j2,
                    config={
                        "kind": kind,
                        "dims": list(X.dims),
                        "rank": rank,
                        "noise_sd": noise_sd,
                        "init": init,
                        "parallel": parallel,
                    },
                )
            )
    for method, summary in recovery_summary(reports).items():
        logger.info(
            "%s: success rate %.2f, failure rate %.2f, median %.2fs",
            method,
            summary["success_rate"],
            summary["failure_rate"],
            summary["median_seconds"],
        )
    return reports


def recovery_summary(reports: Sequence[ExperimentReport]) -> dict[str, dict[str, float]]:
    """Per method: share of runs at rel_error <= 0.05, share above 0.5, median time."""
    summary = {}
    for method in dict.fromkeys(r.method for r in reports):
        runs = [r for r in reports if r.method == method]
        errors = [r.final_rel_error if r.final_rel_error is not None else np.inf for r in runs]
        summary[method] = {
            "success_rate": float(np.mean([e <= SUCCESS_THRESHOLD for e in errors])),
            "failure_rate": float(np.mean([e > FAILURE_THRESHOLD for e in errors])),
            "median_seconds": float(np.median([r.seconds for r in runs])),
        }
    return summary


def extract_features(model: CpModel | TrModel, n: int) -> np.ndarray:
    """Rows of the sample-mode factor, or of the mode-2 unfolded sample-mode core."""
    n = check_mode(n, model.order)
    if isinstance(model, CpModel):
        return model.factors[n]
    return core_mode2_classical(model.cores[n])


def run_feature_extraction(
    X: DenseTensor,
    labels: np.ndarray,
    kind: Kind,
    rank: int | Sequence[int],
    method: Method = "es",
    config: SampledAlsConfig | None = None,
    mode: int = -1,
    folds: int = 10,
    tt: bool = False,
) -> ExperimentReport:
    """Decompose, take the sample-mode features and score 1-NN with stratified k-fold CV."""
    _check_kind(kind)
    n = check_mode(mode, X.order)
    labels = np.asarray(labels).ravel()
    if labels.size != X.dims[n]:
        raise ShapeError(f"{labels.size} labels for {X.dims[n]} samples along mode {n}")
    _, class_counts = np.unique(labels, return_counts=True)
    splits = min(folds, int(class_counts.min()))
    if splits < 2:
        raise ConfigError("every class needs at least two samples for cross-validation")
    if splits < folds:
        logger.warning("Smallest class has %d samples; using %d folds", splits, splits)

    config = config or (CpEsConfig() if kind == "cp" else TrEsConfig())
    fit = fit_decomposition(X, kind, rank, method, config, tt)
    features = extract_features(fit.model, n)
    cv = StratifiedKFold(n_splits=splits, shuffle=True, random_state=config.seed)
    scores = cross_val_score(KNeighborsClassifier(n_neighbors=1), features, labels, cv=cv)
    accuracy = float(scores.mean())
    logger.info("[OK] 1-NN accuracy %.4f over %d folds (%s)", accuracy, splits, fit.diagnostics.method)
    return ExperimentReport.from_fit(
        "features",
        fit.diagnostics,
        config.seed,
        accuracy=accuracy,
        j1=config.j1 if method == "es" else None,
        j2=config.j2 if method != "exact" else None,
        config={"kind": kind, "rank": rank, "mode": n, "folds": splits, "tt": tt},
    )


def project_samples(
    model: CpModel | TrModel,
    X_new: DenseTensor,
    mode: int = -1,
    config: SampledAlsConfig | None = None,
) -> np.ndarray:
    """Feature rows for new samples stacked along `mode` of X_new."""
    if isinstance(model, CpModel):
        return project_cp_samples(model, X_new, mode, config)
    return project_tr_samples(model, X_new, mode, config)
