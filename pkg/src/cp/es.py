"""
CP-ALS with sketched leverage-score sampling.

Every mode solve runs four steps:
  1. sketch A^{≠n} with a fresh recursive sketch (leaves A_{N-1}, ..., A_0 without A_n)
  2. estimate Phi from the sketch
  3. draw J2 row indices from the estimated scores, one subindex at a time
  4. solve the weighted sampled problem, building rows of A^{≠n} and X_(n)^T
     directly from the drawn subindices
"""

import logging
from collections.abc import Callable

import numpy as np

from ..errors import ConfigError, ShapeError
from ..leverage import (
    SAMPLING_RCOND,
    IndexSample,
    LeastSquaresSolution,
    estimate_leverage_map,
    exhaustive_sample,
    sampled_least_squares,
)
from ..randomness import SAMPLE, SKETCH, stream
from ..schemas import SampledAlsConfig
from ..sketch import RecursiveSketch
from ..sweeps import AlsFit, ModeReport, run_als_sweeps
from ..tensor import CpModel, DenseTensor, RelativeErrorMonitor, check_mode, mode_fibers
from .als import initial_cp_model
from .sampler import CpGramCache, CpSamplerState, cp_draw_indices

logger = logging.getLogger(__name__)


class CpEsConfig(SampledAlsConfig):
    """Defaults match the planted 10-way recovery setting (J1=1000, J2=50, 20 sweeps)."""


# draw(model, n, iteration, grams) -> (sample, normalization constant or None)
CpDraw = Callable[[CpModel, int, int, CpGramCache], tuple[IndexSample, float | None]]


def cp_sketch_leaves(model: CpModel, n: int) -> list[np.ndarray]:
    """Factors in Kronecker order N-1, ..., 0 without n (slowest first)."""
    return [model.factors[j] for j in reversed(range(model.order)) if j != n]


def cp_leaf_dims(dims: tuple[int, ...], n: int) -> tuple[int, ...]:
    return tuple(dims[j] for j in reversed(range(len(dims))) if j != n)


def cp_sketch_design(model: CpModel, n: int, sketch: RecursiveSketch) -> np.ndarray:
    """Psi A^{≠n} (J1 x R) without forming A^{≠n}."""
    n = check_mode(n, model.order)
    expected = cp_leaf_dims(model.dims, n)
    if sketch.leaf_dims != expected:
        raise ShapeError(f"sketch leaf dims {sketch.leaf_dims} do not match {expected}")
    return sketch.apply_kron_columns(cp_sketch_leaves(model, n))


def cp_design_rows(model: CpModel, n: int, sample: IndexSample) -> np.ndarray:
    """Weighted rows of A^{≠n} at the sampled subindices, by the product formula."""
    if n in sample.modes:
        raise ShapeError(f"mode {n} must not be part of its own sample")
    rows = np.ones((sample.count, model.rank))
    for column, mode in enumerate(sample.modes):
        rows *= model.factors[mode][sample.indices[:, column]]
    return rows * sample.weights[:, None]


def cp_sampled_update(
    X: DenseTensor,
    model: CpModel,
    n: int,
    sample: IndexSample,
    regularization: float = 0.0,
) -> tuple[np.ndarray, LeastSquaresSolution]:
    """
    Solve min_A ||S A^{≠n} A^T - S X_(n)^T||_F and return (new A_n, solve details).

    Only modes other than n are read from `model`, so the same call projects a
    tensor with a different mode-n size onto the frozen factors.
    """
    n = check_mode(n, model.order)
    others = [j for j in range(model.order) if j != n]
    design = cp_design_rows(model, n, sample)
    rhs = mode_fibers(X, n, sample.columns(others)) * sample.weights[:, None]
    result = sampled_least_squares(design, rhs, regularization)
    return result.solution.T, result


def _check_rates(rank: int, config: SampledAlsConfig) -> None:
    if config.exhaustive:
        return
    if config.j1 < rank**2:
        logger.warning("J1=%d is below R^2=%d; leverage estimates may be poor", config.j1, rank**2)
    if config.j2 < rank:
        logger.warning("J2=%d is below R=%d; sampled solves will be rank deficient", config.j2, rank)


def run_sampled_cp_als(
    X: DenseTensor,
    rank: int,
    config: SampledAlsConfig,
    draw: CpDraw,
    method: str,
    model: CpModel | None = None,
) -> AlsFit[CpModel]:
    """Sampled CP-ALS loop with a pluggable row sampler."""
    start = model if model is not None else initial_cp_model(X, rank, config.seed, config.init)
    _check_rates(start.rank, config)
    grams = CpGramCache(start)
    logger.info(
        "%s on %s tensor, rank %d, J1=%d, J2=%d", method, X.dims, start.rank, config.j1, config.j2
    )

    def solve_mode(current: CpModel, n: int, iteration: int) -> tuple[CpModel, ModeReport]:
        if config.exhaustive:
            others = tuple(j for j in range(current.order) if j != n)
            sample = exhaustive_sample([current.dims[j] for j in others], others)
            normalization = None
        else:
            sample, normalization = draw(current, n, iteration, grams)
        factor, result = cp_sampled_update(X, current, n, sample, config.regularization)
        grams.update(n, factor)
        logger.debug(
            "mode %d: %d distinct rows, residual %.3e (%s)",
            n,
            sample.count,
            result.residual_norm,
            result.method,
        )
        return current.with_factor(n, factor), ModeReport(
            clamp_events=sample.clamp_events,
            normalization=normalization,
            rank_deficient=result.rank_deficient,
        )

    return run_als_sweeps(
        start,
        solve_mode,
        RelativeErrorMonitor(X, config.seed),
        config.max_iterations,
        config.tolerance,
        method,
    )


def cp_es_draw(config: SampledAlsConfig) -> CpDraw:
    """Sketch, estimate Phi and draw, with a fresh sketch for every (iteration, mode)."""

    def draw(model: CpModel, n: int, iteration: int, grams: CpGramCache):
        sketch = RecursiveSketch(
            config.j1, cp_leaf_dims(model.dims, n), config.seed, key=(SKETCH, iteration, n)
        )
        leverage_map = estimate_leverage_map(
            cp_sketch_design(model, n, sketch), rcond=SAMPLING_RCOND
        )
        state = CpSamplerState(model, n, leverage_map, grams.grams)
        sample = cp_draw_indices(state, config.j2, stream(config.seed, SAMPLE, iteration, n))
        return sample, state.normalization

    return draw


def cp_als_es(
    X: DenseTensor,
    rank: int,
    config: CpEsConfig | None = None,
    model: CpModel | None = None,
) -> AlsFit[CpModel]:
    config = config or CpEsConfig()
    if rank < 1:
        raise ConfigError(f"CP rank must be >= 1, got {rank}")
    return run_sampled_cp_als(X, rank, config, cp_es_draw(config), "cp-als-es", model)


def project_cp_samples(
    model: CpModel,
    X_new: DenseTensor,
    n: int,
    config: SampledAlsConfig | None = None,
) -> np.ndarray:
    """
    Feature rows for new samples stored along mode n of X_new.

    Solves min_a ||A^{≠n} a^T - x^T|| for every new slice with the frozen
    factors, either over all rows (config.exhaustive) or over J2 rows drawn
    from sketched leverage scores. Returns (I_n of X_new, R).
    """
    config = config or CpEsConfig()
    n = check_mode(n, model.order)
    others = tuple(j for j in range(model.order) if j != n)
    if X_new.order != model.order or any(X_new.dims[j] != model.dims[j] for j in others):
        raise ShapeError(f"new samples {X_new.dims} do not fit model dims {model.dims}")
    if config.exhaustive:
        sample = exhaustive_sample([model.dims[j] for j in others], others)
    else:
        sample, _ = cp_es_draw(config)(model, n, 0, CpGramCache(model))
    features, _ = cp_sampled_update(X_new, model, n, sample, config.regularization)
    return features
