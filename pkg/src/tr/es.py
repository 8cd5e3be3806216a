"""
TR-ALS with sketched leverage-score sampling.

Same four steps per core as the CP variant, on the subchain unfolding
G^{≠n}_[2] instead of A^{≠n}. The sketch leaves are the cores n-1, n-2, ...,
n+1 (slowest Kronecker factor first), each transposed to (I_j, R_j, R_{j-1})
so the whole (R_{n-1}, R_n) block of columns comes out of one chain pass.
"""

import logging
from collections.abc import Callable, Sequence

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
from ..tensor import (
    DenseTensor,
    RelativeErrorMonitor,
    TrModel,
    check_mode,
    cyclic_modes_after,
    fold_core,
    mode_fibers,
)
from .als import initial_tr_model
from .sampler import TrGramCache, TrSamplerState, tr_draw_indices, unit_cores

logger = logging.getLogger(__name__)


class TrEsConfig(SampledAlsConfig):
    """Defaults match the planted ring recovery setting (J1=10^4, J2=10^3)."""

    j1: int = 10_000
    j2: int = 1_000


# draw(model, n, iteration, grams) -> (sample, normalization constant or None)
TrDraw = Callable[[TrModel, int, int, TrGramCache], tuple[IndexSample, float | None]]


def tr_sketch_order(order: int, n: int) -> list[int]:
    """Modes n-1, n-2, ..., n+1: the leaf order of the recursive sketch."""
    return [(n - 1 - s) % order for s in range(order - 1)]


def tr_leaf_dims(dims: tuple[int, ...], n: int) -> tuple[int, ...]:
    return tuple(dims[j] for j in tr_sketch_order(len(dims), n))


def tr_sketch_leaves(model: TrModel, n: int) -> list[np.ndarray]:
    return [model.cores[j].transpose(1, 2, 0) for j in tr_sketch_order(model.order, n)]


def tr_sketch_design(model: TrModel, n: int, sketch: RecursiveSketch) -> np.ndarray:
    """Psi G^{≠n}_[2] (J1 x R_{n-1} R_n) without forming the subchain."""
    n = check_mode(n, model.order)
    expected = tr_leaf_dims(model.dims, n)
    if sketch.leaf_dims != expected:
        raise ShapeError(f"sketch leaf dims {sketch.leaf_dims} do not match {expected}")
    blocks = sketch.apply_chain(tr_sketch_leaves(model, n))
    # blocks[:, a, b] is column a + R_{n-1} b
    return blocks.reshape(blocks.shape[0], -1, order="F")


def tr_sampled_rows(model: TrModel, n: int, sample: IndexSample) -> np.ndarray:
    """Weighted rows of G^{≠n}_[2]: vectorized slice products along the ring from n+1."""
    n = check_mode(n, model.order)
    modes = cyclic_modes_after(model.order, n)
    indices = sample.columns(modes)
    product = np.moveaxis(model.cores[modes[0]][:, indices[:, 0], :], 1, 0)
    for column, mode in enumerate(modes[1:], start=1):
        product = product @ np.moveaxis(model.cores[mode][:, indices[:, column], :], 1, 0)
    # product[:, b, a] lands at column a + R_{n-1} b
    rows = product.reshape(sample.count, -1)
    return rows * sample.weights[:, None]


def tr_sampled_update(
    X: DenseTensor,
    model: TrModel,
    n: int,
    sample: IndexSample,
    regularization: float = 0.0,
) -> tuple[np.ndarray, LeastSquaresSolution]:
    """
    Solve min_G ||S G^{≠n}_[2] G_(2)^T - S X_[n]^T||_F and return (new core n, solve details).

    Only cores other than n are read from `model`.
    """
    n = check_mode(n, model.order)
    others = [j for j in range(model.order) if j != n]
    design = tr_sampled_rows(model, n, sample)
    rhs = mode_fibers(X, n, sample.columns(others)) * sample.weights[:, None]
    result = sampled_least_squares(design, rhs, regularization)
    core = fold_core(result.solution, model.rank_before(n), model.rank_after(n))
    return core, result


def _check_rates(model: TrModel, config: SampledAlsConfig) -> None:
    if config.exhaustive:
        return
    columns = max(model.rank_before(n) * model.rank_after(n) for n in range(model.order))
    if config.j1 < columns**2:
        logger.warning(
            "J1=%d is below (R_{n-1} R_n)^2=%d; leverage estimates may be poor",
            config.j1,
            columns**2,
        )
    if config.j2 < columns:
        logger.warning(
            "J2=%d is below R_{n-1} R_n=%d; sampled solves will be rank deficient",
            config.j2,
            columns,
        )


def run_sampled_tr_als(
    X: DenseTensor,
    ranks: int | Sequence[int],
    config: SampledAlsConfig,
    draw: TrDraw,
    method: str,
    model: TrModel | None = None,
    tt: bool = False,
) -> AlsFit[TrModel]:
    """Sampled TR-ALS loop with a pluggable row sampler."""
    start = (
        model if model is not None else initial_tr_model(X, ranks, config.seed, config.init, tt)
    )
    _check_rates(start, config)
    grams = TrGramCache(start)
    logger.info(
        "%s on %s tensor, ranks %s, J1=%d, J2=%d",
        method,
        X.dims,
        start.ranks,
        config.j1,
        config.j2,
    )

    def solve_mode(current: TrModel, n: int, iteration: int) -> tuple[TrModel, ModeReport]:
        if config.exhaustive:
            others = tuple(j for j in range(current.order) if j != n)
            sample = exhaustive_sample([current.dims[j] for j in others], others)
            normalization = None
        else:
            sample, normalization = draw(current, n, iteration, grams)
        core, result = tr_sampled_update(X, current, n, sample, config.regularization)
        grams.update(n, core)
        logger.debug(
            "core %d: %d distinct rows, residual %.3e (%s)",
            n,
            sample.count,
            result.residual_norm,
            result.method,
        )
        return current.with_core(n, core), ModeReport(
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


def tr_es_draw(config: SampledAlsConfig) -> TrDraw:
    def draw(model: TrModel, n: int, iteration: int, grams: TrGramCache):
        balanced = unit_cores(model, n)
        sketch = RecursiveSketch(
            config.j1, tr_leaf_dims(model.dims, n), config.seed, key=(SKETCH, iteration, n)
        )
        leverage_map = estimate_leverage_map(
            tr_sketch_design(balanced, n, sketch), rcond=SAMPLING_RCOND
        )
        state = TrSamplerState(balanced, n, leverage_map, grams.grams)
        sample = tr_draw_indices(state, config.j2, stream(config.seed, SAMPLE, iteration, n))
        return sample, state.normalization

    return draw


def tr_als_es(
    X: DenseTensor,
    ranks: int | Sequence[int],
    config: TrEsConfig | None = None,
    tt: bool = False,
    model: TrModel | None = None,
) -> AlsFit[TrModel]:
    config = config or TrEsConfig()
    if X.order < 2:
        raise ConfigError("TR-ALS needs a tensor with at least two modes")
    if X.order < 3:
        logger.warning("TR-ALS-ES on a %d-way tensor has nothing to sketch across", X.order)
    return run_sampled_tr_als(X, ranks, config, tr_es_draw(config), "tr-als-es", model, tt)


def project_tr_samples(
    model: TrModel,
    X_new: DenseTensor,
    n: int,
    config: SampledAlsConfig | None = None,
) -> np.ndarray:
    """
    Feature rows for new samples stored along mode n of X_new.

    Each new slice is fitted against the frozen subchain; the solved core
    slice, flattened as in core_mode2_classical, is its feature vector.
    Returns (I_n of X_new, R_{n-1} R_n).
    """
    config = config or TrEsConfig()
    n = check_mode(n, model.order)
    others = tuple(j for j in range(model.order) if j != n)
    if X_new.order != model.order or any(X_new.dims[j] != model.dims[j] for j in others):
        raise ShapeError(f"new samples {X_new.dims} do not fit model dims {model.dims}")
    if config.exhaustive:
        sample = exhaustive_sample([model.dims[j] for j in others], others)
    else:
        sample, _ = tr_es_draw(config)(model, n, 0, TrGramCache(model))
    design = tr_sampled_rows(model, n, sample)
    rhs = mode_fibers(X_new, n, sample.columns(others)) * sample.weights[:, None]
    return sampled_least_squares(design, rhs, config.regularization).solution.T
