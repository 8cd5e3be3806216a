"""
Exact TR-ALS.

Core n is updated by solving min ||G^{≠n}_[2] G_(2)^T - X_[n]^T||_F and folding
the (R_{n-1} R_n) x I_n solution back into the core with fold_core.
"""

import logging
from collections.abc import Sequence

import numpy as np

from ..errors import ConfigError
from ..leverage import sampled_least_squares
from ..randomness import INIT, stream
from ..schemas import InitMethod
from ..settings import check_dense_budget
from ..sweeps import AlsFit, ModeReport, run_als_sweeps
from ..tensor import (
    DenseTensor,
    RelativeErrorMonitor,
    TrModel,
    fold_core,
    gaussian_sketch,
    subchain_unfold_2,
    unfold,
)

logger = logging.getLogger(__name__)


def resolve_ranks(ranks: int | Sequence[int], order: int, tt: bool = False) -> tuple[int, ...]:
    """
    Per-core trailing ranks (R_0, ..., R_{N-1}); the last one closes the ring.

    A single int applies to every mode. tt=True forces the closing rank to 1,
    which turns the ring into a tensor train.
    """
    if isinstance(ranks, int):
        resolved = [ranks] * order
    else:
        resolved = [int(r) for r in ranks]
        if len(resolved) != order:
            raise ConfigError(f"expected {order} TR ranks, got {len(resolved)}")
    if tt:
        resolved[-1] = 1
    if any(r < 1 for r in resolved):
        raise ConfigError(f"TR ranks must be >= 1, got {resolved}")
    return tuple(resolved)


def initial_tr_model(
    X: DenseTensor,
    ranks: int | Sequence[int],
    seed: int,
    init: InitMethod = "normal",
    tt: bool = False,
) -> TrModel:
    """
    Starting cores: i.i.d. normal, or for init="range" the core n >= 1 is
    X_(n) times a Gaussian matrix with R_{n-1} R_n columns, scaled to unit
    Frobenius norm and folded into (R_{n-1}, I_n, R_n). Core 0 is solved first.

    The sketch is not orthonormalized, so heavy slices of X stay heavy in the
    cores; with R_{n-1} R_n >= I_n an orthonormal basis weights all slices alike.
    """
    if X.order < 2:
        raise ConfigError("TR-ALS needs a tensor with at least two modes")
    resolved = resolve_ranks(ranks, X.order, tt)
    rng = stream(seed, INIT)
    cores = [
        rng.standard_normal((resolved[j - 1], dim, resolved[j])) for j, dim in enumerate(X.dims)
    ]
    if init == "range":
        for n in range(1, X.order):
            before, after = resolved[n - 1], resolved[n]
            sketch = gaussian_sketch(X, n, before * after, stream(seed, INIT, n))
            scale = np.linalg.norm(sketch)
            if scale > 0:
                cores[n] = fold_core(sketch.T / scale, before, after)
            else:
                logger.warning("Mode-%d unfolding is zero; keeping a Gaussian core", n)
    elif init != "normal":
        raise ConfigError(f"unknown init method {init!r}")
    return TrModel(cores)


def tr_als(
    X: DenseTensor,
    ranks: int | Sequence[int],
    iterations: int = 20,
    seed: int = 0,
    tolerance: float = 1e-6,
    init: InitMethod = "normal",
    regularization: float = 0.0,
    tt: bool = False,
    model: TrModel | None = None,
) -> AlsFit[TrModel]:
    check_dense_budget(X.size, "exact TR-ALS input")
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    start = model if model is not None else initial_tr_model(X, ranks, seed, init, tt)
    logger.info("TR-ALS on %s tensor, ranks %s", X.dims, start.ranks)

    def solve_mode(current: TrModel, n: int, iteration: int) -> tuple[TrModel, ModeReport]:
        design = subchain_unfold_2(current, n)
        result = sampled_least_squares(design, unfold(X, n).T, regularization)
        core = fold_core(result.solution, current.rank_before(n), current.rank_after(n))
        return current.with_core(n, core), ModeReport(rank_deficient=result.rank_deficient)

    return run_als_sweeps(
        start, solve_mode, RelativeErrorMonitor(X, seed), iterations, tolerance, "tr-als"
    )
