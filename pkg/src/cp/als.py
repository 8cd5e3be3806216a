"""
Exact CP-ALS.

Each mode update solves the dense problem min_A ||A^{≠n} A^T - X_(n)^T||_F,
so the relative error never increases from one sweep to the next.
"""

import logging

from ..errors import ConfigError
from ..leverage import sampled_least_squares
from ..randomness import INIT, stream
from ..schemas import InitMethod
from ..settings import check_dense_budget
from ..sweeps import AlsFit, ModeReport, run_als_sweeps
from ..tensor import (
    CpModel,
    DenseTensor,
    RelativeErrorMonitor,
    classical_unfold,
    cp_design_matrix,
    gaussian_range,
)

logger = logging.getLogger(__name__)


def initial_cp_model(
    X: DenseTensor, rank: int, seed: int, init: InitMethod = "normal"
) -> CpModel:
    """
    Starting factors. "normal" draws i.i.d. standard normal entries; "range"
    uses an orthonormal basis of X_(n) times a Gaussian test matrix for modes
    1..N-1. Factor 0 is solved first, so its start value never matters.
    """
    if rank < 1:
        raise ConfigError(f"CP rank must be >= 1, got {rank}")
    if X.order < 2:
        raise ConfigError("CP-ALS needs a tensor with at least two modes")
    rng = stream(seed, INIT)
    factors = [rng.standard_normal((dim, rank)) for dim in X.dims]
    if init == "range":
        for n in range(1, X.order):
            factors[n] = gaussian_range(X, n, rank, stream(seed, INIT, n))
    elif init != "normal":
        raise ConfigError(f"unknown init method {init!r}")
    return CpModel(factors)


def cp_als(
    X: DenseTensor,
    rank: int,
    iterations: int = 20,
    seed: int = 0,
    tolerance: float = 1e-6,
    init: InitMethod = "normal",
    regularization: float = 0.0,
    model: CpModel | None = None,
) -> AlsFit[CpModel]:
    check_dense_budget(X.size, "exact CP-ALS input")
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    start = model if model is not None else initial_cp_model(X, rank, seed, init)
    logger.info("CP-ALS on %s tensor, rank %d", X.dims, start.rank)

    def solve_mode(current: CpModel, n: int, iteration: int) -> tuple[CpModel, ModeReport]:
        design = cp_design_matrix(current, n)
        result = sampled_least_squares(design, classical_unfold(X, n).T, regularization)
        return current.with_factor(n, result.solution.T), ModeReport(
            rank_deficient=result.rank_deficient
        )

    return run_als_sweeps(
        start, solve_mode, RelativeErrorMonitor(X, seed), iterations, tolerance, "cp-als"
    )
