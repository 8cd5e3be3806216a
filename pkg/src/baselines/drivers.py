"""
Sampled CP-ALS and TR-ALS driven by product leverage-score sampling.

The ALS loops, the sampled rows and the least-squares solver are the ones
the sketched drivers use; only the row sampler differs.
"""

import logging
from collections.abc import Sequence

from ..cp import CpGramCache, run_sampled_cp_als
from ..errors import ConfigError
from ..randomness import SAMPLE, stream
from ..schemas import InitMethod, SampledAlsConfig
from ..sweeps import AlsFit
from ..tensor import CpModel, DenseTensor, TrModel
from ..tr import TrGramCache, run_sampled_tr_als
from .product import ProductSamplerState, product_draw

logger = logging.getLogger(__name__)


def _config(j2, iterations, seed, tolerance, init, regularization, exhaustive) -> SampledAlsConfig:
    return SampledAlsConfig(
        j2=j2,
        max_iterations=iterations,
        seed=seed,
        tolerance=tolerance,
        init=init,
        regularization=regularization,
        exhaustive=exhaustive,
    )


def cp_arls_lev(
    X: DenseTensor,
    rank: int,
    j2: int = 50,
    iterations: int = 20,
    seed: int = 0,
    tolerance: float = 1e-6,
    init: InitMethod = "normal",
    regularization: float = 0.0,
    exhaustive: bool = False,
    model: CpModel | None = None,
) -> AlsFit[CpModel]:
    if rank < 1:
        raise ConfigError(f"CP rank must be >= 1, got {rank}")
    config = _config(j2, iterations, seed, tolerance, init, regularization, exhaustive)

    def draw(current: CpModel, n: int, iteration: int, grams: CpGramCache):
        state = ProductSamplerState.from_cp(current, n)
        return product_draw(state, config.j2, stream(config.seed, SAMPLE, iteration, n)), None

    return run_sampled_cp_als(X, rank, config, draw, "cp-arls-lev", model)


def tr_als_sampled(
    X: DenseTensor,
    ranks: int | Sequence[int],
    j2: int = 1000,
    iterations: int = 20,
    seed: int = 0,
    tolerance: float = 1e-6,
    init: InitMethod = "normal",
    regularization: float = 0.0,
    exhaustive: bool = False,
    tt: bool = False,
    model: TrModel | None = None,
) -> AlsFit[TrModel]:
    config = _config(j2, iterations, seed, tolerance, init, regularization, exhaustive)

    def draw(current: TrModel, n: int, iteration: int, grams: TrGramCache):
        state = ProductSamplerState.from_tr(current, n)
        return product_draw(state, config.j2, stream(config.seed, SAMPLE, iteration, n)), None

    return run_sampled_tr_als(X, ranks, config, draw, "tr-als-sampled", model, tt)
