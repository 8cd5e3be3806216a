"""
Planted synthetic tensors for the recovery experiments.

CP: every factor is 6 x 4 with A(0, 0) = spike, an i.i.d. Gaussian block in
rows 1.. and columns 1.., and zeros elsewhere. TR: every core is 3 x 6 x 3
with G(0, 0, 0) = spike and zeros elsewhere. Both add i.i.d. Gaussian noise
of standard deviation noise_sd to every entry.

The row (0, ..., 0) of every design matrix carries almost all of the
leverage while each single factor or core looks nearly uniform, which is the
case product sampling handles badly.

The 10-way TR instance needs about 484 MB and is only built with large=True;
the default is the 8-way variant.
"""

import logging
from collections.abc import Sequence

import numpy as np

from ..errors import ConfigError
from ..randomness import SYNTH, stream
from ..settings import check_dense_budget
from ..tensor import CpModel, DenseTensor, TrModel, check_dims
from ..tr import resolve_ranks

logger = logging.getLogger(__name__)

CP_DIMS = (6,) * 10
TR_DIMS = (6,) * 8
TR_DIMS_LARGE = (6,) * 10


def _add_noise(truth: DenseTensor, noise_sd: float, seed: int) -> DenseTensor:
    if noise_sd < 0:
        raise ConfigError(f"noise_sd must be non-negative, got {noise_sd}")
    if noise_sd == 0:
        return truth
    noise = stream(seed, SYNTH, 1).standard_normal(truth.dims)
    return DenseTensor(truth.data + noise_sd * noise)


def synth_cp(
    dims: Sequence[int] = CP_DIMS,
    rank: int = 4,
    spike: float = 4.0,
    noise_sd: float = 0.01,
    seed: int = 0,
) -> tuple[DenseTensor, CpModel]:
    """Planted spike CP tensor and its ground-truth model."""
    dims = check_dims(dims)
    if rank < 1:
        raise ConfigError(f"CP rank must be >= 1, got {rank}")
    check_dense_budget(int(np.prod(dims)), "synthetic CP tensor")
    rng = stream(seed, SYNTH, 0)
    factors = []
    for dim in dims:
        factor = np.zeros((dim, rank))
        factor[0, 0] = spike
        factor[1:, 1:] = rng.standard_normal((dim - 1, rank - 1))
        factors.append(factor)
    truth = CpModel(factors)
    X = _add_noise(truth.to_tensor(), noise_sd, seed)
    logger.info("[OK] Synthetic CP tensor %s, rank %d, noise %.3g", dims, rank, noise_sd)
    return X, truth


def synth_tr(
    dims: Sequence[int] | None = None,
    ranks: int | Sequence[int] = 3,
    spike: float = 3.0,
    noise_sd: float = 0.01,
    seed: int = 0,
    large: bool = False,
) -> tuple[DenseTensor, TrModel]:
    """Planted point-mass TR tensor: spike^N at (0, ..., 0) before noise."""
    if dims is None:
        dims = TR_DIMS_LARGE if large else TR_DIMS
    dims = check_dims(dims)
    if len(dims) > len(TR_DIMS) and not large:
        logger.warning("Building a %d-way TR tensor without the large flag", len(dims))
    resolved = resolve_ranks(ranks, len(dims))
    check_dense_budget(int(np.prod(dims)), "synthetic TR tensor")
    cores = []
    for j, dim in enumerate(dims):
        core = np.zeros((resolved[j - 1], dim, resolved[j]))
        core[0, 0, 0] = spike
        cores.append(core)
    truth = TrModel(cores)
    X = _add_noise(truth.to_tensor(), noise_sd, seed)
    logger.info("[OK] Synthetic TR tensor %s, ranks %s, noise %.3g", dims, resolved, noise_sd)
    return X, truth
