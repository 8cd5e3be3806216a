"""Relative-error tracking for ALS drivers."""

import logging

import numpy as np

from ..errors import DegenerateInputError
from ..randomness import MONITOR, stream
from ..settings import error_sample_size, exact_error_max_entries
from .dense import DenseTensor, delinearize
from .models import CpModel, TrModel, rel_error

logger = logging.getLogger(__name__)


class RelativeErrorMonitor:
    """
    Computes ||model - X|| / ||X|| after each sweep.

    Small tensors get the exact value. Larger ones use a fixed, seeded sample of
    entries drawn once, so successive sweeps are compared on the same entries.
    """

    def __init__(self, X: DenseTensor, seed: int = 0):
        self.X = X
        self.exact = X.size <= exact_error_max_entries()
        if self.exact:
            return
        rng = stream(seed, MONITOR)
        flat = rng.integers(0, X.size, size=error_sample_size())
        self.indices = delinearize(flat, X.dims)
        self.values = X.data[tuple(self.indices.T)]
        self.reference = float(np.linalg.norm(self.values))
        if self.reference == 0:
            raise DegenerateInputError("sampled tensor entries are all zero")
        logger.debug(
            "Estimating relative error from %d sampled entries", self.indices.shape[0]
        )

    def __call__(self, model: CpModel | TrModel) -> float:
        if self.exact:
            return rel_error(model, self.X)
        residual = model.values_at(self.indices) - self.values
        return float(np.linalg.norm(residual) / self.reference)
