"""CountSketch: C(j, i) = s(i) if h(i) == j else 0, one nonzero per column."""

import numpy as np

from ..errors import ConfigError, ShapeError
from .hashing import HashFamily


class CountSketch:
    """J x I CountSketch with a 3-wise bucket hash and a 4-wise sign hash."""

    def __init__(self, rows: int, cols: int, rng: np.random.Generator):
        if rows < 1 or cols < 1:
            raise ConfigError(f"CountSketch needs positive shape, got {rows}x{cols}")
        self.rows = rows
        self.cols = cols
        self.buckets = HashFamily(3, cols, rows, rng).table
        self.signs = HashFamily(4, cols, None, rng).table

    def apply(self, A: np.ndarray) -> np.ndarray:
        """C @ A in O(nnz(A)); A may carry any number of trailing axes."""
        A = np.asarray(A, dtype=np.float64)
        if A.ndim == 0 or A.shape[0] != self.cols:
            raise ShapeError(f"CountSketch expects {self.cols} rows, got shape {A.shape}")
        out = np.zeros((self.rows,) + A.shape[1:])
        signs = self.signs.reshape((-1,) + (1,) * (A.ndim - 1))
        np.add.at(out, self.buckets, signs * A)
        return out

    def matrix(self) -> np.ndarray:
        C = np.zeros((self.rows, self.cols))
        C[self.buckets, np.arange(self.cols)] = self.signs
        return C
