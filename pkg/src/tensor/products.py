"""Khatri-Rao and Kronecker products (first operand varies slowest)."""

from collections.abc import Sequence
from functools import reduce

import numpy as np

from ..errors import ShapeError


def khatri_rao(matrices: Sequence[np.ndarray]) -> np.ndarray:
    """Columnwise Kronecker product: row i_a * I_b + i_b of A ⊙ B is A[i_a] * B[i_b]."""
    if not matrices:
        raise ShapeError("khatri_rao needs at least one matrix")
    mats = [np.asarray(m, dtype=np.float64) for m in matrices]
    mats = [m[:, None] if m.ndim == 1 else m for m in mats]
    if any(m.ndim != 2 for m in mats):
        raise ShapeError("khatri_rao operands must be matrices")
    cols = {m.shape[1] for m in mats}
    if len(cols) != 1:
        raise ShapeError(f"khatri_rao operands must share column count, got {sorted(cols)}")
    rank = cols.pop()
    return reduce(lambda a, b: np.einsum("ir,jr->ijr", a, b).reshape(-1, rank), mats)


def kronecker(matrices: Sequence[np.ndarray]) -> np.ndarray:
    if not matrices:
        raise ShapeError("kronecker needs at least one operand")
    return reduce(np.kron, [np.asarray(m, dtype=np.float64) for m in matrices])
