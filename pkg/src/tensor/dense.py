"""
Dense N-way tensors, index linearization and the two unfolding conventions.

Flat storage is generalized column-major: the flat position of the 0-based
multi-index (i_0, ..., i_{N-1}) is sum_n i_n * prod_{j<n} I_j (first index
fastest). numpy's order="F" reshapes implement exactly this, so every unfolding
below is a transpose plus an F-order reshape.

    classical_unfold(X, n)  I_n x prod_{j!=n} I_j, columns ordered (i_0 .. i_{n-1}, i_{n+1} .. i_{N-1})
    unfold(X, n)            same shape, columns ordered cyclically (i_{n+1} .. i_{N-1}, i_0 .. i_{n-1})

In both cases the first listed index varies fastest along the columns.
"""

import math
from collections.abc import Sequence

import numpy as np

from ..errors import IndexRangeError, ShapeError
from ..settings import check_dense_budget


def check_dims(dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims:
        raise ShapeError("a tensor needs at least one mode")
    if any(d < 1 for d in dims):
        raise ShapeError(f"all dims must be >= 1, got {dims}")
    return dims


def check_mode(n: int, order: int) -> int:
    if not -order <= n < order:
        raise IndexRangeError(f"mode {n} out of range for a {order}-way tensor")
    return n % order


class DenseTensor:
    """Immutable N-way float64 array with first-index-fastest flat order."""

    def __init__(self, data: np.ndarray):
        array = np.array(data, dtype=np.float64)
        if array.ndim == 0:
            raise ShapeError("a tensor needs at least one mode")
        check_dims(array.shape)
        array.setflags(write=False)
        self._data = array

    @classmethod
    def from_flat(cls, flat: np.ndarray, dims: Sequence[int]) -> "DenseTensor":
        dims = check_dims(dims)
        flat = np.asarray(flat, dtype=np.float64).ravel()
        if flat.size != math.prod(dims):
            raise ShapeError(
                f"flat data has {flat.size} entries, dims {dims} need {math.prod(dims)}"
            )
        return cls(flat.reshape(dims, order="F"))

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def dims(self) -> tuple[int, ...]:
        return self._data.shape

    @property
    def order(self) -> int:
        return self._data.ndim

    @property
    def size(self) -> int:
        return self._data.size

    @property
    def flat(self) -> np.ndarray:
        return self._data.ravel(order="F")

    def norm(self) -> float:
        return float(np.linalg.norm(self._data.ravel()))

    def __repr__(self) -> str:
        return f"DenseTensor(dims={self.dims})"


def linear_index(subindices, dims: Sequence[int]):
    """
    Map 0-based multi-indices to 0-based flat positions (first index fastest).

    Accepts a single multi-index (returns int) or an array of shape (count, N).
    The 1-based formula 1 + sum (i_n - 1) prod_{j<n} I_j is the same map shifted by one.
    """
    dims = check_dims(dims)
    sub = np.asarray(subindices, dtype=np.int64)
    if sub.ndim == 0 or sub.shape[-1] != len(dims):
        raise ShapeError(f"subindices {sub.shape} do not match {len(dims)} dims")
    if np.any(sub < 0) or np.any(sub >= np.asarray(dims)):
        raise IndexRangeError(f"subindex out of range for dims {dims}")
    flat = np.ravel_multi_index(tuple(np.moveaxis(sub, -1, 0)), dims, order="F")
    return int(flat) if sub.ndim == 1 else np.asarray(flat, dtype=np.int64)


def delinearize(flat, dims: Sequence[int]) -> np.ndarray:
    """Inverse of linear_index: flat positions to multi-indices on the last axis."""
    dims = check_dims(dims)
    flat = np.asarray(flat, dtype=np.int64)
    if np.any(flat < 0) or np.any(flat >= math.prod(dims)):
        raise IndexRangeError(f"flat index out of range for dims {dims}")
    return np.stack(np.unravel_index(flat, dims, order="F"), axis=-1).astype(np.int64)


def classical_unfold(X: DenseTensor, n: int) -> np.ndarray:
    n = check_mode(n, X.order)
    return np.moveaxis(X.data, n, 0).reshape(X.dims[n], -1, order="F")


def _cyclic_axes(order: int, n: int) -> list[int]:
    return [n] + list(range(n + 1, order)) + list(range(n))


def unfold(X: DenseTensor, n: int) -> np.ndarray:
    n = check_mode(n, X.order)
    axes = _cyclic_axes(X.order, n)
    return np.transpose(X.data, axes).reshape(X.dims[n], -1, order="F")


def _check_fold_shape(M: np.ndarray, n: int, dims: tuple[int, ...]) -> None:
    if M.shape != (dims[n], math.prod(dims) // dims[n]):
        raise ShapeError(f"matrix {M.shape} is not a mode-{n} unfolding of {dims}")


def classical_fold(M: np.ndarray, n: int, dims: Sequence[int]) -> DenseTensor:
    dims = check_dims(dims)
    n = check_mode(n, len(dims))
    M = np.asarray(M, dtype=np.float64)
    _check_fold_shape(M, n, dims)
    rest = dims[:n] + dims[n + 1 :]
    return DenseTensor(np.moveaxis(M.reshape((dims[n],) + rest, order="F"), 0, n))


def fold(M: np.ndarray, n: int, dims: Sequence[int]) -> DenseTensor:
    dims = check_dims(dims)
    n = check_mode(n, len(dims))
    M = np.asarray(M, dtype=np.float64)
    _check_fold_shape(M, n, dims)
    axes = _cyclic_axes(len(dims), n)
    permuted = M.reshape(tuple(dims[a] for a in axes), order="F")
    return DenseTensor(np.transpose(permuted, np.argsort(axes)))


def unfold_permutation(dims: Sequence[int], n: int) -> np.ndarray:
    """Column permutation p with unfold(X, n) == classical_unfold(X, n)[:, p]."""
    dims = check_dims(dims)
    n = check_mode(n, len(dims))
    check_dense_budget(math.prod(dims), "unfolding permutation")
    positions = DenseTensor.from_flat(np.arange(math.prod(dims), dtype=np.float64), dims)
    classical = classical_unfold(positions, n)[0].astype(np.int64)
    cyclic = unfold(positions, n)[0].astype(np.int64)
    column_of = np.empty(math.prod(dims), dtype=np.int64)
    column_of[classical] = np.arange(classical.size)
    return column_of[cyclic]


def mode_fibers(X: DenseTensor, n: int, others: np.ndarray) -> np.ndarray:
    """
    Gather mode-n fibers X(i_0, .., :, .., i_{N-1}) for a batch of index tuples.

    `others` has shape (count, N-1) with the remaining modes in ascending order.
    Returns (count, I_n): the rows of X_(n)^T (equivalently X_[n]^T) at those tuples.
    """
    n = check_mode(n, X.order)
    others = np.asarray(others, dtype=np.int64)
    if others.ndim != 2 or others.shape[1] != X.order - 1:
        raise ShapeError(f"expected (count, {X.order - 1}) indices, got {others.shape}")
    rest = np.asarray(X.dims[:n] + X.dims[n + 1 :], dtype=np.int64)
    if np.any(others < 0) or np.any(others >= rest):
        raise IndexRangeError(f"fiber index out of range for dims {X.dims}")
    moved = np.moveaxis(X.data, n, -1)
    return moved[tuple(others.T)]


def gaussian_sketch(X: DenseTensor, n: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """
    X_(n) @ Omega for a Gaussian Omega with `width` columns (I_n x width).

    Omega is generated block by block along the slowest remaining mode so the
    unfolding is never materialized in one piece.
    """
    n = check_mode(n, X.order)
    rows = X.dims[n]
    sketch = np.zeros((rows, width))
    if X.order == 1:
        sketch += X.data[:, None] * rng.standard_normal((1, width))
    else:
        slow = X.order - 1 if n != X.order - 1 else X.order - 2
        for k in range(X.dims[slow]):
            block = DenseTensor(np.take(X.data, k, axis=slow))
            local_n = n if n < slow else n - 1
            unfolded = classical_unfold(block, local_n)
            sketch += unfolded @ rng.standard_normal((unfolded.shape[1], width))
    return sketch


def gaussian_range(X: DenseTensor, n: int, width: int, rng: np.random.Generator) -> np.ndarray:
    """
    Orthonormal basis of gaussian_sketch(X, n, width). If I_n < width the
    basis is padded with Gaussian columns.
    """
    rows = X.dims[check_mode(n, X.order)]
    basis, _ = np.linalg.qr(gaussian_sketch(X, n, width, rng))
    if basis.shape[1] < width:
        basis = np.hstack([basis, rng.standard_normal((rows, width - basis.shape[1]))])
    return basis
