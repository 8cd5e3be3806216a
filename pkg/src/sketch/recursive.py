"""
Recursive sketch Psi for Kronecker-structured inputs.

For leaf dims (I_1, ..., I_M) the tree has q = ceil(log2 M) levels. Each of
the 2^q leaves is an independent J x I_j CountSketch (leaves past M sketch
e_1 of length max I_j). Level m combines neighbouring pairs with 2^(q-m)
independent degree-two TensorSketches of shape J x J^2:

    Y_j^(0) = C_j x_j,    Y_p^(m) = T_p^(m)(Y_{2p-1}^(m-1) ⊗ Y_{2p}^(m-1)),
    Psi(x_1 ⊗ ... ⊗ x_M) = Y_1^(q)

Leaf 1 is the slowest Kronecker factor. Every node draws its hash
coefficients from stream(seed, *key, level, position).
"""

import logging
import math
from collections.abc import Sequence

import numpy as np

from ..errors import ConfigError, MemoryGuardError, ShapeError
from ..randomness import stream
from ..settings import check_dense_budget, materialize_max_columns
from .countsketch import CountSketch
from .tensorsketch import TensorSketch

logger = logging.getLogger(__name__)


class RecursiveSketch:
    def __init__(
        self,
        rows: int,
        leaf_dims: Sequence[int],
        seed: int,
        key: Sequence[int] = (),
    ):
        leaf_dims = tuple(int(d) for d in leaf_dims)
        if rows < 1:
            raise ConfigError(f"sketch dimension must be >= 1, got {rows}")
        if not leaf_dims or any(d < 1 for d in leaf_dims):
            raise ConfigError(f"leaf dims must be non-empty and positive, got {leaf_dims}")
        self.rows = rows
        self.leaf_dims = leaf_dims
        self.seed = seed
        self.key = tuple(key)
        self.depth = math.ceil(math.log2(len(leaf_dims))) if len(leaf_dims) > 1 else 0
        self.padding_dim = max(leaf_dims)
        width = 2**self.depth
        self.leaves = [
            CountSketch(rows, self._leaf_dim(j), stream(seed, *self.key, 0, j))
            for j in range(width)
        ]
        self.levels = [
            [
                TensorSketch(rows, rows, stream(seed, *self.key, m, p))
                for p in range(width >> m)
            ]
            for m in range(1, self.depth + 1)
        ]
        logger.debug(
            "Recursive sketch J=%d, leaves=%s, depth=%d, key=%s",
            rows,
            leaf_dims,
            self.depth,
            self.key,
        )

    @property
    def width(self) -> int:
        return len(self.leaves)

    def _leaf_dim(self, j: int) -> int:
        return self.leaf_dims[j] if j < len(self.leaf_dims) else self.padding_dim

    def _padding_image(self, j: int) -> np.ndarray:
        e1 = np.zeros(self.padding_dim)
        e1[0] = 1.0
        return self.leaves[j].apply(e1)

    def apply_kron_columns(self, columns: Sequence[np.ndarray]) -> np.ndarray:
        """
        Psi (A_1 ⊙ ... ⊙ A_M): column r is Psi applied to ⊗_j A_j[:, r].

        columns: M matrices of shape (I_j, R). Returns (J, R).
        """
        if len(columns) != len(self.leaf_dims):
            raise ShapeError(f"expected {len(self.leaf_dims)} leaf matrices, got {len(columns)}")
        mats = [np.asarray(c, dtype=np.float64) for c in columns]
        mats = [m[:, None] if m.ndim == 1 else m for m in mats]
        ranks = {m.shape[1] for m in mats}
        if len(ranks) != 1:
            raise ShapeError(f"leaf matrices must share column count, got {sorted(ranks)}")
        rank = ranks.pop()
        level = []
        for j in range(self.width):
            if j < len(mats):
                if mats[j].shape[0] != self.leaf_dims[j]:
                    raise ShapeError(
                        f"leaf {j} expects {self.leaf_dims[j]} rows, got {mats[j].shape[0]}"
                    )
                level.append(self.leaves[j].apply(mats[j]))
            else:
                level.append(np.repeat(self._padding_image(j)[:, None], rank, axis=1))
        for sketches in self.levels:
            level = [
                ts.apply_pair(level[2 * p], level[2 * p + 1]) for p, ts in enumerate(sketches)
            ]
        return level[0]

    def apply_chain(self, leaves: Sequence[np.ndarray]) -> np.ndarray:
        """
        Psi applied to a chain sum_k ⊗_j H_j[:, k_j, k_{j+1}] with free boundary ranks.

        leaves: M (or 2^q) arrays of shape (I_j, K_j, K_{j+1}) with matching inner
        ranks. Returns (J, K_1, K_{M+1}): entry [:, a, b] is Psi applied to the
        chain with k_1 = a and k_{M+1} = b. Missing padding leaves act as
        e_1 times the identity on the trailing rank.
        """
        if len(leaves) not in (len(self.leaf_dims), self.width):
            raise ShapeError(
                f"expected {len(self.leaf_dims)} or {self.width} chain leaves, got {len(leaves)}"
            )
        arrays = [np.asarray(h, dtype=np.float64) for h in leaves]
        for j, h in enumerate(arrays):
            if h.ndim != 3 or h.shape[0] != self._leaf_dim(j):
                raise ShapeError(f"chain leaf {j} has shape {h.shape}, expected ({self._leaf_dim(j)}, K, K')")
            if j > 0 and arrays[j - 1].shape[2] != h.shape[1]:
                raise ShapeError(
                    f"inner ranks do not chain: leaf {j - 1} ends with {arrays[j - 1].shape[2]}, "
                    f"leaf {j} starts with {h.shape[1]}"
                )
        trailing = arrays[-1].shape[2]
        level = []
        for j in range(self.width):
            if j < len(arrays):
                level.append(self.leaves[j].apply(arrays[j]))
            else:
                image = self._padding_image(j)
                level.append(image[:, None, None] * np.eye(trailing)[None, :, :])
        for sketches in self.levels:
            level = [
                ts.contract(level[2 * p], level[2 * p + 1]) for p, ts in enumerate(sketches)
            ]
        return level[0]

    def apply_tr_column(self, H: Sequence[np.ndarray]) -> np.ndarray:
        """
        One column of Psi G for a chain given as matrices H_j of shape (I_j, K_j K_{j+1}).

        Columns of H_j are indexed k_j + K_j * k_{j+1}; K_1 and the final K must be 1.
        The K_j are recovered from the column counts, left to right.
        """
        pieces = []
        inner = 1
        for j, h in enumerate(H):
            h = np.asarray(h, dtype=np.float64)
            if h.ndim != 2 or h.shape[1] % inner:
                raise ShapeError(f"H_{j} with shape {h.shape} does not continue rank {inner}")
            outer = h.shape[1] // inner
            pieces.append(h.reshape(h.shape[0], inner, outer, order="F"))
            inner = outer
        if inner != 1:
            raise ShapeError(f"the chain must close with rank 1, ends with {inner}")
        return self.apply_chain(pieces)[:, 0, 0]

    def materialize(self) -> np.ndarray:
        """Explicit J x prod(I_j) matrix, built by sketching every basis vector (test oracle)."""
        total = math.prod(self.leaf_dims)
        if total > materialize_max_columns():
            raise MemoryGuardError(
                f"materializing Psi needs {total} columns, above the limit of "
                f"{materialize_max_columns()}"
            )
        check_dense_budget(self.rows * total, "materialized sketch")
        digits = np.unravel_index(np.arange(total), self.leaf_dims, order="C")
        selectors = []
        for dim, digit in zip(self.leaf_dims, digits):
            E = np.zeros((dim, total))
            E[digit, np.arange(total)] = 1.0
            selectors.append(E)
        return self.apply_kron_columns(selectors)
