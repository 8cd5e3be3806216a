"""Sampled multi-indices with their probabilities and row weights."""

from collections.abc import Sequence

import numpy as np

from ..errors import DegenerateDistributionError, InvalidInputError, ShapeError
from ..tensor import delinearize, linear_index


class IndexSample:
    """
    Drawn multi-indices for one least-squares solve.

    indices[k, c] is the subindex for tensor mode modes[c]. A row drawn
    `counts[k]` times out of `total_draws` with probability q gets weight
    sqrt(counts / (total_draws * q)), which reduces to 1/sqrt(J2 q) without
    deduplication.
    """

    def __init__(
        self,
        indices: np.ndarray,
        probabilities: np.ndarray,
        modes: Sequence[int],
        counts: np.ndarray | None = None,
        total_draws: int | None = None,
        clamp_events: int = 0,
    ):
        indices = np.asarray(indices, dtype=np.int64)
        probabilities = np.asarray(probabilities, dtype=np.float64)
        if indices.ndim != 2 or indices.shape[1] != len(modes):
            raise ShapeError(f"indices {indices.shape} do not match modes {tuple(modes)}")
        if probabilities.shape != (indices.shape[0],):
            raise ShapeError("one probability per drawn index is required")
        if np.any(probabilities <= 0) or np.any(probabilities > 1 + 1e-12):
            raise InvalidInputError("sample probabilities must lie in (0, 1]")
        self.indices = indices
        self.probabilities = probabilities
        self.modes = tuple(int(m) for m in modes)
        self.counts = (
            np.ones(indices.shape[0], dtype=np.int64)
            if counts is None
            else np.asarray(counts, dtype=np.int64)
        )
        self.total_draws = int(self.counts.sum()) if total_draws is None else int(total_draws)
        self.clamp_events = clamp_events

    @property
    def count(self) -> int:
        return self.indices.shape[0]

    @property
    def weights(self) -> np.ndarray:
        return np.sqrt(self.counts / (self.total_draws * self.probabilities))

    def columns(self, modes: Sequence[int]) -> np.ndarray:
        """Indices rearranged to the requested mode order."""
        position = {m: c for c, m in enumerate(self.modes)}
        try:
            return self.indices[:, [position[m] for m in modes]]
        except KeyError as e:
            raise ShapeError(f"mode {e.args[0]} was not sampled (have {self.modes})") from e

    def flat(self, dims: Sequence[int], modes: Sequence[int] | None = None) -> np.ndarray:
        """Linear positions of the indices on the grid `dims` listed in `modes` order."""
        modes = self.modes if modes is None else modes
        return linear_index(self.columns(modes), dims)


def draw_from_weights(weights: np.ndarray, count: int, rng: np.random.Generator) -> IndexSample:
    """count i.i.d. draws from q = weights / sum(weights) by inverse-CDF lookup."""
    weights = np.asarray(weights, dtype=np.float64).ravel()
    if np.any(weights < 0):
        raise InvalidInputError("sampling weights must be non-negative")
    total = weights.sum()
    if not total > 0:
        raise DegenerateDistributionError("sampling weights have no positive mass")
    q = weights / total
    cdf = np.cumsum(q)
    drawn = np.searchsorted(cdf, rng.random(count) * cdf[-1], side="right")
    drawn = np.minimum(drawn, weights.size - 1)
    # the clip can land on a trailing zero-weight slot; step back to the last positive one
    while np.any(q[drawn] == 0):
        zero = q[drawn] == 0
        drawn[zero] -= 1
    return IndexSample(drawn[:, None], q[drawn], modes=(0,))


def exhaustive_sample(dims: Sequence[int], modes: Sequence[int]) -> IndexSample:
    """Every grid point exactly once with uniform q, so every weight is 1."""
    dims = tuple(dims)
    total = int(np.prod(dims))
    indices = delinearize(np.arange(total), dims)
    return IndexSample(indices, np.full(total, 1.0 / total), modes=modes)
